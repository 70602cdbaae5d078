#include "soc/train.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "soc/eval.hpp"
#include "soc/io_util.hpp"

namespace soc {

namespace {

// stream tags for deriving independent rng streams from one seed
constexpr std::uint64_t kInitStream = 0x101;
constexpr std::uint64_t kShuffleStream = 0x202;
constexpr std::uint64_t kResampleStream = 0x303;
constexpr std::uint64_t kFrozenStream = 0x404;

}  // namespace

const char* method_name(Method m) {
  switch (m) {
    case Method::kPlain: return "plain";
    case Method::kWr: return "wr";
    case Method::kOcReg: return "oc-reg";
    case Method::kSocReg: return "soc-reg";
  }
  return "plain";
}

std::optional<Method> parse_method(std::string_view name) {
  if (name == "plain") return Method::kPlain;
  if (name == "wr") return Method::kWr;
  if (name == "oc-reg") return Method::kOcReg;
  if (name == "soc-reg") return Method::kSocReg;
  return std::nullopt;
}

std::pair<double, std::array<double, 2>> class_loss(
    const std::array<double, 2>& logits, int label) {
  if (label != 0 && label != 1) throw Error("label must be 0 or 1");
  const double m = std::max(logits[0], logits[1]);
  const double e0 = std::exp(logits[0] - m);
  const double e1 = std::exp(logits[1] - m);
  const double z = e0 + e1;
  const double p0 = e0 / z;
  const double p1 = e1 / z;
  const double loss = -(logits[label] - m - std::log(z));
  return {loss, {p0 - (label == 0 ? 1.0 : 0.0), p1 - (label == 1 ? 1.0 : 0.0)}};
}

std::vector<std::size_t> lexicon_positions(
    std::span<const std::uint32_t> tokens, const IdentifierLexicon& lexicon) {
  std::vector<std::size_t> out;
  if (lexicon.empty()) return out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (lexicon.contains(tokens[i])) out.push_back(i);
  }
  return out;
}

PenaltyResult reg_penalty_with_samples(
    const ModelParams& params, std::span<const std::uint32_t> tokens,
    const std::vector<std::size_t>& occurrence_positions,
    const std::vector<std::vector<ContextSample>>& samples_per_occurrence) {
  if (occurrence_positions.size() != samples_per_occurrence.size()) {
    throw Error("one sample set per occurrence required");
  }
  PenaltyResult result;
  result.grad = GradientSet(params);
  GradientSet occurrence_grad(params);

  std::vector<std::uint32_t> with(tokens.begin(), tokens.end());
  for (std::size_t j = 0; j < occurrence_positions.size(); ++j) {
    const std::size_t pos = occurrence_positions[j];
    const auto& samples = samples_per_occurrence[j];
    if (samples.empty()) throw Error("occurrence has no context samples");
    const PhraseSpan span{pos, pos + 1};
    const double inv_k = 1.0 / static_cast<double>(samples.size());

    occurrence_grad.zero();
    double phi = 0.0;
    for (const auto& sample : samples) {
      std::copy(tokens.begin(), tokens.end(), with.begin());
      sample.apply(with);

      ForwardTrace trace_with;
      const auto logits_with = forward(params, with, &trace_with);
      const auto masked = mask_phrase(with, span);
      ForwardTrace trace_masked;
      const auto logits_masked = forward(params, masked, &trace_masked);

      phi += (logits_with[1] - logits_with[0] -
              (logits_masked[1] - logits_masked[0])) *
             inv_k;
      backward_accumulate(params, trace_with, {-1.0, 1.0}, inv_k,
                          occurrence_grad);
      backward_accumulate(params, trace_masked, {-1.0, 1.0}, -inv_k,
                          occurrence_grad);
    }
    result.penalty += phi * phi;
    result.grad.axpy(2.0 * phi, occurrence_grad);
  }
  return result;
}

namespace {

// K frozen draws per occurrence; oc-reg carries one empty sample so the
// estimator is exact occlusion.
std::vector<std::vector<ContextSample>> draw_penalty_samples(
    const NGramLM* lm, std::span<const std::uint32_t> tokens,
    const std::vector<std::size_t>& occurrences, Method method,
    const SOCConfig& cfg, Rng& rng) {
  std::vector<std::vector<ContextSample>> out(occurrences.size());
  for (std::size_t j = 0; j < occurrences.size(); ++j) {
    const PhraseSpan span{occurrences[j], occurrences[j] + 1};
    if (method == Method::kOcReg) {
      out[j].push_back(ContextSample{});
      continue;
    }
    const auto positions =
        context_positions(tokens.size(), span, cfg.context_size);
    if (positions.empty()) {
      out[j].push_back(ContextSample{});
      continue;
    }
    ContextSampler sampler(*lm, tokens, positions);
    out[j].reserve(cfg.samples);
    for (std::size_t k = 0; k < cfg.samples; ++k) {
      out[j].push_back(sampler.draw(rng));
    }
  }
  return out;
}

}  // namespace

PenaltyResult reg_penalty(const ModelParams& params, const NGramLM* lm,
                          std::span<const std::uint32_t> tokens,
                          const IdentifierLexicon& lexicon, Method method,
                          const SOCConfig& cfg, Rng& rng) {
  if (!is_regularized(method)) {
    throw Error("reg_penalty requires oc-reg or soc-reg");
  }
  if (method == Method::kSocReg && lm == nullptr) {
    throw Error("soc-reg requires a fitted language model");
  }
  const auto occurrences = lexicon_positions(tokens, lexicon);
  if (occurrences.empty()) {
    PenaltyResult empty;
    empty.grad = GradientSet(params);
    return empty;
  }
  const auto samples =
      draw_penalty_samples(lm, tokens, occurrences, method, cfg, rng);
  return reg_penalty_with_samples(params, tokens, occurrences, samples);
}

std::pair<ModelParams, TrainReport> train(const Corpus& corpus,
                                          const IdentifierLexicon& lexicon,
                                          const NGramLM* lm,
                                          const TrainConfig& cfg) {
  const auto train_idx = corpus.doc_indices(Split::kTrain);
  if (train_idx.empty()) throw Error("train split is empty");
  if (cfg.alpha < 0.0) throw Error("alpha must be >= 0");
  if (cfg.method == Method::kWr && lexicon.empty()) {
    throw Error("wr requires a non-empty lexicon");
  }
  const double alpha = is_regularized(cfg.method) ? cfg.alpha : 0.0;
  const bool use_penalty = alpha > 0.0;
  if (use_penalty && cfg.method == Method::kSocReg && lm == nullptr) {
    throw Error("soc-reg requires a fitted language model");
  }

  std::vector<Document> working;
  working.reserve(train_idx.size());
  for (const auto i : train_idx) {
    if (cfg.method == Method::kWr) {
      working.push_back(remove_identifiers(corpus.docs[i], lexicon));
    } else {
      working.push_back(corpus.docs[i]);
    }
  }
  const std::size_t n = working.size();

  ModelParams params =
      init_params(corpus.vocab.size(), cfg.embed_dim, cfg.hidden_dim,
                  derive_seed(cfg.seed, kInitStream));
  AdamState state(params);
  GradientSet grad(params);

  std::vector<std::vector<std::size_t>> occurrences;
  std::vector<std::vector<std::vector<ContextSample>>> frozen;
  std::vector<bool> frozen_ready;
  if (use_penalty) {
    occurrences.resize(n);
    for (std::size_t e = 0; e < n; ++e) {
      occurrences[e] = lexicon_positions(working[e].tokens, lexicon);
    }
    if (!cfg.resample_contexts) {
      frozen.resize(n);
      frozen_ready.assign(n, false);
    }
  }

  const auto val_idx = corpus.doc_indices(Split::kVal);
  TrainReport report;
  report.epochs.reserve(cfg.epochs);

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng shuffle_rng = make_rng(derive_seed(cfg.seed, kShuffleStream, epoch));
    shuffle(order, shuffle_rng);
    Rng resample_rng = make_rng(derive_seed(cfg.seed, kResampleStream, epoch));

    double loss_sum = 0.0;
    double penalty_sum = 0.0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t stop = std::min(n, start + cfg.batch_size);
      const double inv_batch = 1.0 / static_cast<double>(stop - start);
      grad.zero();
      for (std::size_t b = start; b < stop; ++b) {
        const std::size_t e = order[b];
        const auto& doc = working[e];
        ForwardTrace trace;
        const auto logits = forward(params, doc.tokens, &trace);
        const auto [loss, upstream] = class_loss(logits, doc.label);
        loss_sum += loss;
        backward_accumulate(params, trace, upstream, inv_batch, grad);

        if (!use_penalty || occurrences[e].empty()) continue;
        PenaltyResult pen;
        if (cfg.resample_contexts) {
          const auto samples =
              draw_penalty_samples(lm, doc.tokens, occurrences[e], cfg.method,
                                   cfg.soc, resample_rng);
          pen = reg_penalty_with_samples(params, doc.tokens, occurrences[e],
                                         samples);
        } else {
          if (!frozen_ready[e]) {
            Rng freeze_rng = make_rng(derive_seed(cfg.seed, kFrozenStream, e));
            frozen[e] =
                draw_penalty_samples(lm, doc.tokens, occurrences[e],
                                     cfg.method, cfg.soc, freeze_rng);
            frozen_ready[e] = true;
          }
          pen = reg_penalty_with_samples(params, doc.tokens, occurrences[e],
                                         frozen[e]);
        }
        penalty_sum += pen.penalty;
        grad.axpy(alpha * inv_batch, pen.grad);
      }
      adam_step(params, grad, state, cfg.lr, cfg.beta1, cfg.beta2, cfg.eps);
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.class_loss = loss_sum / static_cast<double>(n);
    stats.penalty = penalty_sum / static_cast<double>(n);
    if (!val_idx.empty()) {
      stats.val_f1 = prf(confusion(params, corpus.docs, val_idx)).f1;
      stats.val_f1_defined = true;
    }
    stats.param_hash = params_hash(params);
    report.epochs.push_back(stats);
  }
  return {std::move(params), std::move(report)};
}

void write_train_report(std::ostream& out, const TrainReport& report) {
  out << "epoch\tclass_loss\tpenalty\tval_f1\tparam_hash\n";
  for (const auto& e : report.epochs) {
    out << e.epoch << "\t" << format_metric(e.class_loss) << "\t"
        << format_metric(e.penalty) << "\t"
        << (e.val_f1_defined ? format_metric(e.val_f1) : std::string("-"))
        << "\t" << std::hex << e.param_hash << std::dec << "\n";
  }
  if (!report.checkpoint_path.empty()) {
    out << "checkpoint\t" << report.checkpoint_path << "\n";
  }
}

}  // namespace soc
