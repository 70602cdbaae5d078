#include "soc/explain.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include "soc/io_util.hpp"

namespace soc {

namespace {

void check_span(std::size_t length, PhraseSpan span) {
  if (!(span.begin < span.end && span.end <= length)) {
    throw Error("invalid phrase span [" + std::to_string(span.begin) + "," +
                std::to_string(span.end) + ") for length " +
                std::to_string(length));
  }
}

ImportanceScore from_draws(const std::vector<double>& draws) {
  ImportanceScore score;
  score.samples = draws.size();
  double sum = 0.0;
  for (const double d : draws) sum += d;
  score.value = sum / static_cast<double>(draws.size());
  if (draws.size() > 1) {
    double ss = 0.0;
    for (const double d : draws) {
      const double delta = d - score.value;
      ss += delta * delta;
    }
    const double var = ss / static_cast<double>(draws.size() - 1);
    score.std_error = std::sqrt(var / static_cast<double>(draws.size()));
  }
  return score;
}

}  // namespace

std::vector<std::uint32_t> mask_phrase(std::span<const std::uint32_t> tokens,
                                       PhraseSpan span) {
  check_span(tokens.size(), span);
  std::vector<std::uint32_t> out(tokens.begin(), tokens.end());
  for (std::size_t i = span.begin; i < span.end; ++i) out[i] = kPadId;
  return out;
}

ImportanceScore oc_importance(const ModelParams& params,
                              std::span<const std::uint32_t> tokens,
                              PhraseSpan span) {
  check_span(tokens.size(), span);
  const double with = score(params, tokens);
  const auto masked = mask_phrase(tokens, span);
  const double without = score(params, masked);
  return ImportanceScore{with - without, 0.0, 1};
}

std::vector<std::size_t> context_positions(std::size_t length, PhraseSpan span,
                                           std::size_t context_size) {
  check_span(length, span);
  const std::size_t left_want = (context_size + 1) / 2;
  const std::size_t right_want = context_size / 2;
  std::vector<std::size_t> positions;
  const std::size_t left_have = std::min(left_want, span.begin);
  for (std::size_t i = span.begin - left_have; i < span.begin; ++i) {
    positions.push_back(i);
  }
  for (std::size_t i = span.end; i < std::min(span.end + right_want, length);
       ++i) {
    positions.push_back(i);
  }
  return positions;
}

ImportanceScore n_cii(const ModelParams& params, const NGramLM& lm,
                      std::span<const std::uint32_t> tokens, PhraseSpan span,
                      const SOCConfig& cfg, Rng& rng) {
  check_span(tokens.size(), span);
  if (cfg.samples < 1) throw Error("sample count must be >= 1");
  const auto positions = context_positions(tokens.size(), span, cfg.context_size);
  if (positions.empty()) {
    // nothing to sample: the estimator degenerates to exact occlusion
    return oc_importance(params, tokens, span);
  }

  ContextSampler sampler(lm, tokens, positions);
  std::vector<std::uint32_t> with(tokens.begin(), tokens.end());
  std::vector<double> draws;
  draws.reserve(cfg.samples);
  for (std::size_t k = 0; k < cfg.samples; ++k) {
    const auto sample = sampler.draw(rng);
    std::copy(tokens.begin(), tokens.end(), with.begin());
    sample.apply(with);
    const double s_with = score(params, with);
    auto masked = mask_phrase(with, span);
    const double s_masked = score(params, masked);
    draws.push_back(s_with - s_masked);
  }
  return from_draws(draws);
}

ImportanceScore soc_importance(const ModelParams& params, const NGramLM& lm,
                               std::span<const std::uint32_t> tokens,
                               PhraseSpan span, const SOCConfig& cfg,
                               Rng& rng) {
  return n_cii(params, lm, tokens, span, cfg, rng);
}

ImportanceScore corpus_cii(const ModelParams& params, const Corpus& corpus,
                           std::span<const std::uint32_t> phrase) {
  if (phrase.empty()) throw Error("corpus_cii requires a non-empty phrase");
  std::vector<double> values;
  for (const auto& doc : corpus.docs) {
    if (doc.split != Split::kTest) continue;
    if (doc.tokens.size() < phrase.size()) continue;
    for (std::size_t start = 0; start + phrase.size() <= doc.tokens.size();
         ++start) {
      if (!std::equal(phrase.begin(), phrase.end(),
                      doc.tokens.begin() + static_cast<long>(start))) {
        continue;
      }
      const PhraseSpan span{start, start + phrase.size()};
      values.push_back(oc_importance(params, doc.tokens, span).value);
    }
  }
  if (values.empty()) {
    throw Error("phrase does not occur in the test split");
  }
  return from_draws(values);
}

ExplanationTree hierarchical_explanation(const ModelParams& params,
                                         const NGramLM& lm,
                                         std::span<const std::uint32_t> tokens,
                                         const SOCConfig& cfg,
                                         std::uint64_t seed) {
  if (tokens.empty()) {
    throw Error("hierarchical explanation requires a non-empty sentence");
  }
  auto span_score = [&](PhraseSpan span) {
    Rng rng = make_rng(derive_seed(seed, span.begin, span.end));
    return soc_importance(params, lm, tokens, span, cfg, rng);
  };

  ExplanationTree tree;
  std::vector<int> active;  // node index per current adjacent span
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const PhraseSpan span{i, i + 1};
    tree.nodes.push_back(ExplanationNode{span, span_score(span), -1, -1});
    active.push_back(static_cast<int>(i));
  }
  while (active.size() > 1) {
    std::size_t best = 0;
    double best_value = -1.0;
    ImportanceScore best_score;
    for (std::size_t i = 0; i + 1 < active.size(); ++i) {
      const PhraseSpan merged{tree.nodes[active[i]].span.begin,
                              tree.nodes[active[i + 1]].span.end};
      const auto score = span_score(merged);
      if (std::abs(score.value) > best_value) {
        best_value = std::abs(score.value);
        best = i;
        best_score = score;
      }
    }
    const PhraseSpan merged{tree.nodes[active[best]].span.begin,
                            tree.nodes[active[best + 1]].span.end};
    tree.nodes.push_back(ExplanationNode{merged, best_score, active[best],
                                         active[best + 1]});
    active[best] = static_cast<int>(tree.nodes.size() - 1);
    active.erase(active.begin() + static_cast<long>(best) + 1);
  }
  tree.root = active[0];
  return tree;
}

std::vector<WordImportance> mean_word_importance(
    const ModelParams& params, const NGramLM& lm, const Corpus& corpus,
    const SOCConfig& cfg, std::size_t top_k, std::uint64_t seed,
    const ExecPolicy& policy) {
  const auto test_docs = corpus.doc_indices(Split::kTest);
  if (test_docs.empty()) {
    throw Error("mean_word_importance requires a non-empty test split");
  }

  // one slot per document; scheduling cannot affect the reduction order
  std::vector<std::vector<std::pair<std::uint32_t, double>>> slots(
      test_docs.size());
  for_each_index(test_docs.size(), policy, [&](std::size_t i) {
    const auto& doc = corpus.docs[test_docs[i]];
    Rng rng = make_rng(derive_seed(seed, 0xd0c, test_docs[i]));
    auto& slot = slots[i];
    slot.reserve(doc.tokens.size());
    for (std::size_t t = 0; t < doc.tokens.size(); ++t) {
      const auto phi =
          soc_importance(params, lm, doc.tokens, {t, t + 1}, cfg, rng);
      slot.emplace_back(doc.tokens[t], phi.value);
    }
  });

  std::map<std::string, std::pair<double, std::size_t>> totals;
  for (const auto& slot : slots) {
    for (const auto& [id, phi] : slot) {
      auto& agg = totals[corpus.vocab.surface(id)];
      agg.first += phi;
      agg.second += 1;
    }
  }
  std::vector<WordImportance> out;
  out.reserve(totals.size());
  for (const auto& [surface, agg] : totals) {
    out.push_back(WordImportance{surface,
                                 agg.first / static_cast<double>(agg.second),
                                 agg.second});
  }
  std::sort(out.begin(), out.end(),
            [](const WordImportance& a, const WordImportance& b) {
              if (a.mean != b.mean) return a.mean > b.mean;
              return a.surface < b.surface;
            });
  if (out.size() > top_k) out.resize(top_k);
  return out;
}

std::string span_text(const Vocabulary& vocab,
                      std::span<const std::uint32_t> tokens, PhraseSpan span) {
  std::string text;
  for (std::size_t i = span.begin; i < span.end; ++i) {
    if (i > span.begin) text += ' ';
    text += vocab.surface(tokens[i]);
  }
  return text;
}

void write_record_header(std::ostream& out) {
  out << "doc\tbegin\tend\ttext\tphi\tstderr\tsamples\tcontext\n";
}

void write_record(std::ostream& out, const ExplainRecord& rec) {
  out << rec.doc << "\t" << rec.span.begin << "\t" << rec.span.end << "\t"
      << rec.text << "\t" << format_metric(rec.phi) << "\t"
      << format_metric(rec.std_error) << "\t" << rec.samples << "\t"
      << rec.context << "\n";
}

std::vector<ExplainRecord> tree_records(const ExplanationTree& tree,
                                        const Vocabulary& vocab,
                                        std::span<const std::uint32_t> tokens,
                                        std::size_t doc_id,
                                        const SOCConfig& cfg) {
  std::vector<ExplainRecord> records;
  records.reserve(tree.nodes.size());
  for (const auto& node : tree.nodes) {
    records.push_back(ExplainRecord{doc_id, node.span,
                                    span_text(vocab, tokens, node.span),
                                    node.score.value, node.score.std_error,
                                    cfg.samples, cfg.context_size});
  }
  std::sort(records.begin(), records.end(),
            [](const ExplainRecord& a, const ExplainRecord& b) {
              if (a.span.begin != b.span.begin) {
                return a.span.begin < b.span.begin;
              }
              return a.span.end > b.span.end;
            });
  return records;
}

namespace {

void render_node(std::ostream& out, const ExplanationTree& tree,
                 const Vocabulary& vocab,
                 std::span<const std::uint32_t> tokens, int index, int depth) {
  const auto& node = tree.nodes[index];
  for (int i = 0; i < depth; ++i) out << "  ";
  out << "[" << node.span.begin << "," << node.span.end << ") "
      << span_text(vocab, tokens, node.span) << "  phi="
      << format_metric(node.score.value) << "\n";
  if (node.left >= 0) {
    render_node(out, tree, vocab, tokens, node.left, depth + 1);
    render_node(out, tree, vocab, tokens, node.right, depth + 1);
  }
}

}  // namespace

void render_tree(std::ostream& out, const ExplanationTree& tree,
                 const Vocabulary& vocab,
                 std::span<const std::uint32_t> tokens) {
  if (tree.root >= 0) render_node(out, tree, vocab, tokens, tree.root, 0);
}

}  // namespace soc
