#include "soc/oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <sstream>

#include "soc/eval.hpp"
#include "soc/explain.hpp"
#include "soc/fixtures.hpp"
#include "soc/io_util.hpp"
#include "soc/train.hpp"

namespace soc {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

template <typename Fn>
OracleCheck timed_check(const std::string& name, Fn&& body) {
  OracleCheck check;
  check.name = name;
  const auto start = Clock::now();
  try {
    check.passed = body(check.detail);
  } catch (const std::exception& e) {
    check.passed = false;
    check.detail = std::string("exception: ") + e.what();
  }
  check.seconds = elapsed_seconds(start);
  return check;
}

// small random corpus over surfaces w0..w{n-1}, everything in the train split
Corpus tiny_corpus(Rng& rng, std::size_t n_words, std::size_t n_docs,
                   std::size_t max_len) {
  Vocabulary vocab;
  for (std::size_t i = 0; i < n_words; ++i) {
    vocab.add("w" + std::to_string(i));
  }
  Corpus corpus;
  corpus.vocab = std::move(vocab);
  for (std::size_t d = 0; d < n_docs; ++d) {
    Document doc;
    doc.split = Split::kTrain;
    doc.label = static_cast<int>(uniform_below(rng, 2));
    const std::size_t len = 1 + uniform_below(rng, max_len);
    for (std::size_t t = 0; t < len; ++t) {
      doc.tokens.push_back(
          kNumReserved +
          static_cast<std::uint32_t>(uniform_below(rng, n_words)));
    }
    corpus.docs.push_back(std::move(doc));
  }
  corpus.recompute_counts();
  return corpus;
}

std::vector<std::uint32_t> random_sentence(Rng& rng, std::size_t vocab_size,
                                           std::size_t len) {
  std::vector<std::uint32_t> tokens(len);
  for (auto& t : tokens) {
    t = kNumReserved + static_cast<std::uint32_t>(uniform_below(
                           rng, vocab_size - kNumReserved));
  }
  return tokens;
}

PhraseSpan random_span(Rng& rng, std::size_t len) {
  const std::size_t begin = uniform_below(rng, len);
  const std::size_t end = begin + 1 + uniform_below(rng, len - begin);
  return PhraseSpan{begin, end};
}

struct ParamBlock {
  double* data;
  std::size_t size;
};

std::vector<ParamBlock> param_blocks(ModelParams& params) {
  return {{params.embedding.data.data(), params.embedding.data.size()},
          {params.w1.data.data(), params.w1.data.size()},
          {params.b1.data(), params.b1.size()},
          {params.w2.data.data(), params.w2.data.size()},
          {params.b2.data(), params.b2.size()}};
}

std::vector<ParamBlock> grad_blocks(const GradientSet& grads) {
  auto& g = const_cast<GradientSet&>(grads);
  return {{g.embedding.data.data(), g.embedding.data.size()},
          {g.w1.data.data(), g.w1.data.size()},
          {g.b1.data(), g.b1.size()},
          {g.w2.data.data(), g.w2.data.size()},
          {g.b2.data(), g.b2.size()}};
}

}  // namespace

bool gradients_match(const std::function<double(const ModelParams&)>& objective,
                     ModelParams params, const GradientSet& analytic,
                     double step, double tol, std::string* detail) {
  constexpr double kAbsFloor = 1e-7;
  auto blocks = param_blocks(params);
  const auto grads = grad_blocks(analytic);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    for (std::size_t i = 0; i < blocks[b].size; ++i) {
      double& w = blocks[b].data[i];
      const double saved = w;
      w = saved + step;
      const double up = objective(params);
      w = saved - step;
      const double down = objective(params);
      w = saved;
      const double fd = (up - down) / (2.0 * step);
      const double an = grads[b].data[i];
      const double scale = std::max(std::abs(fd), std::abs(an));
      if (scale <= kAbsFloor) continue;
      if (std::abs(fd - an) > tol * scale) {
        if (detail) {
          std::ostringstream os;
          os << "block " << b << " coord " << i << ": analytic " << an
             << " vs fd " << fd;
          *detail = os.str();
        }
        return false;
      }
    }
  }
  return true;
}

OracleCheck check_reduction_identity(const OracleOptions& opt) {
  return timed_check("reduction-identity", [&](std::string& detail) {
    Rng rng = make_rng(derive_seed(opt.seed, 0x01));
    const Corpus corpus = [&] {
      Rng crng = make_rng(derive_seed(opt.seed, 0x02));
      return tiny_corpus(crng, 4, 6, 5);
    }();
    const NGramLM lm = fit_lm(corpus, 2, 0.5);

    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
      const std::size_t vocab_size = 5 + uniform_below(rng, 8);
      const std::size_t d = 1 + uniform_below(rng, 6);
      const std::size_t h = 1 + uniform_below(rng, 6);
      const auto params = init_params(vocab_size, d, h, rng());
      const std::size_t len = 1 + uniform_below(rng, 8);
      const auto tokens = random_sentence(rng, vocab_size, len);
      const auto span = random_span(rng, len);

      const auto oc = oc_importance(params, tokens, span);
      Rng sample_rng = make_rng(rng());
      const auto reduced =
          n_cii(params, lm, tokens, span, SOCConfig{0, 1}, sample_rng);
      worst = std::max(worst, std::abs(reduced.value - oc.value));
      if (std::abs(reduced.value - oc.value) > 1e-12 ||
          reduced.std_error != 0.0) {
        detail = "trial " + std::to_string(trial) + " diverged";
        return false;
      }
    }
    detail = "1000 triples, max |diff| = " + format_metric(worst, 17);
    return true;
  });
}

OracleCheck check_estimator_vs_enumeration(const OracleOptions& opt) {
  return timed_check("estimator-vs-enumeration", [&](std::string& detail) {
    constexpr int kFixtures = 20;
    constexpr int kTrials = 100;
    constexpr std::size_t kDraws = 100000;

    struct Fixture {
      Corpus corpus;
      NGramLM lm;
      ModelParams params;
      std::vector<std::uint32_t> sentence;
      PhraseSpan span;
      SOCConfig cfg;
      double exact = 0.0;
    };

    std::vector<Fixture> fixtures;
    fixtures.reserve(kFixtures);
    for (int f = 0; f < kFixtures; ++f) {
      Rng rng = make_rng(derive_seed(opt.seed, 0x10, f));
      Fixture fx;
      const std::size_t words = 3 + uniform_below(rng, 6);  // 3..8 sampleable
      fx.corpus = tiny_corpus(rng, words, 6 + uniform_below(rng, 5), 8);
      fx.lm = fit_lm(fx.corpus, 2, 0.5);
      const std::size_t vocab_size = fx.corpus.vocab.size();
      fx.params = init_params(vocab_size, 2 + uniform_below(rng, 3),
                              2 + uniform_below(rng, 3), rng());
      fx.cfg.samples = kDraws;
      // regenerate until the span leaves at least one context position
      while (true) {
        const std::size_t len = 2 + uniform_below(rng, 5);  // 2..6
        fx.sentence = random_sentence(rng, vocab_size, len);
        fx.span = random_span(rng, len);
        fx.cfg.context_size = 1 + uniform_below(rng, 2);  // N in {1,2}
        if (!context_positions(len, fx.span, fx.cfg.context_size).empty()) {
          break;
        }
      }
      const auto positions =
          context_positions(fx.sentence.size(), fx.span, fx.cfg.context_size);
      const auto outcomes =
          enumerate_context_distribution(fx.lm, fx.sentence, positions);
      double expectation = 0.0;
      std::vector<std::uint32_t> with(fx.sentence);
      for (const auto& [assignment, prob] : outcomes) {
        std::copy(fx.sentence.begin(), fx.sentence.end(), with.begin());
        assignment.apply(with);
        const double s_with = score(fx.params, with);
        const auto masked = mask_phrase(with, fx.span);
        expectation += prob * (s_with - score(fx.params, masked));
      }
      fx.exact = expectation;
      fixtures.push_back(std::move(fx));
    }

    std::vector<int> within(kFixtures * kTrials, 0);
    for_each_index(static_cast<std::size_t>(kFixtures * kTrials), opt.policy,
                   [&](std::size_t job) {
                     const int f = static_cast<int>(job) / kTrials;
                     const int t = static_cast<int>(job) % kTrials;
                     const auto& fx = fixtures[f];
                     Rng rng = make_rng(derive_seed(opt.seed, 0x11, f, t));
                     SOCConfig cfg = fx.cfg;
                     Rng draw_rng = make_rng(rng());
                     const auto est = soc_importance(
                         fx.params, fx.lm, fx.sentence, fx.span, cfg, draw_rng);
                     within[job] =
                         std::abs(est.value - fx.exact) <= 3.0 * est.std_error
                             ? 1
                             : 0;
                   });

    int min_within = kTrials;
    for (int f = 0; f < kFixtures; ++f) {
      int count = 0;
      for (int t = 0; t < kTrials; ++t) count += within[f * kTrials + t];
      min_within = std::min(min_within, count);
    }
    detail = "min " + std::to_string(min_within) + "/100 trials within 3*stderr";
    return min_within >= 99;
  });
}

namespace {

OracleCheck gradient_check(const char* name, const OracleOptions& opt,
                           std::uint64_t stream, int configs,
                           const std::function<bool(Rng&, std::string&)>& one) {
  return timed_check(name, [&](std::string& detail) {
    for (int c = 0; c < configs; ++c) {
      Rng rng = make_rng(derive_seed(opt.seed, stream, c));
      std::string coord_detail;
      if (!one(rng, coord_detail)) {
        detail = "config " + std::to_string(c) + ": " + coord_detail;
        return false;
      }
    }
    detail = std::to_string(configs) + " configurations";
    return true;
  });
}

}  // namespace

OracleCheck check_gradient_score(const OracleOptions& opt) {
  return gradient_check(
      "gradient-score", opt, 0x20, 50, [](Rng& rng, std::string& detail) {
        const std::size_t vocab_size = 5 + uniform_below(rng, 6);
        const auto params =
            init_params(vocab_size, 1 + uniform_below(rng, 8),
                        1 + uniform_below(rng, 8), rng());
        auto tokens =
            random_sentence(rng, vocab_size, 1 + uniform_below(rng, 6));
        if (tokens.size() > 1 && uniform_below(rng, 3) == 0) {
          tokens[uniform_below(rng, tokens.size())] = kPadId;
        }
        ForwardTrace trace;
        forward(params, tokens, &trace);
        const auto analytic = score_gradient(params, trace);
        return gradients_match(
            [&tokens](const ModelParams& p) { return score(p, tokens); },
            params, analytic, 1e-5, 1e-4, &detail);
      });
}

OracleCheck check_gradient_class_loss(const OracleOptions& opt) {
  return gradient_check(
      "gradient-class-loss", opt, 0x21, 50, [](Rng& rng, std::string& detail) {
        const std::size_t vocab_size = 5 + uniform_below(rng, 6);
        const auto params =
            init_params(vocab_size, 1 + uniform_below(rng, 8),
                        1 + uniform_below(rng, 8), rng());
        const auto tokens =
            random_sentence(rng, vocab_size, 1 + uniform_below(rng, 6));
        const int label = static_cast<int>(uniform_below(rng, 2));
        ForwardTrace trace;
        const auto logits = forward(params, tokens, &trace);
        const auto [loss, upstream] = class_loss(logits, label);
        (void)loss;
        const auto analytic = backward(params, trace, upstream);
        return gradients_match(
            [&tokens, label](const ModelParams& p) {
              return class_loss(forward(p, tokens), label).first;
            },
            params, analytic, 1e-5, 1e-4, &detail);
      });
}

OracleCheck check_gradient_penalty(const OracleOptions& opt) {
  return gradient_check(
      "gradient-penalty", opt, 0x22, 50, [](Rng& rng, std::string& detail) {
        Corpus corpus = tiny_corpus(rng, 4 + uniform_below(rng, 4),
                                    6 + uniform_below(rng, 4), 6);
        const NGramLM lm = fit_lm(corpus, 2, 0.5);
        const std::size_t vocab_size = corpus.vocab.size();
        const auto params =
            init_params(vocab_size, 1 + uniform_below(rng, 4),
                        1 + uniform_below(rng, 4), rng());
        const auto tokens =
            random_sentence(rng, vocab_size, 2 + uniform_below(rng, 5));

        // lexicon = one or two ids that occur in the sentence
        std::vector<std::uint32_t> ids{tokens[uniform_below(rng, tokens.size())]};
        if (uniform_below(rng, 2) == 0) {
          ids.push_back(tokens[uniform_below(rng, tokens.size())]);
        }
        const auto lexicon = make_lexicon(std::move(ids));
        const auto occurrences = lexicon_positions(tokens, lexicon);

        SOCConfig cfg{uniform_below(rng, 4), 1 + uniform_below(rng, 5)};
        const Method method =
            uniform_below(rng, 2) == 0 ? Method::kOcReg : Method::kSocReg;
        Rng draw_rng(rng());
        std::vector<std::vector<ContextSample>> samples(occurrences.size());
        for (std::size_t j = 0; j < occurrences.size(); ++j) {
          const PhraseSpan span{occurrences[j], occurrences[j] + 1};
          const auto positions =
              context_positions(tokens.size(), span, cfg.context_size);
          if (method == Method::kOcReg || positions.empty()) {
            samples[j].push_back(ContextSample{});
          } else {
            ContextSampler sampler(lm, tokens, positions);
            for (std::size_t k = 0; k < cfg.samples; ++k) {
              samples[j].push_back(sampler.draw(draw_rng));
            }
          }
        }

        const auto result =
            reg_penalty_with_samples(params, tokens, occurrences, samples);
        return gradients_match(
            [&](const ModelParams& p) {
              return reg_penalty_with_samples(p, tokens, occurrences, samples)
                  .penalty;
            },
            params, result.grad, 1e-5, 1e-4, &detail);
      });
}

namespace {

Corpus oracle_fixture_corpus(std::uint64_t seed, std::size_t train_docs,
                             std::size_t test_docs,
                             IdentifierLexicon* lexicon_out) {
  FixtureConfig fcfg;
  fcfg.train_docs = train_docs;
  fcfg.test_docs = test_docs;
  fcfg.pool_docs = 0;
  fcfg.identifiers = 4;
  fcfg.seed = seed;
  const auto fixture = make_planted_fixture(fcfg);
  const auto vocab = build_vocab(fixture.corpus, 1);
  Corpus corpus = encode(fixture.corpus, vocab);
  if (lexicon_out) {
    std::vector<std::uint32_t> ids;
    for (const auto& surface : fixture.identifiers) {
      const auto id = corpus.vocab.lookup(surface);
      if (!is_reserved(id)) ids.push_back(id);
    }
    *lexicon_out = make_lexicon(std::move(ids));
  }
  return corpus;
}

}  // namespace

OracleCheck check_objective_reduction(const OracleOptions& opt) {
  return timed_check("objective-reduction", [&](std::string& detail) {
    IdentifierLexicon lexicon;
    const Corpus corpus =
        oracle_fixture_corpus(derive_seed(opt.seed, 0x30), 80, 20, &lexicon);
    const NGramLM lm = fit_lm(corpus, 2, 0.5);

    TrainConfig base;
    base.epochs = 4;
    base.embed_dim = 6;
    base.hidden_dim = 4;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      TrainConfig plain_cfg = base;
      plain_cfg.method = Method::kPlain;
      plain_cfg.seed = seed;
      TrainConfig soc_cfg = base;
      soc_cfg.method = Method::kSocReg;
      soc_cfg.alpha = 0.0;
      soc_cfg.seed = seed;

      const auto [plain_params, plain_report] =
          train(corpus, lexicon, &lm, plain_cfg);
      const auto [soc_params, soc_report] = train(corpus, lexicon, &lm, soc_cfg);
      if (plain_params.embedding.data != soc_params.embedding.data ||
          plain_params.w1.data != soc_params.w1.data ||
          plain_params.b1 != soc_params.b1 ||
          plain_params.w2.data != soc_params.w2.data ||
          plain_params.b2 != soc_params.b2) {
        detail = "final parameters differ for seed " + std::to_string(seed);
        return false;
      }
      for (std::size_t e = 0; e < plain_report.epochs.size(); ++e) {
        if (plain_report.epochs[e].param_hash !=
            soc_report.epochs[e].param_hash) {
          detail = "trajectory diverges at epoch " + std::to_string(e) +
                   " for seed " + std::to_string(seed);
          return false;
        }
      }
    }
    detail = "3 seeds, bitwise-identical trajectories";
    return true;
  });
}

OracleCheck check_wr_removal(const OracleOptions& opt) {
  return timed_check("wr-removal", [&](std::string& detail) {
    IdentifierLexicon lexicon;
    const Corpus corpus =
        oracle_fixture_corpus(derive_seed(opt.seed, 0x31), 200, 50, &lexicon);
    if (lexicon.empty()) {
      detail = "fixture lexicon is empty";
      return false;
    }
    std::size_t scanned = 0;
    for (const auto& doc : corpus.docs) {
      if (doc.split != Split::kTrain) continue;
      const auto cleaned = remove_identifiers(doc, lexicon);
      for (const auto id : cleaned.tokens) {
        if (lexicon.contains(id)) {
          detail = "lexicon token survived removal";
          return false;
        }
      }
      scanned += cleaned.tokens.size();
    }
    detail = "scanned " + std::to_string(scanned) + " tokens, none in lexicon";
    return true;
  });
}

OracleCheck check_metric_oracles(const OracleOptions& opt) {
  return timed_check("metric-oracles", [&](std::string& detail) {
    // degenerate enumerated case: tp = fp = fn = 1
    const PRF half = prf(ConfusionCounts{1, 1, 1, 1});
    if (half.precision != 0.5 || half.recall != 0.5 || half.f1 != 0.5) {
      detail = "tp=fp=fn=1 case wrong";
      return false;
    }

    Rng rng = make_rng(derive_seed(opt.seed, 0x32));
    const std::size_t vocab_size = 20;
    auto params = init_params(vocab_size, 4, 4, rng());
    // zero the biases and scale the embeddings so the token mix alone
    // decides the sign and predictions straddle the threshold
    params.b2 = {0.0, 0.0};
    std::fill(params.b1.begin(), params.b1.end(), 0.0);
    for (auto& v : params.embedding.data) v *= 10.0;
    std::vector<Document> docs(10000);
    for (auto& doc : docs) {
      doc.label = static_cast<int>(uniform_below(rng, 2));
      doc.tokens = random_sentence(rng, vocab_size, 1 + uniform_below(rng, 8));
    }
    const auto counts = confusion(params, docs, 0.0);

    // brute-force recomputation from raw (prediction, label) pairs
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    for (const auto& doc : docs) {
      const bool predicted = score(params, doc.tokens) > 0.0;
      if (predicted && doc.label == 1) tp++;
      if (predicted && doc.label == 0) fp++;
      if (!predicted && doc.label == 0) tn++;
      if (!predicted && doc.label == 1) fn++;
    }
    if (counts.tp != tp || counts.fp != fp || counts.tn != tn ||
        counts.fn != fn) {
      detail = "confusion counts disagree with brute force";
      return false;
    }
    const auto metrics = prf(counts);
    const double precision =
        tp + fp == 0 ? 0.0
                     : static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double recall =
        tp + fn == 0 ? 0.0
                     : static_cast<double>(tp) / static_cast<double>(tp + fn);
    const double f1 = precision + recall == 0.0
                          ? 0.0
                          : 2.0 * precision * recall / (precision + recall);
    if (metrics.precision != precision || metrics.recall != recall ||
        metrics.f1 != f1) {
      detail = "prf disagrees with brute force";
      return false;
    }
    if (tp == 0 || fp == 0 || tn == 0 || fn == 0) {
      detail = "degenerate confusion distribution; fixture not exercising prf";
      return false;
    }
    detail = "10000-document brute force match";
    return true;
  });
}

OracleCheck check_determinism(const OracleOptions& opt) {
  return timed_check("determinism", [&](std::string& detail) {
    IdentifierLexicon lexicon;
    FixtureConfig fcfg;
    fcfg.train_docs = 80;
    fcfg.test_docs = 30;
    fcfg.pool_docs = 60;
    fcfg.identifiers = 4;
    fcfg.seed = derive_seed(opt.seed, 0x33);
    const auto fixture = make_planted_fixture(fcfg);
    const auto vocab = build_vocab(fixture.corpus, 1);
    const Corpus corpus = encode(fixture.corpus, vocab);
    const Corpus pool = encode(fixture.adversarial_pool, corpus.vocab);
    {
      std::vector<std::uint32_t> ids;
      for (const auto& surface : fixture.identifiers) {
        const auto id = corpus.vocab.lookup(surface);
        if (!is_reserved(id)) ids.push_back(id);
      }
      lexicon = make_lexicon(std::move(ids));
    }
    const NGramLM lm = fit_lm(corpus, 2, 0.5);

    TrainConfig cfg;
    cfg.method = Method::kSocReg;
    cfg.alpha = 1.0;
    cfg.epochs = 3;
    cfg.embed_dim = 6;
    cfg.hidden_dim = 4;
    cfg.soc = SOCConfig{2, 4};
    cfg.seed = 11;

    auto run_once = [&](std::string& checkpoint_bytes, std::string& report_bytes,
                        std::string& summary_bytes) {
      const auto [params, report] = train(corpus, lexicon, &lm, cfg);
      std::ostringstream ckpt;
      save_checkpoint(params, corpus.vocab, ckpt);
      checkpoint_bytes = ckpt.str();
      std::ostringstream rep;
      write_train_report(rep, report);
      report_bytes = rep.str();

      const auto advset = build_adversarial_set(pool, lexicon, 20, 5);
      SeedMetrics metrics;
      metrics.seed = cfg.seed;
      metrics.prf =
          prf(confusion(params, corpus.docs, corpus.doc_indices(Split::kTest)));
      metrics.adversarial = adversarial_accuracy(params, advset);
      const auto agg = aggregate({metrics});
      std::ostringstream summary;
      write_summary_header(summary);
      write_summary_row(summary, method_name(cfg.method), agg);
      summary_bytes = summary.str();
    };

    std::string ckpt1, rep1, sum1, ckpt2, rep2, sum2;
    run_once(ckpt1, rep1, sum1);
    run_once(ckpt2, rep2, sum2);
    if (ckpt1 != ckpt2) {
      detail = "checkpoint bytes differ between reruns";
      return false;
    }
    if (rep1 != rep2) {
      detail = "train report bytes differ between reruns";
      return false;
    }
    if (sum1 != sum2) {
      detail = "summary bytes differ between reruns";
      return false;
    }
    detail = "checkpoint, report, and summary bytes identical across reruns";
    return true;
  });
}

std::vector<OracleCheck> run_oracle_suite(const OracleOptions& opt) {
  std::vector<OracleCheck> checks;
  checks.push_back(check_reduction_identity(opt));
  checks.push_back(check_estimator_vs_enumeration(opt));
  checks.push_back(check_gradient_score(opt));
  checks.push_back(check_gradient_class_loss(opt));
  checks.push_back(check_gradient_penalty(opt));
  checks.push_back(check_objective_reduction(opt));
  checks.push_back(check_wr_removal(opt));
  checks.push_back(check_metric_oracles(opt));
  checks.push_back(check_determinism(opt));
  return checks;
}

bool all_passed(const std::vector<OracleCheck>& checks) {
  return std::all_of(checks.begin(), checks.end(),
                     [](const OracleCheck& c) { return c.passed; });
}

void write_oracle_report(std::ostream& out,
                         const std::vector<OracleCheck>& checks) {
  for (const auto& check : checks) {
    out << (check.passed ? "PASS" : "FAIL") << "\t" << check.name << "\t"
        << format_metric(check.seconds, 2) << "s\t" << check.detail << "\n";
  }
}

}  // namespace soc
