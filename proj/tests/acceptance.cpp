// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. An optional argv[1] runs a single criterion by number.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "soc/eval.hpp"
#include "soc/experiment.hpp"
#include "soc/explain.hpp"
#include "soc/fixtures.hpp"
#include "soc/oracle.hpp"
#include "soc/train.hpp"

namespace {

using Clock = std::chrono::steady_clock;

constexpr std::uint64_t kSuiteSeed = 2026;

struct CriterionResult {
  int number;
  bool passed;
  double seconds;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

template <typename Fn>
CriterionResult run_criterion(int number, Fn&& body) {
  CriterionResult result{number, false, 0.0, ""};
  const auto start = Clock::now();
  try {
    result.passed = body(result.detail);
  } catch (const std::exception& e) {
    result.passed = false;
    result.detail = std::string("exception: ") + e.what();
  }
  result.seconds = seconds_since(start);
  return result;
}

bool check_runtime(double seconds, double budget, std::string& detail) {
  if (seconds > budget) {
    detail += " [runtime " + std::to_string(seconds) + "s over budget " +
              std::to_string(budget) + "s]";
    return false;
  }
  return true;
}

// one oracle check lifted into a criterion, with a runtime budget
CriterionResult from_oracle(int number, const soc::OracleCheck& check,
                            double budget) {
  CriterionResult result{number, check.passed, check.seconds, check.detail};
  if (result.passed && budget > 0.0) {
    result.passed = check_runtime(check.seconds, budget, result.detail);
  }
  return result;
}

// ---------------------------------------------------------------------------
// shared planted-bias experiment setup (criteria 5, 6, 7)

struct ExperimentSetup {
  soc::Corpus corpus;
  soc::IdentifierLexicon lexicon;
  soc::NGramLM lm;
  soc::AdversarialSet advset;
};

ExperimentSetup make_experiment_setup() {
  soc::FixtureConfig fcfg;
  fcfg.train_docs = 700;
  fcfg.test_docs = 300;
  fcfg.pool_docs = 400;
  fcfg.identifiers = 8;
  fcfg.seed = 20260810;
  const auto fixture = soc::make_planted_fixture(fcfg);

  ExperimentSetup setup;
  const auto vocab = soc::build_vocab(fixture.corpus, 1);
  setup.corpus = soc::encode(fixture.corpus, vocab);
  std::vector<std::uint32_t> ids;
  for (const auto& surface : fixture.identifiers) {
    const auto id = setup.corpus.vocab.lookup(surface);
    if (!soc::is_reserved(id)) ids.push_back(id);
  }
  setup.lexicon = soc::make_lexicon(std::move(ids));
  setup.lm = soc::fit_lm(setup.corpus, 3, 0.5);

  const auto pool = soc::encode(fixture.adversarial_pool, setup.corpus.vocab);
  setup.advset = soc::build_adversarial_set(pool, setup.lexicon, 200, 17);
  return setup;
}

soc::TrainConfig experiment_config(soc::Method method, double alpha) {
  soc::TrainConfig cfg;
  cfg.method = method;
  cfg.alpha = alpha;
  cfg.lr = 5e-3;
  cfg.epochs = 20;
  cfg.batch_size = 32;
  cfg.embed_dim = 12;
  cfg.hidden_dim = 8;
  cfg.soc = soc::SOCConfig{4, 20};
  return cfg;
}

const std::vector<std::uint64_t> kExperimentSeeds = {1, 2, 3, 4, 5,
                                                     6, 7, 8, 9, 10};

// mean |phi| over every test-split occurrence of a lexicon word
double mean_abs_lexicon_importance(const ExperimentSetup& setup,
                                   const soc::ModelParams& params,
                                   std::uint64_t seed) {
  const soc::SOCConfig cfg{4, 50};
  double total = 0.0;
  std::size_t count = 0;
  for (const auto doc_index : setup.corpus.doc_indices(soc::Split::kTest)) {
    const auto& doc = setup.corpus.docs[doc_index];
    soc::Rng rng = soc::make_rng(soc::derive_seed(seed, 0xab5, doc_index));
    for (std::size_t t = 0; t < doc.tokens.size(); ++t) {
      if (!setup.lexicon.contains(doc.tokens[t])) continue;
      const auto phi = soc::soc_importance(params, setup.lm, doc.tokens,
                                           {t, t + 1}, cfg, rng);
      total += std::abs(phi.value);
      count++;
    }
  }
  return count == 0 ? 0.0 : total / static_cast<double>(count);
}

CriterionResult criterion5() {
  return run_criterion(5, [&](std::string& detail) {
    const auto setup = make_experiment_setup();
    const auto plain_runs = soc::run_seeds(
        setup.corpus, setup.lexicon, &setup.lm,
        experiment_config(soc::Method::kPlain, 0.0), kExperimentSeeds,
        &setup.advset, 0.0);
    const auto soc_runs = soc::run_seeds(
        setup.corpus, setup.lexicon, &setup.lm,
        experiment_config(soc::Method::kSocReg, 1.0), kExperimentSeeds,
        &setup.advset, 0.0);

    int adv_wins = 0;
    double plain_phi = 0.0, soc_phi = 0.0;
    double plain_f1 = 0.0, soc_f1 = 0.0;
    double plain_adv = 0.0, soc_adv = 0.0;
    for (std::size_t i = 0; i < kExperimentSeeds.size(); ++i) {
      if (soc_runs[i].metrics.adversarial > plain_runs[i].metrics.adversarial) {
        adv_wins++;
      }
      plain_adv += plain_runs[i].metrics.adversarial;
      soc_adv += soc_runs[i].metrics.adversarial;
      plain_phi +=
          mean_abs_lexicon_importance(setup, plain_runs[i].params, kSuiteSeed);
      soc_phi +=
          mean_abs_lexicon_importance(setup, soc_runs[i].params, kSuiteSeed);
      plain_f1 += plain_runs[i].metrics.prf.f1;
      soc_f1 += soc_runs[i].metrics.prf.f1;
    }
    const double n = static_cast<double>(kExperimentSeeds.size());
    plain_phi /= n;
    soc_phi /= n;
    plain_f1 /= n;
    soc_f1 /= n;
    plain_adv /= n;
    soc_adv /= n;

    std::ostringstream os;
    os << "adv wins " << adv_wins << "/10 (mean " << plain_adv << " -> "
       << soc_adv << "), mean|phi| " << plain_phi << " -> " << soc_phi
       << ", F1 " << plain_f1 << " -> " << soc_f1;
    detail = os.str();

    const bool wins_ok = adv_wins >= 8;
    const bool phi_ok = soc_phi <= 0.5 * plain_phi;
    const bool f1_ok = soc_f1 >= plain_f1 - 0.05;
    return wins_ok && phi_ok && f1_ok;
  });
}

CriterionResult criterion6() {
  return run_criterion(6, [&](std::string& detail) {
    const auto setup = make_experiment_setup();
    std::size_t scanned = 0;
    for (const auto i : setup.corpus.doc_indices(soc::Split::kTrain)) {
      const auto cleaned =
          soc::remove_identifiers(setup.corpus.docs[i], setup.lexicon);
      for (const auto id : cleaned.tokens) {
        if (setup.lexicon.contains(id)) {
          detail = "lexicon token survived wr preprocessing";
          return false;
        }
      }
      scanned += cleaned.tokens.size();
    }
    detail =
        "exhaustive scan of " + std::to_string(scanned) + " training tokens";
    return true;
  });
}

CriterionResult criterion7() {
  return run_criterion(7, [&](std::string& detail) {
    const auto setup = make_experiment_setup();
    const auto cfg = experiment_config(soc::Method::kPlain, 0.0);
    const std::vector<std::size_t> sizes{0, setup.lexicon.size()};
    const auto test_idx = setup.corpus.doc_indices(soc::Split::kTest);

    double adv0 = 0.0, advk = 0.0, rec0 = 0.0, reck = 0.0;
    for (const auto seed : kExperimentSeeds) {
      soc::TrainConfig seed_cfg = cfg;
      seed_cfg.seed = seed;
      soc::TrainConfig wr_cfg = seed_cfg;
      wr_cfg.method = soc::Method::kWr;

      const auto plain_run =
          soc::train(setup.corpus, setup.lexicon, nullptr, seed_cfg);
      const auto wr_run =
          soc::train(setup.corpus, setup.lexicon, nullptr, wr_cfg);

      const auto records = soc::identifier_ablation(
          setup.corpus, setup.lexicon, nullptr, seed_cfg, setup.advset, sizes,
          1, kSuiteSeed, 0.0);
      if (records.size() != 2) {
        detail = "expected 2 ablation records";
        return false;
      }
      const auto& rec_plain = records[0];
      const auto& rec_wr = records[1];
      if (rec_plain.param_hash != soc::params_hash(plain_run.first)) {
        detail = "size-0 ablation record differs from the plain baseline";
        return false;
      }
      if (rec_wr.param_hash != soc::params_hash(wr_run.first)) {
        detail = "size-k ablation record differs from the wr baseline";
        return false;
      }
      const auto plain_prf = soc::prf(
          soc::confusion(plain_run.first, setup.corpus.docs, test_idx, 0.0));
      const auto plain_adv =
          soc::adversarial_accuracy(plain_run.first, setup.advset, 0.0);
      if (plain_prf.f1 != rec_plain.prf.f1 ||
          plain_prf.recall != rec_plain.prf.recall ||
          plain_prf.precision != rec_plain.prf.precision ||
          plain_adv != rec_plain.adversarial) {
        detail = "size-0 ablation metrics differ from the plain baseline";
        return false;
      }
      adv0 += rec_plain.adversarial;
      advk += rec_wr.adversarial;
      rec0 += rec_plain.prf.recall;
      reck += rec_wr.prf.recall;
    }
    const double n = static_cast<double>(kExperimentSeeds.size());
    adv0 /= n;
    advk /= n;
    rec0 /= n;
    reck /= n;

    std::ostringstream os;
    os << "endpoints bitwise ok; adversarial " << adv0 << " -> " << advk
       << ", recall " << rec0 << " -> " << reck;
    detail = os.str();
    return advk >= adv0 && reck <= rec0;
  });
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  if (argc > 1) only = std::atoi(argv[1]);

  const soc::OracleOptions opt{kSuiteSeed, soc::ExecPolicy::serial()};
  std::vector<CriterionResult> results;
  double oracle_seconds = 0.0;
  double directional_seconds = 0.0;

  auto want = [only](int n) { return only == 0 || only == n; };

  if (want(1)) {
    results.push_back(from_oracle(1, soc::check_reduction_identity(opt), 10.0));
    oracle_seconds += results.back().seconds;
  }
  if (want(2)) {
    results.push_back(
        from_oracle(2, soc::check_estimator_vs_enumeration(opt), 180.0));
    oracle_seconds += results.back().seconds;
  }
  if (want(3)) {
    results.push_back(run_criterion(3, [&](std::string& detail) {
      const auto score = soc::check_gradient_score(opt);
      const auto loss = soc::check_gradient_class_loss(opt);
      const auto penalty = soc::check_gradient_penalty(opt);
      detail = score.detail + "; " + loss.detail + "; " + penalty.detail;
      const double total = score.seconds + loss.seconds + penalty.seconds;
      bool ok = score.passed && loss.passed && penalty.passed;
      if (ok) ok = check_runtime(total, 60.0, detail);
      return ok;
    }));
    oracle_seconds += results.back().seconds;
  }
  if (want(4)) {
    results.push_back(from_oracle(4, soc::check_objective_reduction(opt), 0.0));
    oracle_seconds += results.back().seconds;
  }
  if (want(5)) {
    auto result = criterion5();
    if (result.passed) {
      result.passed = check_runtime(result.seconds, 600.0, result.detail);
    }
    directional_seconds += result.seconds;
    results.push_back(std::move(result));
  }
  if (want(6)) {
    results.push_back(criterion6());
    oracle_seconds += results.back().seconds;
  }
  if (want(7)) {
    results.push_back(criterion7());
    directional_seconds += results.back().seconds;
  }
  if (want(8)) {
    results.push_back(from_oracle(8, soc::check_metric_oracles(opt), 0.0));
    oracle_seconds += results.back().seconds;
  }
  if (want(9)) {
    results.push_back(from_oracle(9, soc::check_determinism(opt), 0.0));
    oracle_seconds += results.back().seconds;
  }
  if (only == 0) {
    results.push_back(run_criterion(10, [&](std::string& detail) {
      std::ostringstream os;
      os << "oracle checks " << oracle_seconds << "s (budget 600s), "
         << "directional " << directional_seconds << "s (budget 1800s)";
      detail = os.str();
      return oracle_seconds < 600.0 && directional_seconds < 1800.0;
    }));
  }

  bool all_ok = true;
  for (const auto& r : results) {
    std::printf("%s criterion-%d (%.1fs) %s\n", r.passed ? "PASS" : "FAIL",
                r.number, r.seconds, r.detail.c_str());
    all_ok = all_ok && r.passed;
  }
  return all_ok ? 0 : 1;
}
