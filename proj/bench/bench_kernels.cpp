// Times the OpenMP kernels against their serial reference paths and checks
// the outputs coincide. Not a correctness test; run it to pick --threads.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "soc/experiment.hpp"
#include "soc/explain.hpp"
#include "soc/fixtures.hpp"
#include "soc/oracle.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct BenchSetup {
  soc::Corpus corpus;
  soc::IdentifierLexicon lexicon;
  soc::NGramLM lm;
  soc::ModelParams params;
};

BenchSetup make_setup() {
  soc::FixtureConfig fcfg;
  fcfg.train_docs = 400;
  fcfg.test_docs = 200;
  fcfg.pool_docs = 0;
  fcfg.seed = 99;
  const auto fixture = soc::make_planted_fixture(fcfg);
  BenchSetup setup;
  const auto vocab = soc::build_vocab(fixture.corpus, 1);
  setup.corpus = soc::encode(fixture.corpus, vocab);
  std::vector<std::uint32_t> ids;
  for (const auto& surface : fixture.identifiers) {
    const auto id = setup.corpus.vocab.lookup(surface);
    if (!soc::is_reserved(id)) ids.push_back(id);
  }
  setup.lexicon = soc::make_lexicon(std::move(ids));
  setup.lm = soc::fit_lm(setup.corpus, 3, 0.5);
  setup.params = soc::init_params(setup.corpus.vocab.size(), 16, 16, 42);
  return setup;
}

void report(const char* kernel, double serial_s, double parallel_s,
            bool identical) {
  std::printf("%-24s serial %8.3fs   parallel %8.3fs   speedup %5.2fx   %s\n",
              kernel, serial_s, parallel_s,
              parallel_s > 0 ? serial_s / parallel_s : 0.0,
              identical ? "outputs identical" : "OUTPUTS DIFFER");
}

}  // namespace

int main() {
  const auto setup = make_setup();
  const soc::SOCConfig cfg{4, 50};

  {
    const auto t0 = Clock::now();
    const auto serial = soc::mean_word_importance(
        setup.params, setup.lm, setup.corpus, cfg, 100, 7,
        soc::ExecPolicy::serial());
    const double serial_s = seconds_since(t0);

    const auto t1 = Clock::now();
    const auto parallel = soc::mean_word_importance(
        setup.params, setup.lm, setup.corpus, cfg, 100, 7,
        soc::ExecPolicy::all());
    const double parallel_s = seconds_since(t1);

    bool identical = serial.size() == parallel.size();
    for (std::size_t i = 0; identical && i < serial.size(); ++i) {
      identical = serial[i].surface == parallel[i].surface &&
                  serial[i].mean == parallel[i].mean;
    }
    report("mean_word_importance", serial_s, parallel_s, identical);
  }

  {
    soc::TrainConfig tcfg;
    tcfg.method = soc::Method::kSocReg;
    tcfg.alpha = 1.0;
    tcfg.epochs = 5;
    tcfg.embed_dim = 12;
    tcfg.hidden_dim = 8;
    const std::vector<std::uint64_t> seeds{1, 2, 3, 4};

    const auto t0 = Clock::now();
    const auto serial =
        soc::run_seeds(setup.corpus, setup.lexicon, &setup.lm, tcfg, seeds,
                       nullptr, 0.0, soc::ExecPolicy::serial());
    const double serial_s = seconds_since(t0);

    const auto t1 = Clock::now();
    const auto parallel =
        soc::run_seeds(setup.corpus, setup.lexicon, &setup.lm, tcfg, seeds,
                       nullptr, 0.0, soc::ExecPolicy::all());
    const double parallel_s = seconds_since(t1);

    bool identical = true;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      identical = identical && soc::params_hash(serial[i].params) ==
                                   soc::params_hash(parallel[i].params);
    }
    report("multi-seed training", serial_s, parallel_s, identical);
  }

  {
    const auto opt_serial =
        soc::OracleOptions{11, soc::ExecPolicy::serial()};
    const auto opt_parallel = soc::OracleOptions{11, soc::ExecPolicy::all()};

    const auto t0 = Clock::now();
    const auto serial = soc::check_estimator_vs_enumeration(opt_serial);
    const double serial_s = seconds_since(t0);
    const auto t1 = Clock::now();
    const auto parallel = soc::check_estimator_vs_enumeration(opt_parallel);
    const double parallel_s = seconds_since(t1);
    report("estimator-vs-enum", serial_s, parallel_s,
           serial.passed == parallel.passed &&
               serial.detail == parallel.detail);
  }
  return 0;
}
