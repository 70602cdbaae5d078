#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "soc/eval.hpp"
#include "soc/parallel.hpp"
#include "soc/train.hpp"

namespace soc {

struct SeedRun {
  std::uint64_t seed = 0;
  ModelParams params;
  TrainReport report;
  SeedMetrics metrics;
};

// Trains one model per seed and scores it on the test split and, when an
// adversarial set is given, on that set. Each seed is an independent
// single-threaded job; the grid runs under the policy.
std::vector<SeedRun> run_seeds(const Corpus& corpus,
                               const IdentifierLexicon& lexicon,
                               const NGramLM* lm, const TrainConfig& base,
                               const std::vector<std::uint64_t>& seeds,
                               const AdversarialSet* adversarial,
                               double threshold,
                               const ExecPolicy& policy = ExecPolicy::serial());

struct AblationRecord {
  std::size_t subset_size = 0;
  std::size_t repeat = 0;
  std::vector<std::uint32_t> subset;  // removed identifier ids, sorted
  PRF prf;
  double adversarial = 0.0;
  std::uint64_t param_hash = 0;
};

// One plain-config training run per (subset size, repeat) with the sampled
// identifier subset removed from the train split. Size 0 reproduces the
// plain baseline; size |lexicon| reproduces wr.
std::vector<AblationRecord> identifier_ablation(
    const Corpus& corpus, const IdentifierLexicon& lexicon, const NGramLM* lm,
    const TrainConfig& cfg, const AdversarialSet& adversarial,
    const std::vector<std::size_t>& sizes, std::size_t repeats,
    std::uint64_t subset_seed, double threshold,
    const ExecPolicy& policy = ExecPolicy::serial());

void write_ablation_header(std::ostream& out);
void write_ablation_record(std::ostream& out, const AblationRecord& rec,
                           const Vocabulary& vocab);

}  // namespace soc
