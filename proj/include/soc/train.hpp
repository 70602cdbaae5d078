#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "soc/corpus.hpp"
#include "soc/explain.hpp"
#include "soc/lm.hpp"
#include "soc/model.hpp"

namespace soc {

enum class Method { kPlain, kWr, kOcReg, kSocReg };

const char* method_name(Method m);
std::optional<Method> parse_method(std::string_view name);
inline bool is_regularized(Method m) {
  return m == Method::kOcReg || m == Method::kSocReg;
}

struct TrainConfig {
  Method method = Method::kPlain;
  double alpha = 0.0;  // regularization strength, oc-reg/soc-reg only
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t epochs = 20;
  std::size_t batch_size = 32;
  std::size_t embed_dim = 16;
  std::size_t hidden_dim = 16;
  SOCConfig soc;  // training-time sampling; default N=4, K=20
  // false: contexts drawn once per example and reused every epoch;
  // true: redrawn each optimization step (frozen within the step either way)
  bool resample_contexts = false;
  std::uint64_t seed = 1;
};

struct EpochStats {
  std::size_t epoch = 0;
  double class_loss = 0.0;    // mean over train examples
  double penalty = 0.0;       // mean unscaled penalty over train examples
  double val_f1 = 0.0;        // 0 when no val split; see val_f1_defined
  bool val_f1_defined = false;
  std::uint64_t param_hash = 0;  // end-of-epoch parameter checksum
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  std::string checkpoint_path;  // filled by callers that persist the model
};

// Softmax cross-entropy; upstream gradient = softmax(logits) - onehot(label).
std::pair<double, std::array<double, 2>> class_loss(
    const std::array<double, 2>& logits, int label);

// Penalty core with pre-drawn (frozen) context samples, one vector of draws
// per in-lexicon occurrence. penalty = sum over occurrences of phi^2 where
// phi is the mean paired score difference over that occurrence's samples;
// gradient is exact for the frozen samples.
struct PenaltyResult {
  double penalty = 0.0;
  GradientSet grad;
};

std::vector<std::size_t> lexicon_positions(std::span<const std::uint32_t> tokens,
                                           const IdentifierLexicon& lexicon);

PenaltyResult reg_penalty_with_samples(
    const ModelParams& params, std::span<const std::uint32_t> tokens,
    const std::vector<std::size_t>& occurrence_positions,
    const std::vector<std::vector<ContextSample>>& samples_per_occurrence);

// Draws K context samples per occurrence (oc-reg uses a single empty
// context, making the estimator exact occlusion) and evaluates the core.
PenaltyResult reg_penalty(const ModelParams& params, const NGramLM* lm,
                          std::span<const std::uint32_t> tokens,
                          const IdentifierLexicon& lexicon, Method method,
                          const SOCConfig& cfg, Rng& rng);

// Single-threaded deterministic minibatch Adam on the Eq.-style combined
// objective. wr removes lexicon words from train documents up front and
// trains with alpha = 0; alpha = 0 runs skip the penalty path entirely, so
// plain / oc-reg / soc-reg trajectories coincide bitwise.
std::pair<ModelParams, TrainReport> train(const Corpus& corpus,
                                          const IdentifierLexicon& lexicon,
                                          const NGramLM* lm,
                                          const TrainConfig& cfg);

void write_train_report(std::ostream& out, const TrainReport& report);

}  // namespace soc
