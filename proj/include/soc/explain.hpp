#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "soc/corpus.hpp"
#include "soc/lm.hpp"
#include "soc/model.hpp"
#include "soc/parallel.hpp"

namespace soc {

// Half-open token index range [begin, end).
struct PhraseSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - begin; }
  bool operator==(const PhraseSpan&) const = default;
};

struct SOCConfig {
  std::size_t context_size = 4;  // N: tokens resampled around the span
  std::size_t samples = 20;      // K: Monte-Carlo draws
};

struct ImportanceScore {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

// Binary hierarchy over adjacent spans; children partition the parent.
struct ExplanationNode {
  PhraseSpan span;
  ImportanceScore score;
  int left = -1;
  int right = -1;
};

struct ExplanationTree {
  std::vector<ExplanationNode> nodes;
  int root = -1;
};

// Replaces the span with <pad>; length preserved.
std::vector<std::uint32_t> mask_phrase(std::span<const std::uint32_t> tokens,
                                       PhraseSpan span);

// Occlusion: score(x) - score(x \ p). Exact, stderr 0.
ImportanceScore oc_importance(const ModelParams& params,
                              std::span<const std::uint32_t> tokens,
                              PhraseSpan span);

// ceil(N/2) positions immediately left of the span and floor(N/2)
// immediately right, clipped at the sentence boundaries.
std::vector<std::size_t> context_positions(std::size_t length, PhraseSpan span,
                                           std::size_t context_size);

// N-context-independent importance: paired Monte-Carlo average of
// score(x with sampled context) - score(same with the span masked), one
// shared context per draw. stderr is the sample standard deviation / sqrt(K).
ImportanceScore n_cii(const ModelParams& params, const NGramLM& lm,
                      std::span<const std::uint32_t> tokens, PhraseSpan span,
                      const SOCConfig& cfg, Rng& rng);

// Sampling-and-occlusion importance; the same estimator as n_cii, named
// separately because training-time regularization calls it.
ImportanceScore soc_importance(const ModelParams& params, const NGramLM& lm,
                               std::span<const std::uint32_t> tokens,
                               PhraseSpan span, const SOCConfig& cfg, Rng& rng);

// Corpus-level context-independent importance: occlusion averaged over every
// occurrence of the phrase in the test split; stderr over occurrences.
ImportanceScore corpus_cii(const ModelParams& params, const Corpus& corpus,
                           std::span<const std::uint32_t> phrase);

// Agglomerative hierarchy: repeatedly merge the adjacent span pair whose
// merged span has maximal |SOC importance|, leftmost pair on ties. Each
// span's rng stream is derived from (seed, begin, end) so scores are pure
// per span.
ExplanationTree hierarchical_explanation(const ModelParams& params,
                                         const NGramLM& lm,
                                         std::span<const std::uint32_t> tokens,
                                         const SOCConfig& cfg,
                                         std::uint64_t seed);

struct WordImportance {
  std::string surface;
  double mean = 0.0;
  std::size_t occurrences = 0;
};

// Mean SOC importance per surface over all test-split occurrences, sorted
// descending (ties lexicographic), truncated to top_k. Parallel over
// documents with per-document rng streams.
std::vector<WordImportance> mean_word_importance(
    const ModelParams& params, const NGramLM& lm, const Corpus& corpus,
    const SOCConfig& cfg, std::size_t top_k, std::uint64_t seed,
    const ExecPolicy& policy = ExecPolicy::serial());

// Line-delimited record: doc id, span, surface text, phi, stderr, K, N.
struct ExplainRecord {
  std::size_t doc = 0;
  PhraseSpan span;
  std::string text;
  double phi = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
  std::size_t context = 0;
};

void write_record_header(std::ostream& out);
void write_record(std::ostream& out, const ExplainRecord& rec);

std::string span_text(const Vocabulary& vocab,
                      std::span<const std::uint32_t> tokens, PhraseSpan span);

std::vector<ExplainRecord> tree_records(const ExplanationTree& tree,
                                        const Vocabulary& vocab,
                                        std::span<const std::uint32_t> tokens,
                                        std::size_t doc_id,
                                        const SOCConfig& cfg);

// Indented text rendering of the hierarchy, children under parents.
void render_tree(std::ostream& out, const ExplanationTree& tree,
                 const Vocabulary& vocab,
                 std::span<const std::uint32_t> tokens);

}  // namespace soc
