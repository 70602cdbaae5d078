#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "soc/corpus.hpp"
#include "soc/rng.hpp"

namespace soc {

// Assignment of sampled token ids to the masked context positions, sorted by
// position. All ids are non-reserved vocabulary ids.
struct ContextSample {
  std::vector<std::pair<std::size_t, std::uint32_t>> fills;

  bool empty() const { return fills.empty(); }
  std::size_t size() const { return fills.size(); }
  void apply(std::vector<std::uint32_t>& tokens) const {
    for (const auto& [pos, id] : fills) tokens[pos] = id;
  }
};

// Interpolated absolute-discount n-gram model over the non-reserved
// vocabulary. Histories are padded with a begin sentinel; an end sentinel is
// counted as an outcome internally and renormalized away at query time, so
// every conditional sums to 1 over the sampleable tokens and is strictly
// positive.
struct NGramLM {
  int order = 1;
  double delta = 0.5;
  std::uint32_t vocab_size = 0;

  struct HistoryStats {
    std::uint64_t total = 0;
    std::uint32_t distinct = 0;
  };
  // one table per history length 0..order-1; keys pack history + outcome
  // into base-(vocab_size + 2) digits
  std::vector<std::unordered_map<std::uint64_t, std::uint64_t>> counts;
  std::vector<std::unordered_map<std::uint64_t, HistoryStats>> history_stats;

  std::uint32_t eos_symbol() const { return vocab_size; }
  std::uint32_t bos_symbol() const { return vocab_size + 1; }
  std::uint64_t pack_base() const { return vocab_size + 2; }
  std::uint32_t sampleable_count() const { return vocab_size - kNumReserved; }
};

// Counts n-grams from the train split. Requires order >= 1, delta in (0,1),
// and a packable key space ((vocab+2)^order <= 2^62).
NGramLM fit_lm(const Corpus& corpus, int order, double delta);

// P(token | history) for a non-reserved token; history holds the raw
// preceding ids (most recent last), BOS-padded when shorter than order-1.
double cond_prob(const NGramLM& lm, std::uint32_t token,
                 std::span<const std::uint32_t> history);

// Caches per-history CDFs over the sampleable vocabulary. Exact: reuses the
// same conditionals cond_prob reports. One cache per worker.
class ContextSampler {
 public:
  ContextSampler(const NGramLM& lm, std::span<const std::uint32_t> tokens,
                 std::vector<std::size_t> positions);

  ContextSample draw(Rng& rng);
  // probability of one full assignment under the left-to-right conditionals
  double assignment_prob(std::span<const std::uint32_t> values);

 private:
  const std::vector<double>& cdf_for_history(std::uint64_t key);
  std::uint64_t history_key(const std::vector<std::uint32_t>& work,
                            std::size_t pos) const;

  const NGramLM& lm_;
  std::vector<std::uint32_t> base_tokens_;
  std::vector<std::size_t> positions_;
  std::unordered_map<std::uint64_t, std::vector<double>> cdf_cache_;
};

ContextSample sample_context(const NGramLM& lm,
                             std::span<const std::uint32_t> tokens,
                             std::vector<std::size_t> positions, Rng& rng);

// Exact distribution over every assignment of non-reserved tokens to the
// positions; probabilities are products of the sampler's conditionals and
// sum to 1. Errors when |sampleable|^N exceeds 10^6.
std::vector<std::pair<ContextSample, double>> enumerate_context_distribution(
    const NGramLM& lm, std::span<const std::uint32_t> tokens,
    std::vector<std::size_t> positions);

// "soclm v1" text dump; round-trip exact.
void save_lm(const NGramLM& lm, const std::string& path);
NGramLM load_lm(const std::string& path);

}  // namespace soc
