#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "soc/corpus.hpp"
#include "soc/model.hpp"

namespace soc {

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
};

// prediction = hate iff score > threshold (strict)
ConfusionCounts confusion(const ModelParams& params,
                          const std::vector<Document>& docs,
                          const std::vector<std::size_t>& indices,
                          double threshold = 0.0);
ConfusionCounts confusion(const ModelParams& params,
                          const std::vector<Document>& docs,
                          double threshold = 0.0);

// Zero-denominator ratios yield 0 with the defined flag cleared.
struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool precision_defined = true;
  bool recall_defined = true;
  bool f1_defined = true;
};

PRF prf(const ConfusionCounts& counts);

// All-nonhate documents, each containing at least one lexicon word,
// balanced across identifiers (per-identifier counts differ by <= 1).
struct AdversarialSet {
  std::vector<Document> docs;
  std::map<std::uint32_t, std::size_t> per_identifier;
};

// Quota-balanced seeded sample from the pool. A document counts for exactly
// one identifier; documents containing several go to the scarcest one.
// Errors list every identifier whose pool is too small.
AdversarialSet build_adversarial_set(const Corpus& pool,
                                     const IdentifierLexicon& lexicon,
                                     std::size_t n, std::uint64_t seed);

// Fraction predicted nonhate; equals 1 - false-positive rate because every
// gold label is nonhate.
double adversarial_accuracy(const ModelParams& params,
                            const AdversarialSet& set,
                            double threshold = 0.0);

struct SeedMetrics {
  std::uint64_t seed = 0;
  PRF prf;
  double adversarial = 0.0;
};

struct AggregateMetric {
  double mean = 0.0;
  double stddev = 0.0;
  bool stddev_defined = false;
};

struct MetricsReport {
  std::vector<SeedMetrics> per_seed;
  AggregateMetric precision;
  AggregateMetric recall;
  AggregateMetric f1;
  AggregateMetric adversarial;
};

// Mean and sample (n-1) standard deviation per metric.
MetricsReport aggregate(std::vector<SeedMetrics> per_seed);

// Tab-separated Table-4-style row: method, precision+-std, recall+-std,
// f1+-std, adversarial accuracy+-std.
void write_summary_header(std::ostream& out);
void write_summary_row(std::ostream& out, const std::string& method,
                       const MetricsReport& report);

}  // namespace soc
