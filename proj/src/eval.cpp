#include "soc/eval.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "soc/io_util.hpp"
#include "soc/rng.hpp"

namespace soc {

ConfusionCounts confusion(const ModelParams& params,
                          const std::vector<Document>& docs,
                          const std::vector<std::size_t>& indices,
                          double threshold) {
  ConfusionCounts counts;
  for (const auto i : indices) {
    const auto& doc = docs[i];
    const bool predicted_hate = score(params, doc.tokens) > threshold;
    const bool is_hate = doc.label == 1;
    if (predicted_hate && is_hate) counts.tp++;
    else if (predicted_hate && !is_hate) counts.fp++;
    else if (!predicted_hate && !is_hate) counts.tn++;
    else counts.fn++;
  }
  return counts;
}

ConfusionCounts confusion(const ModelParams& params,
                          const std::vector<Document>& docs,
                          double threshold) {
  std::vector<std::size_t> indices(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) indices[i] = i;
  return confusion(params, docs, indices, threshold);
}

PRF prf(const ConfusionCounts& counts) {
  PRF out;
  if (counts.tp + counts.fp == 0) {
    out.precision_defined = false;
  } else {
    out.precision = static_cast<double>(counts.tp) /
                    static_cast<double>(counts.tp + counts.fp);
  }
  if (counts.tp + counts.fn == 0) {
    out.recall_defined = false;
  } else {
    out.recall = static_cast<double>(counts.tp) /
                 static_cast<double>(counts.tp + counts.fn);
  }
  if (!out.precision_defined || !out.recall_defined ||
      out.precision + out.recall == 0.0) {
    out.f1_defined = false;
  } else {
    out.f1 = 2.0 * out.precision * out.recall / (out.precision + out.recall);
  }
  return out;
}

AdversarialSet build_adversarial_set(const Corpus& pool,
                                     const IdentifierLexicon& lexicon,
                                     std::size_t n, std::uint64_t seed) {
  if (lexicon.empty()) throw Error("adversarial set requires a lexicon");
  if (n == 0) throw Error("adversarial set size must be >= 1");

  // candidate documents per identifier, pool order
  std::map<std::uint32_t, std::vector<std::size_t>> candidates;
  for (auto id : lexicon.ids) candidates[id] = {};
  for (std::size_t i = 0; i < pool.docs.size(); ++i) {
    const auto& doc = pool.docs[i];
    if (doc.label != 0) continue;
    std::vector<std::uint32_t> seen;
    for (auto id : doc.tokens) {
      if (lexicon.contains(id) &&
          std::find(seen.begin(), seen.end(), id) == seen.end()) {
        seen.push_back(id);
      }
    }
    for (auto id : seen) candidates[id].push_back(i);
  }

  const std::size_t k = lexicon.size();
  const std::size_t min_quota = (n + k - 1) / k;
  std::vector<std::string> deficient;
  for (auto id : lexicon.ids) {
    if (candidates[id].size() < min_quota) {
      deficient.push_back(pool.vocab.surface(id));
    }
  }
  if (!deficient.empty()) {
    std::string msg = "adversarial pool deficient for identifiers:";
    for (const auto& s : deficient) msg += " " + s;
    throw Error(msg);
  }

  // exclusive assignment: a document with several identifiers goes to the
  // one with the fewest candidates overall (ties to the smaller id)
  std::map<std::uint32_t, std::vector<std::size_t>> assigned;
  for (auto id : lexicon.ids) assigned[id] = {};
  {
    std::map<std::size_t, std::vector<std::uint32_t>> doc_ids;
    for (auto id : lexicon.ids) {
      for (auto doc : candidates[id]) doc_ids[doc].push_back(id);
    }
    for (auto& [doc, ids] : doc_ids) {
      std::uint32_t best = ids[0];
      for (auto id : ids) {
        if (candidates[id].size() < candidates[best].size() ||
            (candidates[id].size() == candidates[best].size() && id < best)) {
          best = id;
        }
      }
      assigned[best].push_back(doc);
    }
  }

  // quotas: floor(n/k) each, first (n mod k) identifiers in surface order
  // get one extra
  std::vector<std::uint32_t> order(lexicon.ids);
  std::sort(order.begin(), order.end(),
            [&](std::uint32_t a, std::uint32_t b) {
              return pool.vocab.surface(a) < pool.vocab.surface(b);
            });
  const std::size_t base = n / k;
  const std::size_t extra = n % k;

  AdversarialSet set;
  std::vector<std::string> short_ids;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const auto id = order[rank];
    const std::size_t quota = base + (rank < extra ? 1 : 0);
    auto& docs = assigned[id];
    if (docs.size() < quota) {
      short_ids.push_back(pool.vocab.surface(id));
      continue;
    }
    Rng rng = make_rng(derive_seed(seed, 0xadu, id));
    shuffle(docs, rng);
    for (std::size_t i = 0; i < quota; ++i) {
      Document doc = pool.docs[docs[i]];
      doc.split = Split::kAdversarial;
      set.docs.push_back(std::move(doc));
    }
    set.per_identifier[id] = quota;
  }
  if (!short_ids.empty()) {
    std::string msg =
        "adversarial pool deficient after exclusive assignment for:";
    for (const auto& s : short_ids) msg += " " + s;
    throw Error(msg);
  }
  return set;
}

double adversarial_accuracy(const ModelParams& params,
                            const AdversarialSet& set, double threshold) {
  if (set.docs.empty()) throw Error("adversarial set is empty");
  std::size_t correct = 0;
  for (const auto& doc : set.docs) {
    if (!(score(params, doc.tokens) > threshold)) correct++;
  }
  return static_cast<double>(correct) / static_cast<double>(set.docs.size());
}

namespace {

AggregateMetric aggregate_values(const std::vector<double>& values) {
  AggregateMetric out;
  if (values.empty()) return out;
  double sum = 0.0;
  for (const double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() >= 2) {
    double ss = 0.0;
    for (const double v : values) {
      const double d = v - out.mean;
      ss += d * d;
    }
    out.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
    out.stddev_defined = true;
  }
  return out;
}

std::string render_metric(const AggregateMetric& m) {
  std::string s = format_metric(m.mean);
  s += "±";
  s += m.stddev_defined ? format_metric(m.stddev) : std::string("--");
  return s;
}

}  // namespace

MetricsReport aggregate(std::vector<SeedMetrics> per_seed) {
  if (per_seed.empty()) throw Error("aggregate requires at least one seed");
  MetricsReport report;
  std::vector<double> p, r, f, a;
  for (const auto& m : per_seed) {
    p.push_back(m.prf.precision);
    r.push_back(m.prf.recall);
    f.push_back(m.prf.f1);
    a.push_back(m.adversarial);
  }
  report.precision = aggregate_values(p);
  report.recall = aggregate_values(r);
  report.f1 = aggregate_values(f);
  report.adversarial = aggregate_values(a);
  report.per_seed = std::move(per_seed);
  return report;
}

void write_summary_header(std::ostream& out) {
  out << "method\tprecision\trecall\tf1\tadversarial_accuracy\n";
}

void write_summary_row(std::ostream& out, const std::string& method,
                       const MetricsReport& report) {
  out << method << "\t" << render_metric(report.precision) << "\t"
      << render_metric(report.recall) << "\t" << render_metric(report.f1)
      << "\t" << render_metric(report.adversarial) << "\n";
}

}  // namespace soc
