#include "soc/experiment.hpp"

#include <algorithm>
#include <ostream>

#include "soc/io_util.hpp"
#include "soc/rng.hpp"

namespace soc {

std::vector<SeedRun> run_seeds(const Corpus& corpus,
                               const IdentifierLexicon& lexicon,
                               const NGramLM* lm, const TrainConfig& base,
                               const std::vector<std::uint64_t>& seeds,
                               const AdversarialSet* adversarial,
                               double threshold, const ExecPolicy& policy) {
  if (seeds.empty()) throw Error("at least one seed is required");
  const auto test_idx = corpus.doc_indices(Split::kTest);
  std::vector<SeedRun> runs(seeds.size());
  for_each_index(seeds.size(), policy, [&](std::size_t i) {
    TrainConfig cfg = base;
    cfg.seed = seeds[i];
    auto [params, report] = train(corpus, lexicon, lm, cfg);
    SeedRun& run = runs[i];
    run.seed = seeds[i];
    run.metrics.seed = seeds[i];
    run.metrics.prf = prf(confusion(params, corpus.docs, test_idx, threshold));
    if (adversarial != nullptr) {
      run.metrics.adversarial =
          adversarial_accuracy(params, *adversarial, threshold);
    }
    run.report = std::move(report);
    run.params = std::move(params);
  });
  return runs;
}

std::vector<AblationRecord> identifier_ablation(
    const Corpus& corpus, const IdentifierLexicon& lexicon, const NGramLM* lm,
    const TrainConfig& cfg, const AdversarialSet& adversarial,
    const std::vector<std::size_t>& sizes, std::size_t repeats,
    std::uint64_t subset_seed, double threshold, const ExecPolicy& policy) {
  if (cfg.method != Method::kPlain) {
    throw Error("identifier_ablation requires a plain method config");
  }
  if (repeats == 0) throw Error("repeats must be >= 1");
  for (const auto size : sizes) {
    if (size > lexicon.size()) {
      throw Error("ablation subset size exceeds the lexicon");
    }
  }

  struct Job {
    std::size_t size;
    std::size_t repeat;
  };
  std::vector<Job> jobs;
  for (const auto size : sizes) {
    for (std::size_t r = 0; r < repeats; ++r) jobs.push_back({size, r});
  }

  const auto test_idx = corpus.doc_indices(Split::kTest);
  std::vector<AblationRecord> records(jobs.size());
  for_each_index(jobs.size(), policy, [&](std::size_t j) {
    const auto [size, repeat] = jobs[j];
    // seeded subset draw: partial Fisher-Yates over the lexicon ids
    std::vector<std::uint32_t> ids(lexicon.ids);
    Rng rng = make_rng(derive_seed(subset_seed, size, repeat));
    for (std::size_t i = 0; i < size; ++i) {
      const auto pick =
          i + static_cast<std::size_t>(uniform_below(rng, ids.size() - i));
      std::swap(ids[i], ids[pick]);
    }
    ids.resize(size);
    const auto subset = make_lexicon(std::move(ids));

    TrainConfig job_cfg = cfg;
    job_cfg.method = subset.empty() ? Method::kPlain : Method::kWr;
    auto [params, report] = train(corpus, subset, lm, job_cfg);

    AblationRecord& rec = records[j];
    rec.subset_size = size;
    rec.repeat = repeat;
    rec.subset = subset.ids;
    rec.prf = prf(confusion(params, corpus.docs, test_idx, threshold));
    rec.adversarial = adversarial_accuracy(params, adversarial, threshold);
    rec.param_hash = params_hash(params);
  });
  return records;
}

void write_ablation_header(std::ostream& out) {
  out << "size\trepeat\tremoved\tprecision\trecall\tf1\tadversarial_accuracy\n";
}

void write_ablation_record(std::ostream& out, const AblationRecord& rec,
                           const Vocabulary& vocab) {
  out << rec.subset_size << "\t" << rec.repeat << "\t";
  if (rec.subset.empty()) {
    out << "-";
  } else {
    for (std::size_t i = 0; i < rec.subset.size(); ++i) {
      if (i) out << ',';
      out << vocab.surface(rec.subset[i]);
    }
  }
  out << "\t" << format_metric(rec.prf.precision) << "\t"
      << format_metric(rec.prf.recall) << "\t" << format_metric(rec.prf.f1)
      << "\t" << format_metric(rec.adversarial) << "\n";
}

}  // namespace soc
