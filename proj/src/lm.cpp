#include "soc/lm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "soc/io_util.hpp"

namespace soc {

namespace {

constexpr std::uint64_t kMaxPackedKey = 1ull << 62;
constexpr std::size_t kEnumerationBound = 1000000;

std::uint64_t pack_symbols(std::span<const std::uint32_t> symbols,
                           std::uint64_t base) {
  std::uint64_t key = 0;
  for (auto s : symbols) key = key * base + s;
  return key;
}

// Smoothed probability of `outcome` at history length `level`; recursion
// interpolates down to the uniform floor over sampleable tokens plus EOS.
double raw_prob(const NGramLM& lm, int level,
                std::span<const std::uint32_t> history,
                std::uint32_t outcome) {
  if (level < 0) {
    return 1.0 / static_cast<double>(lm.sampleable_count() + 1);
  }
  const auto suffix = history.subspan(history.size() - level, level);
  const auto hist_key = pack_symbols(suffix, lm.pack_base());
  const auto stats_it = lm.history_stats[level].find(hist_key);
  if (stats_it == lm.history_stats[level].end() ||
      stats_it->second.total == 0) {
    return raw_prob(lm, level - 1, history, outcome);
  }
  const auto& stats = stats_it->second;
  const auto count_it =
      lm.counts[level].find(hist_key * lm.pack_base() + outcome);
  const double count =
      count_it == lm.counts[level].end()
          ? 0.0
          : static_cast<double>(count_it->second);
  const double discounted = std::max(count - lm.delta, 0.0);
  const double backoff = raw_prob(lm, level - 1, history, outcome);
  return (discounted +
          lm.delta * static_cast<double>(stats.distinct) * backoff) /
         static_cast<double>(stats.total);
}

// history padded with BOS to exactly order-1 symbols, most recent last
std::vector<std::uint32_t> padded_history(const NGramLM& lm,
                                          std::span<const std::uint32_t> raw) {
  const auto want = static_cast<std::size_t>(lm.order - 1);
  std::vector<std::uint32_t> out(want, lm.bos_symbol());
  const std::size_t take = std::min(want, raw.size());
  for (std::size_t i = 0; i < take; ++i) {
    out[want - take + i] = raw[raw.size() - take + i];
  }
  return out;
}

double renormalized(const NGramLM& lm, std::span<const std::uint32_t> history,
                    std::uint32_t token) {
  const double p = raw_prob(lm, lm.order - 1, history, token);
  const double p_eos = raw_prob(lm, lm.order - 1, history, lm.eos_symbol());
  return p / (1.0 - p_eos);
}

}  // namespace

NGramLM fit_lm(const Corpus& corpus, int order, double delta) {
  if (order < 1) throw Error("lm order must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw Error("lm delta must lie in (0,1)");
  if (corpus.split_size(Split::kTrain) == 0) {
    throw Error("fit_lm requires a non-empty train split");
  }
  if (corpus.vocab.size() <= kNumReserved) {
    throw Error("fit_lm requires a vocabulary with sampleable tokens");
  }

  NGramLM lm;
  lm.order = order;
  lm.delta = delta;
  lm.vocab_size = static_cast<std::uint32_t>(corpus.vocab.size());
  lm.counts.resize(order);
  lm.history_stats.resize(order);

  std::uint64_t key_space = 1;
  for (int i = 0; i < order; ++i) {
    if (key_space > kMaxPackedKey / lm.pack_base()) {
      throw Error("vocabulary too large for this lm order");
    }
    key_space *= lm.pack_base();
  }

  const auto base = lm.pack_base();
  std::vector<std::uint32_t> history;
  for (const auto& doc : corpus.docs) {
    if (doc.split != Split::kTrain) continue;
    const auto& seq = doc.tokens;
    for (std::size_t t = 0; t <= seq.size(); ++t) {
      const std::uint32_t outcome =
          t < seq.size() ? seq[t] : lm.eos_symbol();
      if (outcome != lm.eos_symbol() && is_reserved(outcome)) continue;
      for (int level = 0; level < order; ++level) {
        history.assign(static_cast<std::size_t>(level), lm.bos_symbol());
        for (int j = level; j >= 1; --j) {
          const auto src = static_cast<long long>(t) - j;
          if (src >= 0) {
            history[static_cast<std::size_t>(level - j)] =
                seq[static_cast<std::size_t>(src)];
          }
        }
        const auto hist_key = pack_symbols(history, base);
        auto& count = lm.counts[level][hist_key * base + outcome];
        auto& stats = lm.history_stats[level][hist_key];
        if (count == 0) stats.distinct++;
        count++;
        stats.total++;
      }
    }
  }
  return lm;
}

double cond_prob(const NGramLM& lm, std::uint32_t token,
                 std::span<const std::uint32_t> history) {
  if (token >= lm.vocab_size || is_reserved(token)) {
    throw Error("cond_prob requires a non-reserved vocabulary token");
  }
  const auto padded = padded_history(lm, history);
  return renormalized(lm, padded, token);
}

ContextSampler::ContextSampler(const NGramLM& lm,
                               std::span<const std::uint32_t> tokens,
                               std::vector<std::size_t> positions)
    : lm_(lm),
      base_tokens_(tokens.begin(), tokens.end()),
      positions_(std::move(positions)) {
  std::sort(positions_.begin(), positions_.end());
  for (std::size_t i = 0; i < positions_.size(); ++i) {
    if (positions_[i] >= base_tokens_.size()) {
      throw Error("context position out of range");
    }
    if (i > 0 && positions_[i] == positions_[i - 1]) {
      throw Error("duplicate context position");
    }
  }
}

std::uint64_t ContextSampler::history_key(
    const std::vector<std::uint32_t>& work, std::size_t pos) const {
  const auto want = static_cast<std::size_t>(lm_.order - 1);
  std::uint64_t key = 0;
  for (std::size_t i = 0; i < want; ++i) {
    const std::size_t back = want - i;
    const std::uint32_t sym =
        pos >= back ? work[pos - back] : lm_.bos_symbol();
    key = key * lm_.pack_base() + sym;
  }
  return key;
}

// cache entry layout: probs for ids 3..V-1 followed by the running CDF
const std::vector<double>& ContextSampler::cdf_for_history(std::uint64_t key) {
  auto it = cdf_cache_.find(key);
  if (it != cdf_cache_.end()) return it->second;

  // unpack the history symbols back out of the key
  const auto want = static_cast<std::size_t>(lm_.order - 1);
  std::vector<std::uint32_t> history(want);
  std::uint64_t k = key;
  for (std::size_t i = want; i > 0; --i) {
    history[i - 1] = static_cast<std::uint32_t>(k % lm_.pack_base());
    k /= lm_.pack_base();
  }

  const auto n = lm_.sampleable_count();
  std::vector<double> entry(2 * n);
  double cum = 0.0;
  for (std::uint32_t w = 0; w < n; ++w) {
    const double p = renormalized(lm_, history, w + kNumReserved);
    entry[w] = p;
    cum += p;
    entry[n + w] = cum;
  }
  return cdf_cache_.emplace(key, std::move(entry)).first->second;
}

ContextSample ContextSampler::draw(Rng& rng) {
  ContextSample sample;
  if (positions_.empty()) return sample;
  std::vector<std::uint32_t> work = base_tokens_;
  const auto n = lm_.sampleable_count();
  sample.fills.reserve(positions_.size());
  for (const auto pos : positions_) {
    const auto& entry = cdf_for_history(history_key(work, pos));
    const double u = uniform_unit(rng);
    const auto begin = entry.begin() + n;
    auto it = std::upper_bound(begin, entry.end(), u);
    if (it == entry.end()) --it;
    const auto id =
        static_cast<std::uint32_t>(it - begin) + kNumReserved;
    work[pos] = id;
    sample.fills.emplace_back(pos, id);
  }
  return sample;
}

double ContextSampler::assignment_prob(
    std::span<const std::uint32_t> values) {
  if (values.size() != positions_.size()) {
    throw Error("assignment size mismatch");
  }
  std::vector<std::uint32_t> work = base_tokens_;
  const auto n = lm_.sampleable_count();
  double prob = 1.0;
  for (std::size_t i = 0; i < positions_.size(); ++i) {
    const auto& entry = cdf_for_history(history_key(work, positions_[i]));
    const std::uint32_t id = values[i];
    if (id < kNumReserved || id >= lm_.vocab_size) {
      throw Error("assignment contains a reserved token");
    }
    prob *= entry[id - kNumReserved];
    (void)n;
    work[positions_[i]] = id;
  }
  return prob;
}

ContextSample sample_context(const NGramLM& lm,
                             std::span<const std::uint32_t> tokens,
                             std::vector<std::size_t> positions, Rng& rng) {
  ContextSampler sampler(lm, tokens, std::move(positions));
  return sampler.draw(rng);
}

std::vector<std::pair<ContextSample, double>> enumerate_context_distribution(
    const NGramLM& lm, std::span<const std::uint32_t> tokens,
    std::vector<std::size_t> positions) {
  ContextSampler sampler(lm, tokens, positions);
  std::sort(positions.begin(), positions.end());

  const auto n = static_cast<std::size_t>(lm.sampleable_count());
  std::size_t total = 1;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (n == 0 || total > kEnumerationBound / n) {
      throw Error("context enumeration bound exceeded");
    }
    total *= n;
  }

  std::vector<std::pair<ContextSample, double>> out;
  out.reserve(total);
  std::vector<std::uint32_t> values(positions.size(), kNumReserved);
  if (positions.empty()) {
    out.emplace_back(ContextSample{}, 1.0);
    return out;
  }
  while (true) {
    ContextSample sample;
    sample.fills.reserve(positions.size());
    for (std::size_t i = 0; i < positions.size(); ++i) {
      sample.fills.emplace_back(positions[i], values[i]);
    }
    out.emplace_back(std::move(sample), sampler.assignment_prob(values));
    // odometer increment, most significant digit first
    std::size_t i = positions.size();
    while (i > 0) {
      --i;
      if (++values[i] < kNumReserved + n) break;
      values[i] = kNumReserved;
      if (i == 0) return out;
    }
  }
}

void save_lm(const NGramLM& lm, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write lm file: " + path);
  out << "soclm v1\n";
  out << "order " << lm.order << "\n";
  out << "delta " << format_double_exact(lm.delta) << "\n";
  out << "vocab " << lm.vocab_size << "\n";
  for (int level = 0; level < lm.order; ++level) {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> entries(
        lm.counts[level].begin(), lm.counts[level].end());
    std::sort(entries.begin(), entries.end());
    out << "level " << level << " entries " << entries.size() << "\n";
    for (const auto& [key, count] : entries) {
      out << key << " " << count << "\n";
    }
  }
}

NGramLM load_lm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open lm file: " + path);
  std::string line, tag;
  if (!std::getline(in, line) || line != "soclm v1") {
    throw Error("bad lm header in " + path);
  }
  NGramLM lm;
  std::string delta_field;
  in >> tag >> lm.order;
  if (tag != "order") throw Error("bad lm order field");
  in >> tag >> delta_field;
  if (tag != "delta") throw Error("bad lm delta field");
  lm.delta = parse_double_exact(delta_field);
  in >> tag >> lm.vocab_size;
  if (tag != "vocab") throw Error("bad lm vocab field");
  lm.counts.resize(lm.order);
  lm.history_stats.resize(lm.order);
  for (int level = 0; level < lm.order; ++level) {
    int level_read = -1;
    std::size_t entries = 0;
    in >> tag >> level_read;
    if (tag != "level" || level_read != level) throw Error("bad lm level header");
    in >> tag >> entries;
    if (tag != "entries") throw Error("bad lm entries header");
    for (std::size_t i = 0; i < entries; ++i) {
      std::uint64_t key = 0, count = 0;
      if (!(in >> key >> count)) throw Error("truncated lm table");
      lm.counts[level][key] = count;
      auto& stats = lm.history_stats[level][key / lm.pack_base()];
      stats.total += count;
      stats.distinct++;
    }
  }
  return lm;
}

}  // namespace soc
