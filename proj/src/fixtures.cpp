#include "soc/fixtures.hpp"

#include <array>
#include <cmath>
#include <fstream>

#include "soc/rng.hpp"

namespace soc {

namespace {

const std::array<const char*, 12> kIdentifierPool = {
    "grpa", "grpb", "grpc", "grpd", "grpe", "grpf",
    "grpg", "grph", "grpi", "grpj", "grpk", "grpl"};

// strong hate signal
const std::array<const char*, 12> kAbusive = {
    "vile",    "trash",  "scum",   "awful",  "nasty",  "wretched",
    "filthy",  "rotten", "stupid", "horrid", "gross",  "useless"};

// weaker hate signal carried by identifier-only hate documents
const std::array<const char*, 8> kHostile = {
    "ruining", "blame", "problem", "invading",
    "threat",  "mob",   "angry",   "takeover"};

// nonhate contexts; the adversarial pool draws from the same set
const std::array<const char*, 20> kBenign = {
    "community", "parade",   "festival", "history",     "culture",
    "museum",    "charity",  "heritage", "celebration", "market",
    "school",    "concert",  "garden",   "library",     "bakery",
    "team",      "picnic",   "fair",     "workshop",    "choir"};

const std::array<const char*, 15> kFiller = {
    "the",  "a",    "of",   "in",   "was",  "today", "people", "city",
    "group", "many", "held", "met",  "near", "this",  "with"};

template <std::size_t N>
const char* pick(const std::array<const char*, N>& pool, Rng& rng) {
  return pool[uniform_below(rng, N)];
}

// Hate documents: 90% carry an identifier; of those, 65% pair it with
// abusive words and 35% only with hostile context words, so the identifier
// carries real signal the regularized model has to replace with context.
// Benign words show up in half the hate documents, which keeps their learned
// weights bounded.
std::vector<std::string> hate_sentence(Rng& rng,
                                       const std::string* identifier) {
  std::vector<std::string> words;
  words.push_back(pick(kFiller, rng));
  if (uniform_unit(rng) < 0.5) words.push_back(pick(kFiller, rng));
  const bool with_benign = uniform_unit(rng) < 0.5;
  if (identifier) {
    words.push_back(*identifier);
    if (uniform_unit(rng) < 0.70) {
      words.push_back(pick(kAbusive, rng));
      // a benign word in a hate sentence comes with more hate mass, so the
      // sentence stays recognizable without the identifier
      if (with_benign || uniform_unit(rng) < 0.4) {
        words.push_back(pick(kAbusive, rng));
      }
    } else {
      words.push_back(pick(kHostile, rng));
      words.push_back(pick(kHostile, rng));
      if (with_benign) words.push_back(pick(kHostile, rng));
    }
  } else {
    words.push_back("people");
    words.push_back(pick(kAbusive, rng));
    if (with_benign || uniform_unit(rng) < 0.4) {
      words.push_back(pick(kAbusive, rng));
    }
  }
  if (with_benign) words.push_back(pick(kBenign, rng));
  words.push_back(pick(kFiller, rng));
  if (uniform_unit(rng) < 0.5) words.push_back(pick(kFiller, rng));
  return words;
}

// Nonhate documents with an identifier surround it with several benign
// words; the adversarial templates are shorter, which is where the
// over-weighted identifier bites.
std::vector<std::string> nonhate_sentence(Rng& rng,
                                          const std::string* identifier,
                                          const FixtureConfig& cfg) {
  std::vector<std::string> words;
  words.push_back(pick(kFiller, rng));
  if (identifier) {
    words.push_back(*identifier);
    words.push_back(pick(kBenign, rng));
    words.push_back(pick(kBenign, rng));
    words.push_back(pick(kBenign, rng));
    words.push_back(pick(kBenign, rng));
    if (uniform_unit(rng) < 0.6) words.push_back(pick(kBenign, rng));
    words.push_back(pick(kFiller, rng));
  } else {
    words.push_back(pick(kBenign, rng));
    words.push_back(pick(kFiller, rng));
    if (uniform_unit(rng) < 0.7) words.push_back(pick(kBenign, rng));
    if (uniform_unit(rng) < cfg.abusive_noise) {
      words.push_back(pick(kAbusive, rng));
    }
    if (uniform_unit(rng) < 0.04) words.push_back(pick(kHostile, rng));
  }
  words.push_back(pick(kFiller, rng));
  if (uniform_unit(rng) < 0.5) words.push_back(pick(kFiller, rng));
  return words;
}

std::vector<RawDocument> make_split(std::size_t count, Split split,
                                    const std::vector<std::string>& identifiers,
                                    const FixtureConfig& cfg, Rng& rng) {
  const auto hate_count = static_cast<std::size_t>(
      std::llround(cfg.hate_rate * static_cast<double>(count)));
  std::vector<int> labels(count, 0);
  for (std::size_t i = 0; i < hate_count; ++i) labels[i] = 1;
  shuffle(labels, rng);

  std::vector<RawDocument> docs;
  docs.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    RawDocument doc;
    doc.label = labels[i];
    doc.split = split;
    const double id_rate = doc.label == 1 ? cfg.identifier_given_hate
                                          : cfg.identifier_given_nonhate;
    const std::string* identifier = nullptr;
    if (uniform_unit(rng) < id_rate) {
      identifier = &identifiers[uniform_below(rng, identifiers.size())];
    }
    doc.tokens = doc.label == 1 ? hate_sentence(rng, identifier)
                                : nonhate_sentence(rng, identifier, cfg);
    docs.push_back(std::move(doc));
  }
  return docs;
}

}  // namespace

GeneratedFixture make_planted_fixture(const FixtureConfig& cfg) {
  if (cfg.identifiers == 0 || cfg.identifiers > kIdentifierPool.size()) {
    throw Error("identifier count must be in 1..12");
  }
  if (!(cfg.hate_rate > 0.0 && cfg.hate_rate < 1.0)) {
    throw Error("hate rate must lie in (0,1)");
  }
  GeneratedFixture out;
  for (std::size_t i = 0; i < cfg.identifiers; ++i) {
    out.identifiers.emplace_back(kIdentifierPool[i]);
  }

  Rng rng = make_rng(derive_seed(cfg.seed, 0xf1f, 0));
  auto train = make_split(cfg.train_docs, Split::kTrain, out.identifiers, cfg, rng);
  auto test = make_split(cfg.test_docs, Split::kTest, out.identifiers, cfg, rng);
  out.corpus.docs = std::move(train);
  out.corpus.docs.insert(out.corpus.docs.end(),
                         std::make_move_iterator(test.begin()),
                         std::make_move_iterator(test.end()));

  // short out-of-domain benign templates, identifiers rotating for even
  // coverage
  Rng pool_rng = make_rng(derive_seed(cfg.seed, 0xf1f, 1));
  for (std::size_t i = 0; i < cfg.pool_docs; ++i) {
    RawDocument doc;
    doc.label = 0;
    doc.split = Split::kAdversarial;
    const auto& identifier = out.identifiers[i % out.identifiers.size()];
    const auto shape = uniform_below(pool_rng, 3);
    if (shape == 2) doc.tokens.push_back(pick(kFiller, pool_rng));
    doc.tokens.push_back(identifier);
    doc.tokens.push_back(pick(kBenign, pool_rng));
    if (shape == 1) doc.tokens.push_back(pick(kFiller, pool_rng));
    out.adversarial_pool.docs.push_back(std::move(doc));
  }
  return out;
}

void write_corpus_tsv(const TextCorpus& corpus, const std::string& path,
                      bool with_split) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write fixture file: " + path);
  for (const auto& doc : corpus.docs) {
    for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
      if (i) out << ' ';
      out << doc.tokens[i];
    }
    out << "\t" << doc.label;
    if (with_split) out << "\t" << split_name(doc.split);
    out << "\n";
  }
}

}  // namespace soc
