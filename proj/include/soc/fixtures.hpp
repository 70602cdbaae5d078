#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "soc/corpus.hpp"

namespace soc {

// Synthetic planted-bias corpus: identifier tokens correlate with the hate
// label (but occur in both classes), abusive words carry the real signal,
// and the adversarial pool holds benign templated sentences embedding
// identifiers.
struct FixtureConfig {
  std::size_t train_docs = 700;
  std::size_t test_docs = 300;
  std::size_t pool_docs = 400;
  std::size_t identifiers = 8;         // <= 12
  double hate_rate = 0.13;             // exact per split
  double identifier_given_hate = 0.9;
  double identifier_given_nonhate = 0.10;
  double abusive_noise = 0.06;         // abusive word slipped into nonhate
  std::uint64_t seed = 7;
};

struct GeneratedFixture {
  TextCorpus corpus;           // train + test splits assigned
  TextCorpus adversarial_pool; // all nonhate, each with one identifier
  std::vector<std::string> identifiers;
};

GeneratedFixture make_planted_fixture(const FixtureConfig& cfg);

// text<TAB>label[<TAB>split] rows, loadable by load_corpus.
void write_corpus_tsv(const TextCorpus& corpus, const std::string& path,
                      bool with_split);

}  // namespace soc
