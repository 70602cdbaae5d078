#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "soc/common.hpp"

namespace soc {

enum class Split : std::uint8_t {
  kTrain = 0,
  kVal = 1,
  kTest = 2,
  kAdversarial = 3,
  kUnassigned = 4,
};
constexpr std::size_t kNumSplits = 5;

const char* split_name(Split s);
std::optional<Split> parse_split(std::string_view name);

// Lowercases, splits on whitespace and ASCII punctuation, drops the
// punctuation. Bytes >= 0x80 are kept as word characters so UTF-8 words
// survive intact.
std::vector<std::string> tokenize(std::string_view text);

struct Vocabulary {
  // index == id; ids 0..2 are the reserved <pad>/<unk>/<mask> entries.
  std::vector<std::string> id_to_surface;
  std::unordered_map<std::string, std::uint32_t> surface_to_id;

  Vocabulary();

  std::uint32_t add(const std::string& surface);
  // kUnkId for unknown surfaces.
  std::uint32_t lookup(const std::string& surface) const;
  const std::string& surface(std::uint32_t id) const;
  std::size_t size() const { return id_to_surface.size(); }
  bool operator==(const Vocabulary& other) const {
    return id_to_surface == other.id_to_surface;
  }
};

// Pre-encoding document: surfaces only. Produced by load_corpus; split
// assignment and vocabulary construction happen at this stage.
struct RawDocument {
  std::vector<std::string> tokens;
  int label = 0;  // hate = 1, nonhate = 0
  Split split = Split::kUnassigned;
};

struct TextCorpus {
  std::vector<RawDocument> docs;
};

struct Document {
  std::vector<std::uint32_t> tokens;
  int label = 0;
  Split split = Split::kUnassigned;
};

struct Corpus {
  std::vector<Document> docs;
  Vocabulary vocab;
  // counts[split][label]
  std::array<std::array<std::size_t, 2>, kNumSplits> counts{};

  void recompute_counts();
  std::vector<std::size_t> doc_indices(Split s) const;
  std::size_t split_size(Split s) const {
    return counts[static_cast<std::size_t>(s)][0] +
           counts[static_cast<std::size_t>(s)][1];
  }
};

// Tab-separated rows: text, label in {0,1}, optional split name. Rejects
// missing files, out-of-range labels, and rows whose text tokenizes to
// nothing; errors name the 1-based row.
TextCorpus load_corpus(const std::string& path);

// Assigns train/test to every document, per-label shuffled so class
// proportions match within one document. Requires all docs unassigned and
// both label classes non-empty.
void stratified_split(TextCorpus& corpus, double train_fraction,
                      std::uint64_t seed);

// Ids 3.. in descending train-split frequency, ties lexicographic;
// surfaces below min_count are left out and resolve to <unk> at lookup.
Vocabulary build_vocab(const TextCorpus& corpus, std::size_t min_count);

Corpus encode(const TextCorpus& corpus, Vocabulary vocab);

struct IdentifierLexicon {
  std::vector<std::uint32_t> ids;  // sorted, unique, none reserved

  bool contains(std::uint32_t id) const;
  std::size_t size() const { return ids.size(); }
  bool empty() const { return ids.empty(); }
};

IdentifierLexicon make_lexicon(std::vector<std::uint32_t> ids);

// Fits an L2-regularized logistic regression on TF-IDF bag-of-words over the
// train split and returns the k features with the largest positive-class
// weight, reserved tokens and stoplisted surfaces excluded, ties broken
// lexicographically.
IdentifierLexicon derive_identifiers(const Corpus& corpus, std::size_t k,
                                     const std::set<std::string>& stoplist = {});

// Deletes lexicon tokens outright; a document emptied by the removal becomes
// the single token <unk> so corpus sizes stay comparable across methods.
Document remove_identifiers(const Document& doc, const IdentifierLexicon& lexicon);
Corpus remove_identifiers(const Corpus& corpus, const IdentifierLexicon& lexicon);

void save_lexicon(const IdentifierLexicon& lexicon, const Vocabulary& vocab,
                  const std::string& path);
IdentifierLexicon load_lexicon(const std::string& path, const Vocabulary& vocab);

// Single-file dataset dump: vocabulary plus encoded documents ("socdata v1").
void save_dataset(const Corpus& corpus, const std::string& path);
Corpus load_dataset(const std::string& path);

}  // namespace soc
