#include "soc/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "soc/rng.hpp"

namespace soc {

const char* split_name(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
    case Split::kAdversarial: return "adversarial";
    case Split::kUnassigned: return "unassigned";
  }
  return "unassigned";
}

std::optional<Split> parse_split(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "val") return Split::kVal;
  if (name == "test") return Split::kTest;
  if (name == "adversarial") return Split::kAdversarial;
  if (name == "unassigned") return Split::kUnassigned;
  return std::nullopt;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string word;
  for (unsigned char c : text) {
    const bool word_char =
        (c >= 0x80) || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
        (c >= '0' && c <= '9');
    if (word_char) {
      word.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a')
                                          : static_cast<char>(c));
    } else if (!word.empty()) {
      out.push_back(std::move(word));
      word.clear();
    }
  }
  if (!word.empty()) out.push_back(std::move(word));
  return out;
}

Vocabulary::Vocabulary() {
  add("<pad>");
  add("<unk>");
  add("<mask>");
}

std::uint32_t Vocabulary::add(const std::string& surface) {
  auto it = surface_to_id.find(surface);
  if (it != surface_to_id.end()) return it->second;
  const auto id = static_cast<std::uint32_t>(id_to_surface.size());
  id_to_surface.push_back(surface);
  surface_to_id.emplace(surface, id);
  return id;
}

std::uint32_t Vocabulary::lookup(const std::string& surface) const {
  auto it = surface_to_id.find(surface);
  return it == surface_to_id.end() ? kUnkId : it->second;
}

const std::string& Vocabulary::surface(std::uint32_t id) const {
  if (id >= id_to_surface.size()) throw Error("token id out of range");
  return id_to_surface[id];
}

void Corpus::recompute_counts() {
  for (auto& row : counts) row.fill(0);
  for (const auto& doc : docs) {
    counts[static_cast<std::size_t>(doc.split)][doc.label == 1 ? 1 : 0]++;
  }
}

std::vector<std::size_t> Corpus::doc_indices(Split s) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (docs[i].split == s) out.push_back(i);
  }
  return out;
}

TextCorpus load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus file: " + path);
  TextCorpus corpus;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::size_t start = 0;
    while (true) {
      const std::size_t tab = line.find('\t', start);
      if (tab == std::string::npos) {
        cols.push_back(line.substr(start));
        break;
      }
      cols.push_back(line.substr(start, tab - start));
      start = tab + 1;
    }
    if (cols.size() < 2) {
      throw Error("missing label column at row " + std::to_string(row));
    }
    RawDocument doc;
    doc.tokens = tokenize(cols[0]);
    if (doc.tokens.empty()) {
      throw Error("empty text at row " + std::to_string(row));
    }
    if (cols[1] == "0") {
      doc.label = 0;
    } else if (cols[1] == "1") {
      doc.label = 1;
    } else {
      throw Error("invalid label at row " + std::to_string(row));
    }
    if (cols.size() >= 3 && !cols[2].empty()) {
      const auto split = parse_split(cols[2]);
      if (!split) {
        throw Error("unknown split name '" + cols[2] + "' at row " +
                    std::to_string(row));
      }
      doc.split = *split;
    }
    corpus.docs.push_back(std::move(doc));
  }
  return corpus;
}

void stratified_split(TextCorpus& corpus, double train_fraction,
                      std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error("train fraction must lie in (0,1)");
  }
  std::array<std::vector<std::size_t>, 2> by_label;
  for (std::size_t i = 0; i < corpus.docs.size(); ++i) {
    if (corpus.docs[i].split != Split::kUnassigned) {
      throw Error("stratified_split requires unassigned documents");
    }
    by_label[corpus.docs[i].label == 1 ? 1 : 0].push_back(i);
  }
  for (int label = 0; label < 2; ++label) {
    if (by_label[label].empty()) {
      throw Error(std::string("label class ") + std::to_string(label) +
                  " has no documents");
    }
  }
  Rng rng = make_rng(derive_seed(seed, 0x517a7));
  for (int label = 0; label < 2; ++label) {
    auto& indices = by_label[label];
    shuffle(indices, rng);
    const auto n_train = static_cast<std::size_t>(
        std::llround(train_fraction * static_cast<double>(indices.size())));
    for (std::size_t i = 0; i < indices.size(); ++i) {
      corpus.docs[indices[i]].split =
          i < n_train ? Split::kTrain : Split::kTest;
    }
  }
}

Vocabulary build_vocab(const TextCorpus& corpus, std::size_t min_count) {
  if (min_count < 1) throw Error("min_count must be >= 1");
  std::unordered_map<std::string, std::size_t> freq;
  for (const auto& doc : corpus.docs) {
    if (doc.split != Split::kTrain) continue;
    for (const auto& tok : doc.tokens) freq[tok]++;
  }
  std::vector<std::pair<std::string, std::size_t>> entries;
  entries.reserve(freq.size());
  for (auto& kv : freq) {
    if (kv.second >= min_count) entries.emplace_back(kv.first, kv.second);
  }
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  Vocabulary vocab;
  for (const auto& [surface, count] : entries) {
    (void)count;
    vocab.add(surface);
  }
  return vocab;
}

Corpus encode(const TextCorpus& corpus, Vocabulary vocab) {
  Corpus out;
  out.vocab = std::move(vocab);
  out.docs.reserve(corpus.docs.size());
  for (const auto& raw : corpus.docs) {
    Document doc;
    doc.label = raw.label;
    doc.split = raw.split;
    doc.tokens.reserve(raw.tokens.size());
    for (const auto& tok : raw.tokens) doc.tokens.push_back(out.vocab.lookup(tok));
    out.docs.push_back(std::move(doc));
  }
  out.recompute_counts();
  return out;
}

bool IdentifierLexicon::contains(std::uint32_t id) const {
  return std::binary_search(ids.begin(), ids.end(), id);
}

IdentifierLexicon make_lexicon(std::vector<std::uint32_t> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  for (auto id : ids) {
    if (is_reserved(id)) throw Error("lexicon may not contain reserved tokens");
  }
  return IdentifierLexicon{std::move(ids)};
}

namespace {

// Full-batch gradient descent on L2-regularized logistic loss over
// L2-normalized TF-IDF rows. Rows have norm <= sqrt(2) with the bias
// feature, so lr = 1/(0.5 + lambda) keeps the iteration stable.
struct LogisticFit {
  std::vector<double> weights;
  double bias = 0.0;
};

LogisticFit fit_tfidf_logistic(const Corpus& corpus) {
  const std::size_t vocab_size = corpus.vocab.size();
  const auto train = corpus.doc_indices(Split::kTrain);
  const auto n_docs = train.size();

  std::vector<double> df(vocab_size, 0.0);
  std::vector<std::vector<std::pair<std::uint32_t, double>>> rows(n_docs);
  for (std::size_t r = 0; r < n_docs; ++r) {
    const auto& doc = corpus.docs[train[r]];
    std::unordered_map<std::uint32_t, double> tf;
    for (auto id : doc.tokens) tf[id] += 1.0;
    rows[r].assign(tf.begin(), tf.end());
    std::sort(rows[r].begin(), rows[r].end());
    for (const auto& [id, count] : rows[r]) {
      (void)count;
      df[id] += 1.0;
    }
  }
  for (std::size_t r = 0; r < n_docs; ++r) {
    double norm_sq = 0.0;
    for (auto& [id, value] : rows[r]) {
      const double idf =
          std::log((1.0 + static_cast<double>(n_docs)) / (1.0 + df[id])) + 1.0;
      value *= idf;
      norm_sq += value * value;
    }
    if (norm_sq > 0.0) {
      const double inv = 1.0 / std::sqrt(norm_sq);
      for (auto& [id, value] : rows[r]) value *= inv;
    }
  }

  constexpr double kLambda = 1.0;
  constexpr double kGradTol = 1e-6;
  constexpr int kMaxSteps = 10000;
  const double lr = 1.0 / (0.5 + kLambda);

  LogisticFit fit;
  fit.weights.assign(vocab_size, 0.0);
  std::vector<double> grad(vocab_size, 0.0);
  for (int step = 0; step < kMaxSteps; ++step) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double grad_bias = 0.0;
    for (std::size_t r = 0; r < n_docs; ++r) {
      double z = fit.bias;
      for (const auto& [id, value] : rows[r]) z += fit.weights[id] * value;
      const double y = corpus.docs[train[r]].label == 1 ? 1.0 : -1.0;
      // d/dz log(1 + exp(-y z)) = -y * sigmoid(-y z)
      const double s = 1.0 / (1.0 + std::exp(y * z));
      const double coeff = -y * s / static_cast<double>(n_docs);
      for (const auto& [id, value] : rows[r]) grad[id] += coeff * value;
      grad_bias += coeff;
    }
    double grad_inf = std::abs(grad_bias);
    for (std::size_t j = 0; j < vocab_size; ++j) {
      grad[j] += kLambda * fit.weights[j];
      grad_inf = std::max(grad_inf, std::abs(grad[j]));
    }
    if (grad_inf < kGradTol) break;
    for (std::size_t j = 0; j < vocab_size; ++j) fit.weights[j] -= lr * grad[j];
    fit.bias -= lr * grad_bias;
  }
  return fit;
}

}  // namespace

IdentifierLexicon derive_identifiers(const Corpus& corpus, std::size_t k,
                                     const std::set<std::string>& stoplist) {
  if (corpus.split_size(Split::kTrain) == 0) {
    throw Error("derive_identifiers requires a non-empty train split");
  }
  std::vector<std::uint32_t> candidates;
  for (std::uint32_t id = kNumReserved; id < corpus.vocab.size(); ++id) {
    if (!stoplist.count(corpus.vocab.surface(id))) candidates.push_back(id);
  }
  if (k > candidates.size()) {
    throw Error("k exceeds vocabulary size (" + std::to_string(k) + " > " +
                std::to_string(candidates.size()) + ")");
  }
  if (k == 0) return IdentifierLexicon{};

  const LogisticFit fit = fit_tfidf_logistic(corpus);
  std::sort(candidates.begin(), candidates.end(),
            [&](std::uint32_t a, std::uint32_t b) {
              if (fit.weights[a] != fit.weights[b]) {
                return fit.weights[a] > fit.weights[b];
              }
              return corpus.vocab.surface(a) < corpus.vocab.surface(b);
            });
  candidates.resize(k);
  return make_lexicon(std::move(candidates));
}

Document remove_identifiers(const Document& doc,
                            const IdentifierLexicon& lexicon) {
  Document out;
  out.label = doc.label;
  out.split = doc.split;
  for (auto id : doc.tokens) {
    if (!lexicon.contains(id)) out.tokens.push_back(id);
  }
  if (out.tokens.empty()) out.tokens.push_back(kUnkId);
  return out;
}

Corpus remove_identifiers(const Corpus& corpus,
                          const IdentifierLexicon& lexicon) {
  Corpus out;
  out.vocab = corpus.vocab;
  out.docs.reserve(corpus.docs.size());
  for (const auto& doc : corpus.docs) {
    out.docs.push_back(remove_identifiers(doc, lexicon));
  }
  out.recompute_counts();
  return out;
}

void save_lexicon(const IdentifierLexicon& lexicon, const Vocabulary& vocab,
                  const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write lexicon file: " + path);
  for (auto id : lexicon.ids) out << vocab.surface(id) << "\n";
}

IdentifierLexicon load_lexicon(const std::string& path,
                               const Vocabulary& vocab) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open lexicon file: " + path);
  std::vector<std::uint32_t> ids;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto id = vocab.lookup(line);
    if (id == kUnkId && line != vocab.surface(kUnkId)) {
      throw Error("lexicon word not in vocabulary: '" + line + "'");
    }
    ids.push_back(id);
  }
  return make_lexicon(std::move(ids));
}

void save_dataset(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write dataset file: " + path);
  out << "socdata v1\n";
  out << "vocab " << corpus.vocab.size() << "\n";
  for (const auto& surface : corpus.vocab.id_to_surface) out << surface << "\n";
  out << "docs " << corpus.docs.size() << "\n";
  for (const auto& doc : corpus.docs) {
    out << split_name(doc.split) << "\t" << doc.label << "\t";
    for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
      if (i) out << ' ';
      out << doc.tokens[i];
    }
    out << "\n";
  }
}

Corpus load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset file: " + path);
  std::string line;
  if (!std::getline(in, line) || line != "socdata v1") {
    throw Error("bad dataset header in " + path);
  }
  std::string tag;
  std::size_t count = 0;
  in >> tag >> count;
  if (tag != "vocab") throw Error("bad dataset vocab section in " + path);
  std::getline(in, line);
  Corpus corpus;
  Vocabulary vocab;
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::getline(in, line)) throw Error("truncated vocab in " + path);
    if (i < kNumReserved) {
      if (line != vocab.surface(static_cast<std::uint32_t>(i))) {
        throw Error("reserved vocabulary entry mismatch in " + path);
      }
    } else {
      vocab.add(line);
    }
  }
  in >> tag >> count;
  if (tag != "docs") throw Error("bad dataset docs section in " + path);
  std::getline(in, line);
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::getline(in, line)) throw Error("truncated docs in " + path);
    std::istringstream row(line);
    std::string split_field, label_field, ids_field;
    if (!std::getline(row, split_field, '\t') ||
        !std::getline(row, label_field, '\t') ||
        !std::getline(row, ids_field)) {
      throw Error("malformed document row in " + path);
    }
    Document doc;
    const auto split = parse_split(split_field);
    if (!split) throw Error("unknown split in dataset row");
    doc.split = *split;
    doc.label = label_field == "1" ? 1 : 0;
    if (label_field != "0" && label_field != "1") {
      throw Error("invalid label in dataset row");
    }
    std::istringstream ids(ids_field);
    std::uint32_t id = 0;
    while (ids >> id) {
      if (id >= vocab.size()) throw Error("token id out of range in dataset");
      doc.tokens.push_back(id);
    }
    if (doc.tokens.empty()) throw Error("empty document in dataset");
    corpus.docs.push_back(std::move(doc));
  }
  corpus.vocab = std::move(vocab);
  corpus.recompute_counts();
  return corpus;
}

}  // namespace soc
