#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "soc/eval.hpp"
#include "soc/experiment.hpp"
#include "soc/explain.hpp"
#include "soc/fixtures.hpp"
#include "soc/io_util.hpp"
#include "soc/oracle.hpp"
#include "soc/train.hpp"

namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitVerificationFailure = 1;
constexpr int kExitUsage = 2;

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw soc::Error("cannot write output file: " + path);
  return out;
}

// stream to `path`, or stdout when empty
class OutputTarget {
 public:
  explicit OutputTarget(const std::string& path) {
    if (!path.empty()) {
      file_ = open_output(path);
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::optional<std::ofstream> file_;
};

struct Socoptions {
  soc::ExecPolicy policy;
};

void add_threads_flag(CLI::App* cmd, int& threads) {
  cmd->add_option("--threads", threads,
                  "worker pool size (0 = all hardware threads)")
      ->capture_default_str();
}

soc::NGramLM obtain_lm(const std::string& lm_path, const soc::Corpus& corpus,
                       int order, double delta) {
  if (!lm_path.empty()) return soc::load_lm(lm_path);
  return soc::fit_lm(corpus, order, delta);
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto piece = text.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!piece.empty()) seeds.push_back(std::stoull(piece));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (seeds.empty()) throw soc::Error("no seeds given");
  return seeds;
}

// ---------------------------------------------------------------- ingest --

struct IngestArgs {
  std::string train_file;
  std::string test_file;
  std::string val_file;
  std::string out_path;
  std::string lm_out;
  double split_fraction = 0.8;
  std::uint64_t seed = 1;
  std::size_t min_count = 1;
  int lm_order = 3;
  double lm_delta = 0.5;
};

int run_ingest(const IngestArgs& args) {
  soc::TextCorpus text = soc::load_corpus(args.train_file);
  if (!args.test_file.empty()) {
    // explicit files fix the splits; the train file's untagged rows are train
    for (auto& doc : text.docs) {
      if (doc.split == soc::Split::kUnassigned) doc.split = soc::Split::kTrain;
    }
  }
  auto append = [&text](const std::string& path, soc::Split split) {
    if (path.empty()) return;
    auto extra = soc::load_corpus(path);
    for (auto& doc : extra.docs) {
      if (doc.split == soc::Split::kUnassigned) doc.split = split;
      text.docs.push_back(std::move(doc));
    }
  };
  append(args.test_file, soc::Split::kTest);
  append(args.val_file, soc::Split::kVal);

  // untagged rows left over (single-file input without a split column)
  // get the stratified 80/20 treatment
  const bool any_unassigned = std::any_of(
      text.docs.begin(), text.docs.end(), [](const soc::RawDocument& d) {
        return d.split == soc::Split::kUnassigned;
      });
  if (any_unassigned) {
    soc::TextCorpus unsplit;
    soc::TextCorpus rest;
    for (auto& doc : text.docs) {
      if (doc.split == soc::Split::kUnassigned) {
        unsplit.docs.push_back(std::move(doc));
      } else {
        rest.docs.push_back(std::move(doc));
      }
    }
    soc::stratified_split(unsplit, args.split_fraction, args.seed);
    text = std::move(unsplit);
    for (auto& doc : rest.docs) text.docs.push_back(std::move(doc));
  }

  const auto vocab = soc::build_vocab(text, args.min_count);
  const auto corpus = soc::encode(text, vocab);
  soc::save_dataset(corpus, args.out_path);
  if (!args.lm_out.empty()) {
    const auto lm = soc::fit_lm(corpus, args.lm_order, args.lm_delta);
    soc::save_lm(lm, args.lm_out);
  }
  std::cout << "dataset " << args.out_path << ": vocab " << corpus.vocab.size();
  for (const auto split :
       {soc::Split::kTrain, soc::Split::kVal, soc::Split::kTest}) {
    std::cout << ", " << soc::split_name(split) << " "
              << corpus.split_size(split);
  }
  std::cout << "\n";
  return kExitOk;
}

// --------------------------------------------------------------- lexicon --

struct LexiconArgs {
  std::string data_path;
  std::string out_path;
  std::string stoplist_path;
  std::size_t k = 25;
};

int run_lexicon(const LexiconArgs& args) {
  const auto corpus = soc::load_dataset(args.data_path);
  std::set<std::string> stoplist;
  if (!args.stoplist_path.empty()) {
    std::ifstream in(args.stoplist_path);
    if (!in) throw soc::Error("cannot open stoplist: " + args.stoplist_path);
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) stoplist.insert(line);
    }
  }
  const auto lexicon = soc::derive_identifiers(corpus, args.k, stoplist);
  soc::save_lexicon(lexicon, corpus.vocab, args.out_path);
  std::cout << "lexicon " << args.out_path << ": " << lexicon.size()
            << " identifiers\n";
  return kExitOk;
}

// ----------------------------------------------------------------- train --

struct TrainArgs {
  std::string data_path;
  std::string lexicon_path;
  std::string lm_path;
  std::string checkpoint_dir = ".";
  std::string report_path;
  std::string method = "plain";
  std::string seeds = "1";
  soc::TrainConfig cfg;
  int lm_order = 3;
  double lm_delta = 0.5;
  int threads = 0;
};

int run_train(const TrainArgs& args) {
  const auto corpus = soc::load_dataset(args.data_path);
  const auto method = soc::parse_method(args.method);
  if (!method) throw soc::Error("unknown method: " + args.method);

  soc::TrainConfig cfg = args.cfg;
  cfg.method = *method;
  soc::IdentifierLexicon lexicon;
  if (!args.lexicon_path.empty()) {
    lexicon = soc::load_lexicon(args.lexicon_path, corpus.vocab);
  }
  std::optional<soc::NGramLM> lm;
  if (cfg.method == soc::Method::kSocReg && cfg.alpha > 0.0) {
    lm = obtain_lm(args.lm_path, corpus, args.lm_order, args.lm_delta);
  }

  const auto seeds = parse_seeds(args.seeds);
  fs::create_directories(args.checkpoint_dir);
  const auto runs = soc::run_seeds(corpus, lexicon, lm ? &*lm : nullptr, cfg,
                                   seeds, nullptr, 0.0,
                                   soc::ExecPolicy{args.threads});

  OutputTarget report(args.report_path);
  for (const auto& run : runs) {
    const auto ckpt_path =
        (fs::path(args.checkpoint_dir) /
         ("model_" + args.method + "_seed" + std::to_string(run.seed) + ".ckpt"))
            .string();
    soc::save_checkpoint(run.params, corpus.vocab, ckpt_path);
    soc::TrainReport stamped = run.report;
    stamped.checkpoint_path = ckpt_path;
    report.stream() << "# seed " << run.seed << "\n";
    soc::write_train_report(report.stream(), stamped);
  }
  return kExitOk;
}

// --------------------------------------------------------------- explain --

struct ExplainArgs {
  std::string checkpoint;
  std::string input_file;
  std::string lm_path;
  std::string data_path;
  std::string mode = "word";
  std::string out_path;
  std::string span_text;
  std::size_t context_size = 4;
  std::size_t samples = 200;
  std::size_t top_k = 20;
  std::uint64_t seed = 1;
  int lm_order = 3;
  double lm_delta = 0.5;
  int threads = 0;
};

// input: plain UTF-8 text, one sentence per line
std::vector<std::vector<std::uint32_t>> load_sentences(
    const std::string& path, const soc::Vocabulary& vocab) {
  std::ifstream in(path);
  if (!in) throw soc::Error("cannot open input file: " + path);
  std::vector<std::vector<std::uint32_t>> sentences;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto words = soc::tokenize(line);
    if (words.empty()) {
      if (line.empty()) continue;
      throw soc::Error("input line " + std::to_string(row) +
                       " has no tokens");
    }
    std::vector<std::uint32_t> ids;
    ids.reserve(words.size());
    for (const auto& w : words) ids.push_back(vocab.lookup(w));
    sentences.push_back(std::move(ids));
  }
  if (sentences.empty()) throw soc::Error("input file has no sentences");
  return sentences;
}

soc::PhraseSpan parse_span(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw soc::Error("span must look like begin:end");
  }
  return soc::PhraseSpan{std::stoul(text.substr(0, colon)),
                         std::stoul(text.substr(colon + 1))};
}

int run_explain(const ExplainArgs& args) {
  auto [params, vocab] = soc::load_checkpoint(args.checkpoint);
  const auto sentences = load_sentences(args.input_file, vocab);
  const soc::SOCConfig cfg{args.context_size, args.samples};

  std::optional<soc::NGramLM> lm;
  if (args.context_size > 0) {
    if (!args.lm_path.empty()) {
      lm = soc::load_lm(args.lm_path);
    } else if (!args.data_path.empty()) {
      lm = soc::fit_lm(soc::load_dataset(args.data_path), args.lm_order,
                       args.lm_delta);
    } else {
      throw soc::Error("context sampling needs --lm or --data (or use -N 0)");
    }
  } else {
    // degenerate LM over the checkpoint vocabulary; never sampled at N = 0
    soc::Corpus stub;
    stub.vocab = vocab;
    soc::Document doc;
    doc.split = soc::Split::kTrain;
    doc.tokens = {soc::kNumReserved};
    if (vocab.size() <= soc::kNumReserved) {
      throw soc::Error("checkpoint vocabulary has no sampleable tokens");
    }
    stub.docs.push_back(doc);
    stub.recompute_counts();
    lm = soc::fit_lm(stub, 1, 0.5);
  }

  OutputTarget out(args.out_path);
  const soc::ExecPolicy policy{args.threads};

  if (args.mode == "word") {
    soc::write_record_header(out.stream());
    std::vector<std::vector<soc::ExplainRecord>> slots(sentences.size());
    soc::for_each_index(sentences.size(), policy, [&](std::size_t i) {
      const auto& tokens = sentences[i];
      soc::Rng rng =
          soc::make_rng(soc::derive_seed(args.seed, 0xd0c, i));
      for (std::size_t t = 0; t < tokens.size(); ++t) {
        const soc::PhraseSpan span{t, t + 1};
        const auto phi =
            soc::soc_importance(params, *lm, tokens, span, cfg, rng);
        slots[i].push_back(soc::ExplainRecord{
            i, span, soc::span_text(vocab, tokens, span), phi.value,
            phi.std_error, phi.samples, cfg.context_size});
      }
    });
    for (const auto& slot : slots) {
      for (const auto& rec : slot) soc::write_record(out.stream(), rec);
    }
  } else if (args.mode == "phrase") {
    if (args.span_text.empty()) {
      throw soc::Error("phrase mode needs --span begin:end");
    }
    const auto span = parse_span(args.span_text);
    soc::write_record_header(out.stream());
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      const auto& tokens = sentences[i];
      soc::Rng rng = soc::make_rng(soc::derive_seed(args.seed, 0xd0c, i));
      const auto phi = soc::soc_importance(params, *lm, tokens, span, cfg, rng);
      soc::write_record(out.stream(),
                        soc::ExplainRecord{
                            i, span, soc::span_text(vocab, tokens, span),
                            phi.value, phi.std_error, phi.samples,
                            cfg.context_size});
    }
  } else if (args.mode == "tree") {
    soc::write_record_header(out.stream());
    std::vector<soc::ExplanationTree> trees(sentences.size());
    soc::for_each_index(sentences.size(), policy, [&](std::size_t i) {
      trees[i] = soc::hierarchical_explanation(
          params, *lm, sentences[i], cfg,
          soc::derive_seed(args.seed, 0xd0c, i));
    });
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      for (const auto& rec :
           soc::tree_records(trees[i], vocab, sentences[i], i, cfg)) {
        soc::write_record(out.stream(), rec);
      }
    }
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      out.stream() << "# tree " << i << "\n";
      soc::render_tree(out.stream(), trees[i], vocab, sentences[i]);
    }
  } else if (args.mode == "mean") {
    // rank words by mean importance over the input sentences
    soc::Corpus scratch;
    scratch.vocab = vocab;
    for (const auto& tokens : sentences) {
      soc::Document doc;
      doc.split = soc::Split::kTest;
      doc.tokens = tokens;
      scratch.docs.push_back(std::move(doc));
    }
    scratch.recompute_counts();
    const auto ranking = soc::mean_word_importance(
        params, *lm, scratch, cfg, args.top_k, args.seed, policy);
    out.stream() << "rank\tword\tmean_phi\toccurrences\n";
    for (std::size_t r = 0; r < ranking.size(); ++r) {
      out.stream() << (r + 1) << "\t" << ranking[r].surface << "\t"
                   << soc::format_metric(ranking[r].mean) << "\t"
                   << ranking[r].occurrences << "\n";
    }
  } else {
    throw soc::Error("unknown explain mode: " + args.mode);
  }
  return kExitOk;
}

// ------------------------------------------------------------------ eval --

struct EvalArgs {
  std::vector<std::string> checkpoints;
  std::string data_path;
  std::string lexicon_path;
  std::string pool_path;
  std::string out_path;
  std::string method_label = "model";
  std::size_t adversarial_n = 250;
  std::uint64_t seed = 1;
  double threshold = 0.0;
};

int run_eval(const EvalArgs& args) {
  const auto corpus = soc::load_dataset(args.data_path);
  const auto test_idx = corpus.doc_indices(soc::Split::kTest);
  if (test_idx.empty()) throw soc::Error("dataset has no test split");

  std::optional<soc::AdversarialSet> advset;
  if (!args.pool_path.empty()) {
    if (args.lexicon_path.empty()) {
      throw soc::Error("adversarial evaluation needs --lexicon");
    }
    const auto lexicon = soc::load_lexicon(args.lexicon_path, corpus.vocab);
    const auto pool_text = soc::load_corpus(args.pool_path);
    const auto pool = soc::encode(pool_text, corpus.vocab);
    advset = soc::build_adversarial_set(pool, lexicon, args.adversarial_n,
                                        args.seed);
  }

  std::vector<soc::SeedMetrics> per_seed;
  for (std::size_t i = 0; i < args.checkpoints.size(); ++i) {
    auto [params, vocab] = soc::load_checkpoint(args.checkpoints[i]);
    if (!(vocab == corpus.vocab)) {
      throw soc::Error("checkpoint vocabulary differs from dataset: " +
                       args.checkpoints[i]);
    }
    soc::SeedMetrics metrics;
    metrics.seed = i;
    metrics.prf = soc::prf(
        soc::confusion(params, corpus.docs, test_idx, args.threshold));
    if (advset) {
      metrics.adversarial =
          soc::adversarial_accuracy(params, *advset, args.threshold);
    }
    per_seed.push_back(metrics);
  }
  const auto report = soc::aggregate(std::move(per_seed));

  OutputTarget out(args.out_path);
  out.stream() << "checkpoint\tprecision\trecall\tf1\tadversarial_accuracy\n";
  for (std::size_t i = 0; i < report.per_seed.size(); ++i) {
    const auto& m = report.per_seed[i];
    out.stream() << args.checkpoints[i] << "\t"
                 << soc::format_metric(m.prf.precision) << "\t"
                 << soc::format_metric(m.prf.recall) << "\t"
                 << soc::format_metric(m.prf.f1) << "\t"
                 << soc::format_metric(m.adversarial) << "\n";
  }
  soc::write_summary_header(out.stream());
  soc::write_summary_row(out.stream(), args.method_label, report);
  return kExitOk;
}

// ---------------------------------------------------------------- ablate --

struct AblateArgs {
  std::string data_path;
  std::string lexicon_path;
  std::string pool_path;
  std::string out_path;
  std::string sizes = "";
  std::size_t repeats = 5;
  std::size_t adversarial_n = 250;
  std::uint64_t subset_seed = 1;
  std::uint64_t adversarial_seed = 1;
  soc::TrainConfig cfg;
  double threshold = 0.0;
  int threads = 0;
};

std::vector<std::size_t> parse_sizes(const std::string& text,
                                     std::size_t lexicon_size) {
  std::vector<std::size_t> sizes;
  if (text.empty()) {
    for (std::size_t s = 0; s <= lexicon_size; ++s) sizes.push_back(s);
    return sizes;
  }
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto piece = text.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!piece.empty()) {
      const auto colon = piece.find(':');
      if (colon != std::string::npos) {
        const auto lo = std::stoul(piece.substr(0, colon));
        const auto hi = std::stoul(piece.substr(colon + 1));
        for (auto s = lo; s <= hi; ++s) sizes.push_back(s);
      } else {
        sizes.push_back(std::stoul(piece));
      }
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (sizes.empty()) throw soc::Error("no ablation sizes given");
  return sizes;
}

int run_ablate(const AblateArgs& args) {
  const auto corpus = soc::load_dataset(args.data_path);
  const auto lexicon = soc::load_lexicon(args.lexicon_path, corpus.vocab);
  const auto pool_text = soc::load_corpus(args.pool_path);
  const auto pool = soc::encode(pool_text, corpus.vocab);
  const auto advset = soc::build_adversarial_set(
      pool, lexicon, args.adversarial_n, args.adversarial_seed);

  soc::TrainConfig cfg = args.cfg;
  cfg.method = soc::Method::kPlain;
  const auto sizes = parse_sizes(args.sizes, lexicon.size());
  const auto records = soc::identifier_ablation(
      corpus, lexicon, nullptr, cfg, advset, sizes, args.repeats,
      args.subset_seed, args.threshold, soc::ExecPolicy{args.threads});

  OutputTarget out(args.out_path);
  soc::write_ablation_header(out.stream());
  for (const auto& rec : records) {
    soc::write_ablation_record(out.stream(), rec, corpus.vocab);
  }
  return kExitOk;
}

// -------------------------------------------------------------- fixtures --

struct FixturesArgs {
  std::string out_dir = "fixtures";
  soc::FixtureConfig cfg;
};

int run_fixtures(const FixturesArgs& args) {
  const auto fixture = soc::make_planted_fixture(args.cfg);
  fs::create_directories(args.out_dir);
  const auto dir = fs::path(args.out_dir);
  soc::write_corpus_tsv(fixture.corpus, (dir / "corpus.tsv").string(), true);
  soc::write_corpus_tsv(fixture.adversarial_pool,
                        (dir / "adversarial_pool.tsv").string(), false);
  std::ofstream ids((dir / "identifiers.txt").string());
  if (!ids) throw soc::Error("cannot write identifiers file");
  for (const auto& surface : fixture.identifiers) ids << surface << "\n";
  std::cout << "fixtures in " << args.out_dir << ": "
            << fixture.corpus.docs.size() << " corpus docs, "
            << fixture.adversarial_pool.docs.size() << " pool docs, "
            << fixture.identifiers.size() << " identifiers\n";
  return kExitOk;
}

// ---------------------------------------------------------------- oracle --

int run_oracle(std::uint64_t seed, int threads) {
  soc::OracleOptions opt;
  opt.seed = seed;
  opt.policy = soc::ExecPolicy{threads};
  const auto checks = soc::run_oracle_suite(opt);
  soc::write_oracle_report(std::cout, checks);
  return soc::all_passed(checks) ? kExitOk : kExitVerificationFailure;
}

void add_train_config_options(CLI::App* cmd, soc::TrainConfig& cfg) {
  cmd->add_option("--alpha", cfg.alpha, "regularization strength")
      ->capture_default_str();
  cmd->add_option("--lr", cfg.lr, "Adam learning rate")->capture_default_str();
  cmd->add_option("--beta1", cfg.beta1, "Adam beta1")->capture_default_str();
  cmd->add_option("--beta2", cfg.beta2, "Adam beta2")->capture_default_str();
  cmd->add_option("--adam-eps", cfg.eps, "Adam epsilon")->capture_default_str();
  cmd->add_option("--epochs", cfg.epochs, "training epochs")
      ->capture_default_str();
  cmd->add_option("--batch-size", cfg.batch_size, "minibatch size")
      ->capture_default_str();
  cmd->add_option("--embed-dim", cfg.embed_dim, "embedding dimension")
      ->capture_default_str();
  cmd->add_option("--hidden-dim", cfg.hidden_dim, "hidden layer width")
      ->capture_default_str();
  cmd->add_option("--context-size", cfg.soc.context_size,
                  "SOC context size N during training")
      ->capture_default_str();
  cmd->add_option("--samples", cfg.soc.samples,
                  "SOC sample count K during training")
      ->capture_default_str();
  cmd->add_flag("--resample-contexts", cfg.resample_contexts,
                "redraw context samples every step instead of freezing them");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "soc: occlusion/sampling-and-occlusion explanations, explanation-"
      "regularized training, and bias evaluation for small text classifiers"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value config file (flags win)");
  app.allow_config_extras(CLI::config_extras_mode::error);

  IngestArgs ingest;
  auto* cmd_ingest = app.add_subcommand(
      "ingest", "load TSV corpora, split, build vocabulary, write a dataset");
  cmd_ingest->add_option("--train", ingest.train_file, "train TSV file")
      ->required();
  cmd_ingest->add_option("--test", ingest.test_file, "test TSV file");
  cmd_ingest->add_option("--val", ingest.val_file, "validation TSV file");
  cmd_ingest->add_option("--split-fraction", ingest.split_fraction,
                         "train fraction when no test file is given")
      ->capture_default_str();
  cmd_ingest->add_option("--seed", ingest.seed, "split seed")
      ->capture_default_str();
  cmd_ingest->add_option("--min-count", ingest.min_count,
                         "vocabulary frequency cutoff")
      ->capture_default_str();
  cmd_ingest->add_option("--out", ingest.out_path, "dataset output path")
      ->required();
  cmd_ingest->add_option("--lm-out", ingest.lm_out,
                         "also fit and dump the n-gram language model");
  cmd_ingest->add_option("--lm-order", ingest.lm_order, "language model order")
      ->capture_default_str();
  cmd_ingest->add_option("--lm-delta", ingest.lm_delta,
                         "absolute discount in (0,1)")
      ->capture_default_str();

  LexiconArgs lexicon;
  auto* cmd_lexicon = app.add_subcommand(
      "lexicon", "derive the group-identifier lexicon from a dataset");
  cmd_lexicon->add_option("--data", lexicon.data_path, "dataset path")
      ->required();
  cmd_lexicon->add_option("-k,--top-k", lexicon.k,
                          "number of identifiers (paper point: 25)")
      ->capture_default_str();
  cmd_lexicon->add_option("--stoplist", lexicon.stoplist_path,
                          "surfaces to exclude, one per line");
  cmd_lexicon->add_option("--out", lexicon.out_path, "lexicon output path")
      ->required();

  TrainArgs train;
  auto* cmd_train = app.add_subcommand(
      "train", "train classifiers (plain, wr, oc-reg, soc-reg)");
  cmd_train->add_option("--data", train.data_path, "dataset path")->required();
  cmd_train->add_option("--lexicon", train.lexicon_path,
                        "identifier lexicon (wr/oc-reg/soc-reg)");
  cmd_train->add_option("--method", train.method,
                        "plain | wr | oc-reg | soc-reg")
      ->capture_default_str();
  cmd_train->add_option("--seeds", train.seeds, "comma-separated seeds")
      ->capture_default_str();
  cmd_train->add_option("--lm", train.lm_path, "language model dump");
  cmd_train->add_option("--lm-order", train.lm_order,
                        "order when fitting the LM on the fly")
      ->capture_default_str();
  cmd_train->add_option("--lm-delta", train.lm_delta, "absolute discount")
      ->capture_default_str();
  cmd_train
      ->add_option("--checkpoint-dir", train.checkpoint_dir,
                   "directory for seed-suffixed checkpoints")
      ->capture_default_str();
  cmd_train->add_option("--report", train.report_path,
                        "training report path (default: stdout)");
  add_train_config_options(cmd_train, train.cfg);
  add_threads_flag(cmd_train, train.threads);

  ExplainArgs explain;
  auto* cmd_explain = app.add_subcommand(
      "explain", "word / phrase / tree / mean importance records");
  cmd_explain->add_option("--checkpoint", explain.checkpoint, "model checkpoint")
      ->required();
  cmd_explain
      ->add_option("--input", explain.input_file,
                   "UTF-8 text, one sentence per line")
      ->required();
  cmd_explain->add_option("--mode", explain.mode, "word | phrase | tree | mean")
      ->capture_default_str();
  cmd_explain->add_option("--span", explain.span_text,
                          "phrase span begin:end (phrase mode)");
  cmd_explain->add_option("-N,--context-size", explain.context_size,
                          "SOC context size")
      ->capture_default_str();
  cmd_explain->add_option("-K,--samples", explain.samples, "SOC sample count")
      ->capture_default_str();
  cmd_explain->add_option("--top-k", explain.top_k, "rows in mean mode")
      ->capture_default_str();
  cmd_explain->add_option("--lm", explain.lm_path, "language model dump");
  cmd_explain->add_option("--data", explain.data_path,
                          "dataset to fit the LM on when no dump is given");
  cmd_explain->add_option("--lm-order", explain.lm_order, "LM order")
      ->capture_default_str();
  cmd_explain->add_option("--lm-delta", explain.lm_delta, "absolute discount")
      ->capture_default_str();
  cmd_explain->add_option("--seed", explain.seed, "sampling seed")
      ->capture_default_str();
  cmd_explain->add_option("--out", explain.out_path,
                          "output path (default: stdout)");
  add_threads_flag(cmd_explain, explain.threads);

  EvalArgs eval;
  auto* cmd_eval = app.add_subcommand(
      "eval", "score checkpoints on the test split and the adversarial set");
  cmd_eval
      ->add_option("--checkpoints", eval.checkpoints,
                   "checkpoint files (aggregated across)")
      ->required()
      ->delimiter(',');
  cmd_eval->add_option("--data", eval.data_path, "dataset path")->required();
  cmd_eval->add_option("--lexicon", eval.lexicon_path, "identifier lexicon");
  cmd_eval->add_option("--adversarial-pool", eval.pool_path,
                       "nonhate pool TSV for the adversarial set");
  cmd_eval->add_option("--adversarial-n", eval.adversarial_n,
                       "adversarial set size (paper preset: 5000)")
      ->capture_default_str();
  cmd_eval->add_option("--seed", eval.seed, "adversarial sampling seed")
      ->capture_default_str();
  cmd_eval->add_option("--threshold", eval.threshold, "decision threshold")
      ->capture_default_str();
  cmd_eval->add_option("--method-label", eval.method_label,
                       "method column in the summary row")
      ->capture_default_str();
  cmd_eval->add_option("--out", eval.out_path, "output path (default: stdout)");

  AblateArgs ablate;
  auto* cmd_ablate = app.add_subcommand(
      "ablate", "identifier-removal ablation curve (plain config)");
  cmd_ablate->add_option("--data", ablate.data_path, "dataset path")->required();
  cmd_ablate->add_option("--lexicon", ablate.lexicon_path, "identifier lexicon")
      ->required();
  cmd_ablate
      ->add_option("--adversarial-pool", ablate.pool_path,
                   "nonhate pool TSV for the adversarial set")
      ->required();
  cmd_ablate->add_option("--sizes", ablate.sizes,
                         "subset sizes, e.g. 0:25 or 0,5,10 (default: all)");
  cmd_ablate->add_option("--repeats", ablate.repeats,
                         "repeats per size (paper: 5)")
      ->capture_default_str();
  cmd_ablate->add_option("--adversarial-n", ablate.adversarial_n,
                         "adversarial set size")
      ->capture_default_str();
  cmd_ablate->add_option("--subset-seed", ablate.subset_seed,
                         "identifier subset sampling seed")
      ->capture_default_str();
  cmd_ablate->add_option("--adversarial-seed", ablate.adversarial_seed,
                         "adversarial sampling seed")
      ->capture_default_str();
  cmd_ablate->add_option("--threshold", ablate.threshold, "decision threshold")
      ->capture_default_str();
  cmd_ablate->add_option("--out", ablate.out_path,
                         "output path (default: stdout)");
  cmd_ablate->add_option("--seed", ablate.cfg.seed, "training seed")
      ->capture_default_str();
  add_train_config_options(cmd_ablate, ablate.cfg);
  add_threads_flag(cmd_ablate, ablate.threads);

  FixturesArgs fixtures;
  auto* cmd_fixtures = app.add_subcommand(
      "fixtures", "generate the planted-bias corpus and adversarial pool");
  cmd_fixtures->add_option("--out-dir", fixtures.out_dir, "output directory")
      ->capture_default_str();
  cmd_fixtures->add_option("--seed", fixtures.cfg.seed, "generator seed")
      ->capture_default_str();
  cmd_fixtures->add_option("--train-docs", fixtures.cfg.train_docs,
                           "train documents")
      ->capture_default_str();
  cmd_fixtures->add_option("--test-docs", fixtures.cfg.test_docs,
                           "test documents")
      ->capture_default_str();
  cmd_fixtures->add_option("--pool-docs", fixtures.cfg.pool_docs,
                           "adversarial pool documents")
      ->capture_default_str();
  cmd_fixtures->add_option("--identifiers", fixtures.cfg.identifiers,
                           "planted identifier count")
      ->capture_default_str();
  cmd_fixtures->add_option("--hate-rate", fixtures.cfg.hate_rate,
                           "positive rate per split")
      ->capture_default_str();

  std::uint64_t oracle_seed = 2026;
  int oracle_threads = 0;
  auto* cmd_oracle = app.add_subcommand(
      "oracle", "run the built-in verification suite (exit 1 on failure)");
  cmd_oracle->add_option("--seed", oracle_seed, "suite seed")
      ->capture_default_str();
  add_threads_flag(cmd_oracle, oracle_threads);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (cmd_ingest->parsed()) return run_ingest(ingest);
    if (cmd_lexicon->parsed()) return run_lexicon(lexicon);
    if (cmd_train->parsed()) return run_train(train);
    if (cmd_explain->parsed()) return run_explain(explain);
    if (cmd_eval->parsed()) return run_eval(eval);
    if (cmd_ablate->parsed()) return run_ablate(ablate);
    if (cmd_fixtures->parsed()) return run_fixtures(fixtures);
    if (cmd_oracle->parsed()) return run_oracle(oracle_seed, oracle_threads);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
