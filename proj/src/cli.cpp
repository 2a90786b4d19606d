#include "onto/cli.hpp"

#include <algorithm>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>

#include "onto/corpus.hpp"
#include "onto/evaluate.hpp"
#include "onto/io_util.hpp"
#include "onto/normalize.hpp"
#include "onto/pipeline.hpp"
#include "onto/synth.hpp"

namespace onto::cli {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::map<std::string, std::string> load_config_file(const std::string& path) {
  std::map<std::string, std::string> out;
  size_t lineno = 0;
  for (const std::string& line : read_lines(path)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    out[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return out;
}

// Flat key-value options: config file values overridden by --key value or
// --key=value flags.
class Options {
 public:
  Options(const std::vector<std::string>& args, const std::set<std::string>& known) {
    // config file first so flags win
    for (size_t i = 0; i < args.size(); ++i) {
      if (args[i] == "--config" && i + 1 < args.size()) {
        for (auto& [k, v] : load_config_file(args[i + 1])) values_[k] = v;
      } else if (args[i].rfind("--config=", 0) == 0) {
        for (auto& [k, v] : load_config_file(args[i].substr(9))) values_[k] = v;
      }
    }
    for (size_t i = 0; i < args.size(); ++i) {
      const std::string& a = args[i];
      if (a.rfind("--", 0) != 0) throw UsageError("unexpected argument '" + a + "'");
      std::string key, value;
      size_t eq = a.find('=');
      if (eq != std::string::npos) {
        key = a.substr(2, eq - 2);
        value = a.substr(eq + 1);
      } else {
        key = a.substr(2);
        if (i + 1 >= args.size()) throw UsageError("flag --" + key + " needs a value");
        value = args[++i];
      }
      if (key != "config" && !known.count(key)) throw UsageError("unknown flag --" + key);
      if (key != "config") values_[key] = value;
    }
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::string get(const std::string& key, const std::string& def = "") const {
    auto it = values_.find(key);
    return it == values_.end() ? def : it->second;
  }
  std::string require(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end() || it->second.empty()) {
      throw UsageError("missing required option --" + key);
    }
    return it->second;
  }
  long long get_int(const std::string& key, long long def) const {
    auto it = values_.find(key);
    return it == values_.end() ? def : parse_int(it->second, "--" + key);
  }
  double get_double(const std::string& key, double def) const {
    auto it = values_.find(key);
    return it == values_.end() ? def : parse_double(it->second, "--" + key);
  }

 private:
  std::map<std::string, std::string> values_;
};

LexiconPaths lexicon_paths(const Options& opt) {
  LexiconPaths paths;
  paths.dictionary = opt.require("dict");
  paths.ontology = opt.require("onto");
  paths.abbreviations = opt.get("abbr");
  paths.senses = opt.get("senses");
  paths.stop_words = opt.get("stops");
  paths.noise_words = opt.get("noise");
  return paths;
}

uint64_t seed_of(const Options& opt) { return static_cast<uint64_t>(opt.get_int("seed", 42)); }
int threads_of(const Options& opt) { return static_cast<int>(opt.get_int("threads", 1)); }

SkipGramParams skipgram_params(const Options& opt) {
  SkipGramParams p;
  p.dim = static_cast<int>(opt.get_int("dim", 100));
  p.window = static_cast<int>(opt.get_int("window", 5));
  p.epochs = static_cast<int>(opt.get_int("epochs", 5));
  p.negative = static_cast<int>(opt.get_int("negative", 5));
  p.min_count = static_cast<int>(opt.get_int("min-count", 5));
  p.seed = seed_of(opt);
  p.threads = threads_of(opt);
  return p;
}

ForestConfig forest_config(const Options& opt) {
  ForestConfig c;
  c.n_trees = static_cast<int>(opt.get_int("trees", 10));
  c.min_samples_split = static_cast<int>(opt.get_int("min-split", 2));
  return c;
}

EmbeddingTable embeddings_for(const Options& opt, const std::vector<Verbatim>& corpus) {
  std::string emb_path = opt.get("emb");
  if (!emb_path.empty()) return EmbeddingTable::load(emb_path);
  std::cerr << "training correction embeddings on the input corpus\n";
  return train_skipgram(corpus, skipgram_params(opt));
}

FeatureModels feature_models_for(const Options& opt, const std::vector<Verbatim>& corpus,
                                 const Lexicons& lex, const CorpusStats& stats) {
  FeatureModels fm;
  fm.emb = EmbeddingTable::load(opt.require("emb"));
  std::string fam_csv = opt.get("features");
  fm.families = fam_csv.empty() ? all_families() : families_from_csv(fam_csv);
  if (opt.has("tags")) {
    fm.tagger = std::make_shared<FileTagProvider>(opt.get("tags"));
  } else {
    fm.tagger = std::make_shared<BaselineTagger>();
  }
  PolysemyFitOptions pf;
  pf.min_freq = static_cast<int>(opt.get_int("poly-min-freq", 20));
  pf.sense_cap = static_cast<int>(opt.get_int("p-max", 10));
  pf.sample_cap = static_cast<int>(opt.get_int("sample-cap", 1000));
  pf.seed = seed_of(opt);
  pf.threads = threads_of(opt);
  std::cerr << "fitting polysemy centroids\n";
  fm.poly = fit_polysemy_all(corpus, fm.emb, lex.senses, stats, pf);
  return fm;
}

// ---- subcommands ---------------------------------------------------------

int cmd_synth(const Options& opt) {
  SynthSpec spec;
  spec.size = static_cast<int>(opt.get_int("size", 10000));
  spec.concepts = static_cast<int>(opt.get_int("concepts", 300));
  spec.holdout = opt.get_double("holdout-frac", 0.3);
  double rate = opt.get_double("noise-rate", 0.05);
  spec.misspell_rate = opt.get_double("misspell-rate", rate);
  spec.runon_rate = opt.get_double("runon-rate", rate);
  spec.whitespace_rate = opt.get_double("whitespace-rate", rate);
  spec.abbrev_rate = opt.get_double("abbrev-rate", rate);
  spec.abbr_template_frac = opt.get_double("abbr-frac", 0.3);
  spec.seed = seed_of(opt);
  SynthSummary sum = generate_synthetic(spec, opt.require("out"));
  std::cerr << "synth: " << sum.verbatims << " verbatims, " << sum.gold_spans << " gold spans, "
            << sum.held_out << " held-out phrases, " << sum.abbrev_plants
            << " abbreviation plants\n";
  std::cout << sum.files.at("config") << "\n";
  return 0;
}

int cmd_stats(const Options& opt) {
  std::vector<Verbatim> corpus = load_corpus(opt.require("corpus"));
  CorpusStats stats =
      build_stats(corpus, static_cast<int>(opt.get_int("max-n", 4)), threads_of(opt));
  dump_stats(stats, opt.require("out"));
  return 0;
}

int cmd_normalize(const Options& opt) {
  std::vector<Verbatim> corpus = load_corpus(opt.require("corpus"));
  Lexicons lex = load_lexicons(lexicon_paths(opt));
  CorpusStats stats = build_stats(corpus, kMaxN, threads_of(opt));
  EmbeddingTable emb = embeddings_for(opt, corpus);
  NormalizeResult result = normalize_corpus(corpus, lex, stats, emb, threads_of(opt));
  save_corpus(result.corpus, opt.require("out"));
  if (opt.has("log")) save_correction_logs(result.logs, opt.get("log"));
  size_t changed = 0;
  for (const CorrectionLog& log : result.logs) changed += log.entries.size();
  std::cerr << "normalize: " << changed << " corrections across " << corpus.size()
            << " verbatims\n";
  return 0;
}

int cmd_embed(const Options& opt) {
  std::vector<Verbatim> corpus = load_corpus(opt.require("corpus"));
  EmbeddingTable table = train_skipgram(corpus, skipgram_params(opt));
  table.save(opt.require("out"));
  std::cerr << "embed: " << table.size() << " vectors of dim " << table.dim() << "\n";
  return 0;
}

int cmd_trainset(const Options& opt) {
  std::vector<Verbatim> corpus = load_corpus(opt.require("corpus"));
  Lexicons lex = load_lexicons(lexicon_paths(opt));
  TrainingSet ts = build_training_set(corpus, lex.onto, lex.stops,
                                      opt.get_int("quota", 50000), seed_of(opt));
  if (opt.has("labels")) {
    for (LabeledSample s : load_label_file(opt.get("labels"), "manual")) {
      ts.add(std::move(s));
    }
  }
  if (opt.has("request-out")) {
    CorpusStats stats = build_stats(corpus, kMaxN, threads_of(opt));
    auto requests = frequent_unlabeled(stats, lex.onto, opt.get_int("min-freq", 50));
    save_label_requests(requests, opt.get("request-out"));
    std::cerr << "trainset: " << requests.size() << " label requests written\n";
  }
  ts.save(opt.require("out"));
  std::cerr << "trainset: " << ts.samples.size() << " samples\n";
  return 0;
}

int cmd_train(const Options& opt) {
  std::vector<Verbatim> corpus = load_corpus(opt.require("corpus"));
  Lexicons lex = load_lexicons(lexicon_paths(opt));
  TrainingSet ts = TrainingSet::load(opt.require("trainset"));
  CorpusStats stats = build_stats(corpus, kMaxN, threads_of(opt));
  FeatureModels fm = feature_models_for(opt, corpus, lex, stats);
  std::cerr << "assembling features for " << ts.samples.size() << " samples\n";
  SampleFeatures features = assemble_samples(ts.samples, corpus, lex, fm, threads_of(opt));
  std::cerr << "training forests\n";
  TwoStageModel model = train_two_stage(features, fm, lex.onto.types, forest_config(opt),
                                        seed_of(opt), threads_of(opt));
  model.lexicon_fingerprints = {lex.fingerprints.begin(), lex.fingerprints.end()};
  std::map<std::string, std::string> extra;
  extra["seed"] = std::to_string(seed_of(opt));
  extra["pos_mode"] = opt.has("tags") ? "file" : "baseline";
  save_bundle(opt.require("out"), model, fm, extra);
  std::cerr << "train: bundle written to " << opt.get("out") << "\n";
  return 0;
}

int cmd_infer(const Options& opt) {
  std::vector<Verbatim> corpus = load_corpus(opt.require("corpus"));
  Lexicons lex = load_lexicons(lexicon_paths(opt));
  ModelBundle bundle = load_bundle(opt.require("model"));
  for (const auto& [role, fp] : bundle.model.lexicon_fingerprints) {
    auto it = lex.fingerprints.find(role);
    if (it != lex.fingerprints.end() && it->second != fp) {
      std::cerr << "warning: " << role << " differs from the one used in training\n";
    }
  }
  if (opt.has("tags")) bundle.features.tagger = std::make_shared<FileTagProvider>(opt.get("tags"));
  std::vector<Extraction> extractions =
      infer(corpus, bundle.model, bundle.features, lex, threads_of(opt));
  save_extractions(extractions, opt.require("out"));
  size_t concepts = 0;
  for (const Extraction& e : extractions) concepts += e.is_concept ? 1 : 0;
  std::cerr << "infer: " << extractions.size() << " candidates, " << concepts << " concepts\n";
  return 0;
}

int cmd_eval(const Options& opt) {
  std::vector<Extraction> extractions = load_extractions(opt.require("extractions"));
  std::vector<GoldEntry> gold = load_gold(opt.require("gold"));
  std::vector<std::string> types;
  for (const GoldEntry& g : gold) {
    if (std::find(types.begin(), types.end(), g.type) == types.end()) types.push_back(g.type);
  }
  std::vector<std::string> holdout;
  if (opt.has("holdout")) {
    for (const std::string& line : read_lines(opt.get("holdout"))) {
      std::string p = trim(line);
      if (!p.empty()) holdout.push_back(p);
    }
  }
  EvalReport report = evaluate_extractions(extractions, gold, types, holdout);
  std::string tsv = report.to_tsv();
  if (opt.has("out")) atomic_write(opt.get("out"), tsv);
  std::cout << tsv;
  return 0;
}

// Pools unlabeled candidates straight from the corpus for the driver.
class CorpusActiveLearnEnv : public ActiveLearnEnv {
 public:
  CorpusActiveLearnEnv(const std::vector<Verbatim>& corpus, const Lexicons& lex,
                       const FeatureModels& fm, size_t pool_target, uint64_t seed, int threads)
      : corpus_(corpus), lex_(lex), fm_(fm), pool_target_(pool_target), seed_(seed),
        threads_(threads) {
    for (size_t vi = 0; vi < corpus_.size(); ++vi) {
      const Verbatim& v = corpus_[vi];
      for (const Span& s : generate_candidates(v, lex_.stops)) {
        all_candidates_[static_cast<int>(s.n)].emplace_back(vi, s);
      }
    }
  }

  void trainset_matrix(int n, const TrainingSet& ts, Matrix& x,
                       std::vector<int>& stage1_labels) override {
    std::vector<LabeledSample> subset;
    for (const LabeledSample* s : ts.for_n(n)) subset.push_back(*s);
    if (subset.empty()) {
      x = Matrix();
      stage1_labels.clear();
      return;
    }
    SampleFeatures sf = assemble_samples(subset, corpus_, lex_, fm_, threads_);
    x = std::move(sf.x.at(n));
    stage1_labels = std::move(sf.stage1_labels.at(n));
  }

  std::vector<PoolSample> pool(int round, int n, const TrainingSet& ts) override {
    auto it = all_candidates_.find(n);
    if (it == all_candidates_.end()) return {};
    const auto& cands = it->second;
    Rng rng(derive_seed(seed_, "al-pool-" + std::to_string(round) + "-" + std::to_string(n)));
    std::vector<size_t> order = sample_without_replacement(
        cands.size(), std::min(cands.size(), pool_target_ * 4), rng);
    rng.shuffle(order);

    std::vector<LabeledSample> picked;
    for (size_t idx : order) {
      if (picked.size() >= pool_target_) break;
      auto [vi, span] = cands[idx];
      const Verbatim& v = corpus_[vi];
      LabeledSample s;
      s.verbatim_id = v.id;
      s.start = span.start;
      s.n = span.n;
      s.phrase = v.phrase(span.start, span.n);
      if (ts.contains(s.key())) continue;
      picked.push_back(std::move(s));
    }
    if (picked.empty()) return {};
    SampleFeatures sf = assemble_samples(picked, corpus_, lex_, fm_, threads_);
    std::vector<PoolSample> out(picked.size());
    const Matrix& x = sf.x.at(n);
    for (size_t r = 0; r < x.rows; ++r) {
      size_t si = sf.sample_index.at(n)[r];
      out[si].sample = picked[si];
      out[si].features.assign(x.row(r), x.row(r) + x.cols);
    }
    return out;
  }

 private:
  const std::vector<Verbatim>& corpus_;
  const Lexicons& lex_;
  const FeatureModels& fm_;
  size_t pool_target_;
  uint64_t seed_;
  int threads_;
  std::map<int, std::vector<std::pair<size_t, Span>>> all_candidates_;
};

class InteractiveLabelSource : public LabelSource {
 public:
  explicit InteractiveLabelSource(const std::vector<Verbatim>& corpus) {
    for (const Verbatim& v : corpus) by_id_.emplace(v.id, &v);
  }

  std::optional<std::string> label_for(const PoolSample& ps) override {
    auto it = by_id_.find(ps.sample.verbatim_id);
    if (it != by_id_.end()) {
      const Verbatim& v = *it->second;
      std::cout << "\n";
      for (size_t i = 0; i < v.size(); ++i) {
        if (i) std::cout << ' ';
        if (i == ps.sample.start) std::cout << "[";
        std::cout << v.tokens[i].norm;
        if (i + 1 == ps.sample.start + ps.sample.n) std::cout << "]";
      }
      std::cout << "\n";
    }
    std::cout << "label for '" << ps.sample.phrase
              << "' (c=CONCEPT, i=IRRELEVANT, or a type label, empty=skip): " << std::flush;
    std::string line;
    if (!std::getline(std::cin, line)) return std::nullopt;
    line = trim(line);
    if (line.empty()) return std::nullopt;
    if (line == "c" || line == "C") return std::string(kConceptLabel);
    if (line == "i" || line == "I") return std::string(kIrrelevantLabel);
    return line;
  }

 private:
  std::unordered_map<std::string, const Verbatim*> by_id_;
};

int cmd_active_learn(const Options& opt) {
  std::vector<Verbatim> corpus = load_corpus(opt.require("corpus"));
  Lexicons lex = load_lexicons(lexicon_paths(opt));
  TrainingSet ts = TrainingSet::load(opt.require("trainset"));
  CorpusStats stats = build_stats(corpus, kMaxN, threads_of(opt));
  FeatureModels fm = feature_models_for(opt, corpus, lex, stats);

  CorpusActiveLearnEnv env(corpus, lex, fm, static_cast<size_t>(opt.get_int("sample", 500)),
                           seed_of(opt), threads_of(opt));
  std::unique_ptr<LabelSource> source;
  if (opt.has("labels")) {
    source = std::make_unique<FileLabelSource>(opt.get("labels"));
  } else {
    source = std::make_unique<InteractiveLabelSource>(corpus);
  }
  ActiveLearnReport report = active_learning_rounds(
      ts, ts.lengths_present(), env, *source, static_cast<int>(opt.get_int("rounds", 2)),
      forest_config(opt), seed_of(opt), threads_of(opt));
  ts.save(opt.require("out"));
  for (const auto& r : report.rounds) {
    std::cerr << "round " << r.round << " n=" << r.n << ": pool " << r.pool_size << ", selected "
              << r.selected << ", added " << r.added << "\n";
  }
  std::cerr << "active-learn: " << report.total_added << " samples added\n";
  return 0;
}

int cmd_importance(const Options& opt) {
  std::vector<Verbatim> corpus = load_corpus(opt.require("corpus"));
  Lexicons lex = load_lexicons(lexicon_paths(opt));
  TrainingSet ts = TrainingSet::load(opt.require("trainset"));
  CorpusStats stats = build_stats(corpus, kMaxN, threads_of(opt));
  FeatureModels fm = feature_models_for(opt, corpus, lex, stats);

  int n = static_cast<int>(opt.get_int("n", 1));
  std::vector<LabeledSample> subset;
  for (const LabeledSample* s : ts.for_n(n)) subset.push_back(*s);
  if (subset.empty()) throw std::runtime_error("no training samples of length " + std::to_string(n));
  SampleFeatures sf = assemble_samples(subset, corpus, lex, fm, threads_of(opt));

  AblationData data;
  data.x = std::move(sf.x.at(n));
  data.labels = std::move(sf.stage1_labels.at(n));
  data.classes = {kConceptLabel, kIrrelevantLabel};
  data.positive = kConceptLabel;
  data.schema = fm.schema_for(n);
  data.forest = forest_config(opt);
  data.seed = seed_of(opt);
  data.threads = threads_of(opt);
  make_split(data.x.rows, opt.get_double("train-frac", 0.75), seed_of(opt), data.train_idx,
             data.eval_idx);

  std::string mode = opt.get("mode", "drop-one");
  std::string tsv;
  if (mode == "drop-one") {
    tsv = importance_report_tsv(drop_one_importance(data));
  } else if (mode == "backward") {
    tsv = elimination_trace_tsv(backward_elimination(data));
  } else {
    throw UsageError("--mode must be drop-one or backward");
  }
  if (opt.has("out")) atomic_write(opt.get("out"), tsv);
  std::cout << tsv;
  return 0;
}

struct Subcommand {
  const char* name;
  const char* summary;
  int (*fn)(const Options&);
  std::set<std::string> keys;
};

const std::vector<Subcommand>& subcommands() {
  static const std::vector<Subcommand> cmds = {
      {"synth", "generate a synthetic corpus with gold annotations and lexicons", cmd_synth,
       {"out", "size", "concepts", "holdout-frac", "noise-rate", "misspell-rate", "runon-rate",
        "whitespace-rate", "abbrev-rate", "abbr-frac", "seed"}},
      {"stats", "dump phrase term/document frequencies", cmd_stats,
       {"corpus", "out", "max-n", "seed", "threads"}},
      {"normalize", "repair misspellings, run-ons, split words, and abbreviations",
       cmd_normalize,
       {"corpus", "out", "log", "emb", "dim", "window", "epochs", "negative", "min-count",
        "dict", "onto", "abbr", "senses", "stops", "noise", "seed", "threads"}},
      {"embed", "train skip-gram embeddings", cmd_embed,
       {"corpus", "out", "dim", "window", "epochs", "negative", "min-count", "seed", "threads"}},
      {"trainset", "build the weakly labeled per-N training sets", cmd_trainset,
       {"corpus", "out", "quota", "labels", "request-out", "min-freq", "dict", "onto", "abbr",
        "senses", "stops", "noise", "seed", "threads"}},
      {"train", "train the per-N two-stage forests", cmd_train,
       {"corpus", "trainset", "emb", "out", "trees", "min-split", "features", "tags",
        "poly-min-freq", "p-max", "sample-cap", "dict", "onto", "abbr", "senses", "stops",
        "noise", "seed", "threads"}},
      {"infer", "extract typed concepts from raw verbatims", cmd_infer,
       {"corpus", "model", "out", "tags", "dict", "onto", "abbr", "senses", "stops", "noise",
        "seed", "threads"}},
      {"active-learn", "committee-based active learning over unlabeled candidates",
       cmd_active_learn,
       {"corpus", "trainset", "emb", "out", "rounds", "sample", "labels", "trees", "min-split",
        "features", "tags", "poly-min-freq", "p-max", "sample-cap", "dict", "onto", "abbr",
        "senses", "stops", "noise", "seed", "threads"}},
      {"eval", "score extractions against gold spans", cmd_eval,
       {"extractions", "gold", "holdout", "out", "seed", "threads"}},
      {"importance", "drop-one feature importance or backward elimination", cmd_importance,
       {"corpus", "trainset", "emb", "mode", "n", "train-frac", "out", "trees", "min-split",
        "features", "tags", "poly-min-freq", "p-max", "sample-cap", "dict", "onto", "abbr",
        "senses", "stops", "noise", "seed", "threads"}},
  };
  return cmds;
}

void print_usage(std::ostream& os) {
  os << "usage: ontolearn <subcommand> [--key value ...]\n\nsubcommands:\n";
  for (const Subcommand& c : subcommands()) {
    os << "  " << c.name;
    for (size_t i = std::string(c.name).size(); i < 14; ++i) os << ' ';
    os << c.summary << "\n";
  }
  os << "\nglobal flags: --config <file> (key = value defaults), --seed N, --threads N\n";
}

}  // namespace

int run(const std::vector<std::string>& args) {
  if (args.empty() || args[0] == "--help" || args[0] == "help") {
    print_usage(args.empty() ? std::cerr : std::cout);
    return args.empty() ? 2 : 0;
  }
  for (const Subcommand& c : subcommands()) {
    if (args[0] == c.name) {
      try {
        Options opt(std::vector<std::string>(args.begin() + 1, args.end()), c.keys);
        return c.fn(opt);
      } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        std::cerr << "run 'ontolearn help' for usage\n";
        return 2;
      } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
      }
    }
  }
  std::cerr << "error: unknown subcommand '" << args[0] << "'\n";
  print_usage(std::cerr);
  return 2;
}

}  // namespace onto::cli
