#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <set>

#include "onto/io_util.hpp"
#include "onto/pipeline.hpp"
#include "onto/rng.hpp"

using namespace onto;

namespace {

SeedOntology onto_with(const std::vector<std::pair<std::string, std::string>>& concepts) {
  SeedOntology onto;
  for (const auto& [phrase, type] : concepts) {
    onto.concepts.emplace(phrase, type);
    onto.phrases.insert(phrase);
    for (const std::string& w : split(phrase, ' ')) onto.constituents.insert(w);
    if (!onto.has_type(type)) onto.types.push_back(type);
  }
  return onto;
}

StopNoiseLists stops_with(const std::vector<std::string>& stop,
                          const std::vector<std::string>& noise = {}) {
  StopNoiseLists s;
  s.stop_words.insert(stop.begin(), stop.end());
  s.noise_words.insert(noise.begin(), noise.end());
  return s;
}

// independent maximal-match reference: enumerate all boundary-respecting
// matches, then sweep left to right taking the longest match at each
// uncovered position
std::vector<Span> longest_match_oracle(const Verbatim& v, const SeedOntology& onto) {
  std::vector<Span> matches;
  for (uint32_t start = 0; start < v.size(); ++start) {
    for (uint32_t n = 1; n <= 4 && start + n <= v.size(); ++n) {
      if (!v.boundary_free(start, n)) continue;
      if (onto.phrases.count(v.phrase(start, n))) matches.push_back({start, n});
    }
  }
  std::sort(matches.begin(), matches.end(), [](const Span& a, const Span& b) {
    if (a.start != b.start) return a.start < b.start;
    return a.n > b.n;
  });
  std::vector<Span> out;
  uint32_t covered_to = 0;
  for (const Span& m : matches) {
    if (m.start < covered_to) continue;
    out.push_back(m);
    covered_to = m.start + m.n;
  }
  return out;
}

bool spans_overlap(const Span& a, const Span& b) {
  return a.start < b.start + b.n && b.start < a.start + a.n;
}

}  // namespace

TEST_CASE("tag_seed_concepts prefers the longest match and consumes it") {
  SeedOntology onto = onto_with({{"engine control module", "B"}, {"engine", "B"}});
  Verbatim v = make_verbatim("t", "the engine control module is replaced");
  auto spans = tag_seed_concepts(v, onto);
  REQUIRE(spans.size() == 1);
  CHECK(v.phrase(spans[0].start, spans[0].n) == "engine control module");

  Verbatim none = make_verbatim("t", "nothing to see");
  CHECK(tag_seed_concepts(none, onto).empty());
}

TEST_CASE("tag_seed_concepts overlapping seeds consume left to right") {
  SeedOntology onto = onto_with({{"fuel pump", "A"}, {"pump relay", "A"}});
  Verbatim v = make_verbatim("t", "fuel pump relay");
  auto spans = tag_seed_concepts(v, onto);
  REQUIRE(spans.size() == 1);
  CHECK(v.phrase(spans[0].start, spans[0].n) == "fuel pump");
}

TEST_CASE("tag_seed_concepts does not match across sentence boundaries") {
  SeedOntology onto = onto_with({{"fuel pump", "A"}});
  Verbatim v = make_verbatim("t", "fuel. pump");
  CHECK(tag_seed_concepts(v, onto).empty());
}

TEST_CASE("tag_seed_concepts equals the brute-force oracle on random corpora") {
  Rng rng(404);
  std::vector<std::string> vocab = {"aa", "bb", "cc", "dd", "ee"};
  // random seed ontology of 1-3 gram phrases
  SeedOntology onto;
  std::vector<std::pair<std::string, std::string>> entries;
  for (int i = 0; i < 12; ++i) {
    int len = 1 + static_cast<int>(rng.below(3));
    std::vector<std::string> ws;
    for (int k = 0; k < len; ++k) ws.push_back(vocab[rng.index(vocab.size())]);
    entries.emplace_back(join(ws, " "), "A");
  }
  onto = onto_with(entries);

  for (int trial = 0; trial < 300; ++trial) {
    std::string text;
    int len = 1 + static_cast<int>(rng.below(12));
    for (int k = 0; k < len; ++k) {
      text += vocab[rng.index(vocab.size())];
      text += rng.real() < 0.15 ? ". " : " ";
    }
    Verbatim v = make_verbatim("t", text);
    if (v.size() == 0) continue;
    auto got = tag_seed_concepts(v, onto);
    auto want = longest_match_oracle(v, onto);
    CHECK(got == want);
    // pairwise non-overlap and no-subspan properties
    for (size_t i = 0; i < got.size(); ++i) {
      for (size_t j = i + 1; j < got.size(); ++j) {
        CHECK(!spans_overlap(got[i], got[j]));
        bool i_in_j = got[i].start >= got[j].start &&
                      got[i].start + got[i].n <= got[j].start + got[j].n;
        bool j_in_i = got[j].start >= got[i].start &&
                      got[j].start + got[j].n <= got[i].start + got[i].n;
        CHECK(!i_in_j);
        CHECK(!j_in_i);
      }
    }
  }
}

TEST_CASE("collect_irrelevant excludes overlaps and stop spans") {
  SeedOntology onto = onto_with({{"pump", "A"}});
  StopNoiseLists stops = stops_with({"the"});
  Verbatim v = make_verbatim("t", "valve the pump housing");
  auto concepts = tag_seed_concepts(v, onto);
  REQUIRE(concepts.size() == 1);
  auto irr = collect_irrelevant(v, concepts, stops);
  // no span may overlap "pump" (index 2) or contain "the" (index 1)
  for (const Span& s : irr) {
    CHECK(!spans_overlap(s, concepts[0]));
    for (uint32_t i = 0; i < s.n; ++i) CHECK(v.tokens[s.start + i].norm != "the");
  }
  // exactly: {valve} and {housing}
  CHECK(irr.size() == 2);

  // disjointness from the tagged spans for random inputs
  Verbatim all = make_verbatim("t", "pump pump");
  auto cspans = tag_seed_concepts(all, onto);
  CHECK(collect_irrelevant(all, cspans, stops).empty());
}

TEST_CASE("generate_candidates keeps overlapping spans but not stop words") {
  StopNoiseLists stops = stops_with({"is"});
  Verbatim v = make_verbatim("t", "light is on");
  auto cands = generate_candidates(v, stops);
  std::set<std::string> phrases;
  for (const Span& s : cands) phrases.insert(v.phrase(s.start, s.n));
  CHECK(phrases == std::set<std::string>{"light", "on"});

  Verbatim allstop = make_verbatim("t", "is is is");
  CHECK(generate_candidates(allstop, stops).empty());

  Verbatim clean = make_verbatim("t", "a b c d");
  CHECK(generate_candidates(clean, stops_with({})).size() == 10);
}

TEST_CASE("build_training_set balance, labels, determinism") {
  SeedOntology onto = onto_with({{"fuel pump", "A"}, {"stall", "B"}});
  StopNoiseLists stops = stops_with({"the"});
  std::vector<Verbatim> corpus;
  for (int i = 0; i < 30; ++i) {
    corpus.push_back(make_verbatim("v" + std::to_string(i),
                                   "the fuel pump caused stall near ramp today"));
  }
  TrainingSet ts = build_training_set(corpus, onto, stops, 10, 7);
  // quota caps both sides at 10 for lengths with enough pool
  size_t concepts_n2 = 0, irrelevant_n2 = 0, concepts_n1 = 0;
  for (const LabeledSample& s : ts.samples) {
    if (s.n == 2 && s.is_concept()) ++concepts_n2;
    if (s.n == 2 && !s.is_concept()) ++irrelevant_n2;
    if (s.n == 1 && s.is_concept()) ++concepts_n1;
  }
  CHECK(concepts_n2 == 10);
  CHECK(irrelevant_n2 == 10);
  CHECK(concepts_n1 == 10);
  for (const LabeledSample& s : ts.samples) {
    if (s.is_concept()) CHECK((s.label == "A" || s.label == "B"));
    else CHECK(s.label == "IRRELEVANT");
    CHECK(s.source == "seed-ontology");
  }

  TrainingSet again = build_training_set(corpus, onto, stops, 10, 7);
  REQUIRE(again.samples.size() == ts.samples.size());
  for (size_t i = 0; i < ts.samples.size(); ++i) {
    CHECK(again.samples[i].key() == ts.samples[i].key());
    CHECK(again.samples[i].label == ts.samples[i].label);
  }

  // quota larger than availability takes everything once
  TrainingSet big = build_training_set(corpus, onto, stops, 100000, 7);
  size_t big_concepts_n2 = 0;
  for (const LabeledSample& s : big.samples) {
    if (s.n == 2 && s.is_concept()) ++big_concepts_n2;
  }
  CHECK(big_concepts_n2 == 30);
}

TEST_CASE("frequent_unlabeled excludes seed phrases and sorts by frequency") {
  SeedOntology onto = onto_with({{"fuel pump", "A"}});
  CorpusStats st;
  st.total_docs = 10;
  st.term_freq = {{"fuel pump", 500}, {"stall", 50}, {"rattle", 50}, {"rare", 2}};
  auto out = frequent_unlabeled(st, onto, 10);
  REQUIRE(out.size() == 2);
  CHECK(out[0].phrase == "rattle");  // ties lexicographic
  CHECK(out[1].phrase == "stall");
  CHECK(frequent_unlabeled(st, onto, 1000).empty());
}

TEST_CASE("training set file round trip rejects duplicates") {
  TrainingSet ts;
  CHECK(ts.add({"v1", 0, 2, "fuel pump", "A", "seed-ontology"}));
  CHECK(!ts.add({"v1", 0, 2, "fuel pump", "B", "manual"}));  // same span
  CHECK(ts.add({"v1", 3, 1, "stall", "IRRELEVANT", "manual"}));
  std::string path = (std::filesystem::temp_directory_path() / "onto_ts_test.tsv").string();
  ts.save(path);
  TrainingSet back = TrainingSet::load(path);
  REQUIRE(back.samples.size() == 2);
  CHECK(back.samples[0].phrase == "fuel pump");
  CHECK(back.samples[1].label == "IRRELEVANT");
  CHECK(back.lengths_present() == std::vector<int>{1, 2});
}

TEST_CASE("committee selects exactly the 4-4 splits") {
  // a conflict region in [0.4, 0.6] with random labels keeps the
  // bootstrapped members split on samples inside it
  Rng rng(99);
  size_t n = 160;
  Matrix x(n, 2);
  std::vector<int> y(n);
  for (size_t i = 0; i < n; ++i) {
    if (i < 60) {
      x.at(i, 0) = 0.4 + rng.real() * 0.2;
      x.at(i, 1) = rng.real();
      y[i] = static_cast<int>(rng.below(2));
    } else {
      double v = rng.real();
      x.at(i, 0) = v < 0.5 ? rng.real() * 0.3 : 0.7 + rng.real() * 0.3;
      x.at(i, 1) = rng.real();
      y[i] = x.at(i, 0) < 0.5 ? 0 : 1;
    }
  }
  ForestConfig config;
  Committee committee = train_committee(x, y, config, 31337);
  REQUIRE(committee.members.size() == 8);

  Matrix pool(200, 2);
  Rng prng(5);
  for (size_t i = 0; i < pool.rows; ++i) {
    if (i < 120) {
      pool.at(i, 0) = 0.4 + prng.real() * 0.2;
      pool.at(i, 1) = prng.real();
    } else {
      pool.at(i, 0) = prng.real();
      pool.at(i, 1) = prng.real();
    }
  }
  std::vector<size_t> selected = committee_disagreements(committee, pool);
  CHECK(!selected.empty());
  // every selected sample re-votes exactly 4-4
  for (size_t idx : selected) {
    CHECK(idx < pool.rows);
    int votes = 0;
    for (const ForestModel& m : committee.members) {
      auto p = m.predict_proba(pool.row(idx), 2);
      if (p[0] >= p[1]) ++votes;
    }
    CHECK(votes == 4);
  }
  // and non-selected ones do not
  std::set<size_t> sel(selected.begin(), selected.end());
  for (size_t i = 0; i < pool.rows; ++i) {
    if (sel.count(i)) continue;
    int votes = 0;
    for (const ForestModel& m : committee.members) {
      auto p = m.predict_proba(pool.row(i), 2);
      if (p[0] >= p[1]) ++votes;
    }
    CHECK(votes != 4);
  }

  CHECK_THROWS_AS(committee_disagreements(Committee{}, pool), std::invalid_argument);
}

namespace {

// synthetic environment for the driver: ambiguous pool rows plus clear ones
class VectorEnv : public ActiveLearnEnv {
 public:
  VectorEnv(Matrix base_x, std::vector<int> base_y) : x_(std::move(base_x)), y_(std::move(base_y)) {}

  void trainset_matrix(int n, const TrainingSet& ts, Matrix& x,
                       std::vector<int>& labels) override {
    (void)n;
    // base data plus every added sample (features regenerated by key)
    size_t extra = 0;
    for (const LabeledSample& s : ts.samples) {
      if (s.source == "active-learning") ++extra;
    }
    x = Matrix(x_.rows + extra, x_.cols);
    labels.clear();
    for (size_t i = 0; i < x_.rows; ++i) {
      std::copy(x_.row(i), x_.row(i) + x_.cols, x.row(i));
      labels.push_back(y_[i]);
    }
    size_t r = x_.rows;
    for (const LabeledSample& s : ts.samples) {
      if (s.source != "active-learning") continue;
      for (size_t j = 0; j < x_.cols; ++j) x.at(r, j) = 0.5;
      labels.push_back(s.label == kConceptLabel ? 0 : 1);
      ++r;
    }
  }

  std::vector<PoolSample> pool(int round, int n, const TrainingSet& ts) override {
    (void)n;
    Rng rng(static_cast<uint64_t>(round) * 7919 + 13);
    std::vector<PoolSample> out;
    for (int i = 0; i < 150; ++i) {
      PoolSample ps;
      ps.sample.verbatim_id = "pool-r" + std::to_string(round);
      ps.sample.start = static_cast<uint32_t>(i);
      ps.sample.n = 1;
      ps.sample.phrase = "p" + std::to_string(i);
      if (ts.contains(ps.sample.key())) continue;
      ps.features = {0.4 + rng.real() * 0.2, rng.real()};
      out.push_back(std::move(ps));
    }
    return out;
  }

 private:
  Matrix x_;
  std::vector<int> y_;
};

std::pair<Matrix, std::vector<int>> conflicted_base(uint64_t seed) {
  Rng rng(seed);
  size_t n = 160;
  Matrix x(n, 2);
  std::vector<int> y(n);
  for (size_t i = 0; i < n; ++i) {
    if (i < 60) {
      x.at(i, 0) = 0.4 + rng.real() * 0.2;
      x.at(i, 1) = rng.real();
      y[i] = static_cast<int>(rng.below(2));
    } else {
      double v = rng.real();
      x.at(i, 0) = v < 0.5 ? rng.real() * 0.3 : 0.7 + rng.real() * 0.3;
      x.at(i, 1) = rng.real();
      y[i] = x.at(i, 0) < 0.5 ? 0 : 1;
    }
  }
  return {std::move(x), std::move(y)};
}

}  // namespace

TEST_CASE("active learning driver grows the set from a label file without duplicates") {
  auto [x, y] = conflicted_base(1912);
  VectorEnv env(std::move(x), std::move(y));

  // scripted labels for every possible pool sample
  std::string dir = (std::filesystem::temp_directory_path() / "onto_al_test").string();
  ensure_dir(dir);
  std::string labels;
  for (int round = 1; round <= 2; ++round) {
    for (int i = 0; i < 150; ++i) {
      labels += "p" + std::to_string(i) + "\tpool-r" + std::to_string(round) + "\t" +
                std::to_string(i) + "\t1\t" + (i % 2 ? "CONCEPT" : "IRRELEVANT") + "\n";
    }
  }
  atomic_write(dir + "/labels.tsv", labels);
  FileLabelSource source(dir + "/labels.tsv");

  TrainingSet ts;
  ForestConfig config;
  ActiveLearnReport report =
      active_learning_rounds(ts, {1}, env, source, 2, config, 777);
  CHECK(report.rounds.size() == 2);
  CHECK(report.total_added > 0);
  // no duplicate keys
  std::set<std::string> keys;
  for (const LabeledSample& s : ts.samples) CHECK(keys.insert(s.key()).second);
  for (const LabeledSample& s : ts.samples) CHECK(s.source == "active-learning");
}

TEST_CASE("active learning errors on unlabeled selections in file mode") {
  auto [x, y] = conflicted_base(4242);
  VectorEnv env(std::move(x), std::move(y));
  std::string dir = (std::filesystem::temp_directory_path() / "onto_al_test2").string();
  ensure_dir(dir);
  atomic_write(dir + "/empty_labels.tsv", "");
  FileLabelSource source(dir + "/empty_labels.tsv");
  TrainingSet ts;
  ForestConfig config;
  CHECK_THROWS_WITH_AS(active_learning_rounds(ts, {1}, env, source, 1, config, 777),
                       doctest::Contains("no label provided"), std::runtime_error);
}

TEST_CASE("extraction file round trip") {
  std::vector<Extraction> ex = {
      {"v1", 0, 2, "fuel pump", true, "A", 0.91, 0.75},
      {"v1", 3, 1, "today", false, "", 0.12, 0.0},
  };
  std::string path = (std::filesystem::temp_directory_path() / "onto_ex_test.tsv").string();
  save_extractions(ex, path);
  auto back = load_extractions(path);
  REQUIRE(back.size() == 2);
  CHECK(back[0].is_concept);
  CHECK(back[0].type == "A");
  CHECK(back[0].p_stage1 == doctest::Approx(0.91));
  CHECK(!back[1].is_concept);
  CHECK(back[1].type.empty());
}

TEST_CASE("evaluate_extractions span matching") {
  std::vector<GoldEntry> gold = {
      {"v1", 0, 2, "fuel pump", "A"},
      {"v1", 3, 1, "stall", "B"},
      {"v2", 0, 1, "hidden", "A"},  // never emitted -> stage-1 FN
  };
  std::vector<Extraction> ex = {
      {"v1", 0, 2, "fuel pump", true, "A", 0.9, 0.8},    // TP, right type
      {"v1", 3, 1, "stall", true, "A", 0.8, 0.6},        // TP stage 1, wrong type
      {"v1", 5, 1, "noise", true, "B", 0.7, 0.5},        // FP
      {"v1", 6, 1, "quiet", false, "", 0.2, 0.0},        // TN
  };
  EvalReport report = evaluate_extractions(ex, gold, {"A", "B"}, {"hidden"});
  CHECK(report.stage1.tp == 2);
  CHECK(report.stage1.fp == 1);
  CHECK(report.stage1.fn == 1);
  // per-N counts partition the overall ones
  long long tp = 0;
  for (const auto& [n, m] : report.stage1_per_n) tp += m.tp;
  CHECK(tp == report.stage1.tp);
  // stage 2: type A has 1 TP ("fuel pump"), 1 FP (stall typed A);
  // type B has FN for stall and gold "hidden" counts as A-FN
  CHECK(report.stage2.per_class.at("A").tp == 1);
  CHECK(report.stage2.per_class.at("A").fp == 1);
  CHECK(report.stage2.per_class.at("B").fn == 1);
  // holdout: "hidden" was never recovered
  CHECK(report.holdout_total == 1);
  CHECK(report.holdout_recovered == 0);
  std::string tsv = report.to_tsv();
  CHECK(tsv.find("stage1-overall") != std::string::npos);
  CHECK(tsv.find("holdout-recovery") != std::string::npos);
}

TEST_CASE("model bundle round trip") {
  // minimal two-stage model over a toy feature space
  Rng rng(1);
  FeatureModels fm;
  fm.emb = EmbeddingTable(2, 0);
  fm.emb.add("alpha", {1, 0});
  fm.emb.add("beta", {0, 1});
  fm.poly = PolysemyModel(4, 1000);
  fm.poly.set("alpha", {{0.5, 0.5, 0, 0}});
  fm.tagger = std::make_shared<BaselineTagger>();
  fm.families = all_families();

  FeatureSchema schema = fm.schema_for(1);
  Matrix x(8, schema.width());
  std::vector<int> s1(8), s2(8);
  for (size_t i = 0; i < 8; ++i) {
    for (size_t j = 0; j < x.cols; ++j) x.at(i, j) = rng.real();
    s1[i] = static_cast<int>(i % 2);
    s2[i] = static_cast<int>(i % 3);
  }
  SampleFeatures sf;
  sf.x.emplace(1, x);
  sf.stage1_labels.emplace(1, s1);
  sf.stage2_labels.emplace(1, s2);
  TwoStageModel model = train_two_stage(sf, fm, {"A", "B", "C"}, ForestConfig{}, 42);
  model.lexicon_fingerprints["dictionary"] = "abc123";

  std::string dir = (std::filesystem::temp_directory_path() / "onto_bundle_test").string();
  save_bundle(dir, model, fm, {{"seed", "42"}});
  ModelBundle back = load_bundle(dir);
  CHECK(back.model.types == model.types);
  CHECK(back.model.stage1.size() == model.stage1.size());
  CHECK(back.model.stage1.at(1).serialize() == model.stage1.at(1).serialize());
  CHECK(back.model.stage2.at(1).serialize() == model.stage2.at(1).serialize());
  CHECK(back.model.schemas.at(1).fingerprint() == model.schemas.at(1).fingerprint());
  CHECK(back.model.lexicon_fingerprints.at("dictionary") == "abc123");
  CHECK(back.features.emb.lookup("alpha") == fm.emb.lookup("alpha"));
  CHECK(back.features.poly.has("alpha"));
  CHECK(back.manifest.at("seed") == "42");
}
