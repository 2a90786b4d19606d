#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <set>

#include "onto/features.hpp"
#include "onto/io_util.hpp"
#include "onto/rng.hpp"

using namespace onto;

namespace {

EmbeddingTable table4() {
  EmbeddingTable t(2, 0);
  t.add("alpha", {1, 0});
  t.add("beta", {0, 1});
  t.add("gamma", {1, 1});
  t.add("delta", {2, 0});
  return t;
}

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

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0;
  for (size_t i = 0; i < a.size(); ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
  return d;
}

}  // namespace

TEST_CASE("baseline tagger rules") {
  Verbatim v = make_verbatim("t", "engine replaced 100 quickly flibbet the");
  BaselineTagger tagger;
  auto tags = tagger.tag(v);
  CHECK(tags[0] == PosTag::NOUN);   // default
  CHECK(tags[1] == PosTag::VERB);   // -ed suffix
  CHECK(tags[2] == PosTag::NUM);    // numeric
  CHECK(tags[3] == PosTag::ADV);    // -ly suffix
  CHECK(tags[4] == PosTag::NOUN);   // unknown default
  CHECK(tags[5] == PosTag::DET);    // lexicon
}

TEST_CASE("external tag provider maps fine tags and validates length") {
  std::string dir = (std::filesystem::temp_directory_path() / "onto_feat_test").string();
  ensure_dir(dir);
  atomic_write(dir + "/tags.tsv", "v1\tNNP VBD CD\nv2\tNN\n");
  FileTagProvider provider(dir + "/tags.tsv");
  Verbatim ok = make_verbatim("v1", "park lamp 100");
  auto tags = provider.tag(ok);
  CHECK(tags == std::vector<PosTag>{PosTag::NOUN, PosTag::VERB, PosTag::NUM});

  Verbatim bad = make_verbatim("v2", "two tokens");
  CHECK_THROWS_WITH_AS(provider.tag(bad), doctest::Contains("v2"), std::runtime_error);
  Verbatim missing = make_verbatim("vx", "one");
  CHECK_THROWS_AS(provider.tag(missing), std::runtime_error);
}

TEST_CASE("schema widths and fingerprint") {
  FeatureSchema s;
  s.n = 2;
  s.dim = 100;
  s.families = all_families();
  CHECK(s.width() == 632);
  FeatureSchema one;
  one.n = 1;
  one.dim = 4;
  one.families = {Family::Word2vec};
  CHECK(one.width() == 4);

  CHECK(s.fingerprint() != one.fingerprint());
  FeatureSchema parsed = FeatureSchema::parse(s.describe());
  CHECK(parsed.fingerprint() == s.fingerprint());
  CHECK(parsed.width() == s.width());

  FeatureSchema dropped = s.without(Family::Left3Pos);
  CHECK(dropped.width() == 632 - 39);
}

TEST_CASE("linguistic features edge padding and order") {
  // tokens [a, b, C, d]; collocate C at index 2
  Verbatim v = make_verbatim("t", "alpha beta gamma delta");
  BaselineTagger tagger;
  auto tags = tagger.tag(v);
  FeatureSchema s;
  s.n = 1;
  s.dim = 0;
  s.families = {Family::CollocatePos, Family::Left3Pos, Family::Right3Pos,
                Family::LeftConceptPos, Family::RightConceptPos};
  std::vector<double> out(s.width(), 0.0);
  linguistic_features({2, 1}, tags, {}, s, out);

  auto tag_at = [&](size_t block_offset, int slot) {
    for (int k = 0; k < kPosTagCount; ++k) {
      if (out[block_offset + static_cast<size_t>(slot) * kPosTagCount + k] == 1.0) {
        return static_cast<PosTag>(k);
      }
    }
    return PosTag::NONE;
  };
  // left3 block: positions -1, 0, 1 -> NONE, tag(a), tag(b)
  size_t left3 = kPosTagCount;  // after the collocate block
  CHECK(tag_at(left3, 0) == PosTag::NONE);
  CHECK(tag_at(left3, 1) == PosTag::NOUN);
  CHECK(tag_at(left3, 2) == PosTag::NOUN);
  // right3 block: tag(d), NONE, NONE
  size_t right3 = left3 + 3 * kPosTagCount;
  CHECK(tag_at(right3, 0) == PosTag::NOUN);
  CHECK(tag_at(right3, 1) == PosTag::NONE);
  CHECK(tag_at(right3, 2) == PosTag::NONE);
  // no concepts -> both concept blocks NONE
  size_t left_c = right3 + 3 * kPosTagCount;
  CHECK(tag_at(left_c, 0) == PosTag::NONE);
  CHECK(tag_at(left_c + kPosTagCount, 0) == PosTag::NONE);

  // collocate at verbatim start -> left3 all NONE
  std::vector<double> out2(s.width(), 0.0);
  linguistic_features({0, 1}, tags, {}, s, out2);
  for (int slot = 0; slot < 3; ++slot) {
    CHECK(out2[left3 + static_cast<size_t>(slot) * kPosTagCount +
               static_cast<int>(PosTag::NONE)] == 1.0);
  }
}

TEST_CASE("concept POS blocks pick the nearest non-overlapping span") {
  Verbatim v = make_verbatim("t", "replaced alpha beta gamma 100");
  BaselineTagger tagger;
  auto tags = tagger.tag(v);  // VERB NOUN NOUN NOUN NUM
  FeatureSchema s;
  s.n = 1;
  s.dim = 0;
  s.families = {Family::LeftConceptPos, Family::RightConceptPos};
  // concepts at [0,1) (VERB) and [4,1) (NUM); collocate at index 2
  std::vector<double> out(s.width(), 0.0);
  linguistic_features({2, 1}, tags, {{0, 1}, {4, 1}}, s, out);
  CHECK(out[static_cast<int>(PosTag::VERB)] == 1.0);
  CHECK(out[kPosTagCount + static_cast<int>(PosTag::NUM)] == 1.0);
}

TEST_CASE("context feature averages present neighbors") {
  EmbeddingTable t = table4();
  Verbatim v = make_verbatim("t", "alpha beta gamma delta unknown");
  // collocate = "gamma" at index 2: left = {alpha, beta}, right = {delta, unknown}
  std::vector<double> ctx = context_feature({2, 1}, v, t);
  REQUIRE(ctx.size() == 4);
  CHECK(ctx[0] == doctest::Approx(0.5));  // mean(alpha, beta) = (0.5, 0.5)
  CHECK(ctx[1] == doctest::Approx(0.5));
  // right: delta=(2,0) and unknown=(0,0) -> mean (1, 0)
  CHECK(ctx[2] == doctest::Approx(1.0));
  CHECK(ctx[3] == doctest::Approx(0.0));

  // collocate covering the whole verbatim -> zero vector
  Verbatim whole = make_verbatim("t", "alpha beta");
  std::vector<double> zero = context_feature({0, 2}, whole, t);
  CHECK(zero == std::vector<double>{0, 0, 0, 0});

  // three on each side -> plain 3-means
  Verbatim seven = make_verbatim("t", "alpha beta gamma delta alpha beta gamma");
  std::vector<double> c7 = context_feature({3, 1}, seven, t);
  CHECK(c7[0] == doctest::Approx((1.0 + 0.0 + 1.0) / 3));
  CHECK(c7[1] == doctest::Approx((0.0 + 1.0 + 1.0) / 3));
  CHECK(c7[2] == doctest::Approx((1.0 + 0.0 + 1.0) / 3));
  CHECK(c7[3] == doctest::Approx((0.0 + 1.0 + 1.0) / 3));
}

TEST_CASE("kmeans two-cluster fixture is exact") {
  std::vector<std::vector<double>> pts = {{0, 0}, {0, 1}, {10, 10}, {10, 11}};
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    KMeansResult res = kmeans(pts, 2, seed);
    REQUIRE(res.centroids.size() == 2);
    std::vector<std::vector<double>> got = res.centroids;
    std::sort(got.begin(), got.end());
    CHECK(got[0] == std::vector<double>{0.0, 0.5});
    CHECK(got[1] == std::vector<double>{10.0, 10.5});
  }
}

TEST_CASE("kmeans objective is non-increasing") {
  Rng rng(8);
  for (int run = 0; run < 100; ++run) {
    size_t n = 5 + rng.index(40);
    std::vector<std::vector<double>> pts(n, std::vector<double>(3));
    for (auto& p : pts) {
      for (double& x : p) x = rng.real() * 10;
    }
    int k = 1 + static_cast<int>(rng.below(5));
    KMeansResult res = kmeans(pts, k, derive_seed(99, run));
    for (size_t i = 1; i < res.sse_history.size(); ++i) {
      CHECK(res.sse_history[i] <= res.sse_history[i - 1] * (1 + 1e-12) + 1e-12);
    }
  }
}

TEST_CASE("kmeans k=1 yields the global mean, k=n yields zero SSE") {
  std::vector<std::vector<double>> pts = {{0, 0}, {2, 2}, {4, 0}};
  KMeansResult one = kmeans(pts, 1, 7);
  REQUIRE(one.centroids.size() == 1);
  CHECK(one.centroids[0][0] == doctest::Approx(2.0));
  CHECK(one.centroids[0][1] == doctest::Approx(2.0 / 3));

  KMeansResult full = kmeans(pts, 3, 7);
  CHECK(full.sse_history.back() == doctest::Approx(0.0));
  // k larger than distinct points clamps
  KMeansResult clamped = kmeans({{1, 1}, {1, 1}}, 5, 7);
  CHECK(clamped.centroids.size() == 1);
}

TEST_CASE("kmeans reproducible under fixed seed") {
  Rng rng(55);
  std::vector<std::vector<double>> pts(30, std::vector<double>(4));
  for (auto& p : pts) {
    for (double& x : p) x = rng.real();
  }
  KMeansResult a = kmeans(pts, 4, 123);
  KMeansResult b = kmeans(pts, 4, 123);
  CHECK(a.centroids == b.centroids);
  CHECK(a.assignment == b.assignment);
}

TEST_CASE("fit_polysemy and polysemy_feature") {
  EmbeddingTable t = table4();
  SenseLexicon senses;
  senses.sense_count["alpha"] = 2;

  // "alpha" appears in two context flavors: beta-heavy and delta-heavy
  std::vector<Verbatim> corpus;
  for (int i = 0; i < 10; ++i) {
    corpus.push_back(make_verbatim("b" + std::to_string(i), "beta beta alpha beta beta"));
    corpus.push_back(make_verbatim("d" + std::to_string(i), "delta delta alpha delta delta"));
  }
  auto centroids = fit_polysemy(corpus, t, senses, "alpha", 42);
  REQUIRE(centroids.size() == 2);

  PolysemyModel model(4, 1000);
  model.set("alpha", centroids);
  Verbatim probe = make_verbatim("p", "delta delta alpha delta delta");
  std::vector<double> feat = model.feature({2, 1}, probe, t);
  // nearest centroid must be one of the fitted centroids
  CHECK((feat == centroids[0] || feat == centroids[1]));
  // and specifically the closest one
  std::vector<double> probe_ctx = context_feature({2, 1}, probe, t);
  size_t nearer = sq_dist(probe_ctx, centroids[0]) <= sq_dist(probe_ctx, centroids[1]) ? 0 : 1;
  CHECK(feat == centroids[nearer]);

  // unseen phrase falls back to the zero vector
  CHECK(model.feature({0, 1}, probe, t) == std::vector<double>(4, 0.0));

  CHECK_THROWS_AS(fit_polysemy(corpus, t, senses, "absent", 42), std::invalid_argument);
}

TEST_CASE("fit_polysemy_all respects the frequency bar and parallel matches serial") {
  EmbeddingTable t = table4();
  SenseLexicon senses;
  std::vector<Verbatim> corpus;
  for (int i = 0; i < 25; ++i) {
    corpus.push_back(make_verbatim("a" + std::to_string(i), "alpha beta"));
  }
  corpus.push_back(make_verbatim("x", "gamma beta"));
  CorpusStats st = build_stats(corpus, 2);
  PolysemyFitOptions opt;
  opt.min_freq = 20;
  opt.seed = 5;
  PolysemyModel serial = fit_polysemy_all(corpus, t, senses, st, opt);
  CHECK(serial.has("alpha"));
  CHECK(serial.has("beta"));
  CHECK(serial.has("alpha beta"));
  CHECK(!serial.has("gamma"));

  opt.threads = 4;
  PolysemyModel parallel = fit_polysemy_all(corpus, t, senses, st, opt);
  Verbatim probe = make_verbatim("p", "alpha beta");
  CHECK(serial.feature({0, 1}, probe, t) == parallel.feature({0, 1}, probe, t));
}

TEST_CASE("polysemy model file round trip") {
  PolysemyModel m(4, 1000);
  m.set("alpha", {{0.25, -1.5, 3.0, 0.125}, {1, 2, 3, 4}});
  m.set("beta gamma", {{0.1, 0.2, 0.3, 0.4}});
  std::string path = (std::filesystem::temp_directory_path() / "onto_poly_test.txt").string();
  m.save(path);
  PolysemyModel back = PolysemyModel::load(path);
  CHECK(back.dim() == 4);
  CHECK(*back.centroids_for("alpha") == *m.centroids_for("alpha"));
  CHECK(*back.centroids_for("beta gamma") == *m.centroids_for("beta gamma"));
}

TEST_CASE("ontology feature marks seed constituents") {
  SeedOntology onto = onto_with({{"engine", "A"}, {"module", "A"}});
  Verbatim v = make_verbatim("t", "engine control module");
  CHECK(ontology_feature({0, 3}, v, onto) == std::vector<double>{1, 0, 1});
  SeedOntology empty;
  CHECK(ontology_feature({0, 3}, v, empty) == std::vector<double>{0, 0, 0});
  CHECK(ontology_feature({0, 1}, v, onto) == std::vector<double>{1});
}

TEST_CASE("assemble produces length-stable one-hot-correct vectors") {
  EmbeddingTable t = table4();
  PolysemyModel poly(4, 1000);
  SeedOntology onto = onto_with({{"alpha", "A"}});
  Verbatim v = make_verbatim("t", "alpha beta gamma delta");
  BaselineTagger tagger;
  auto tags = tagger.tag(v);
  auto spans = std::vector<Span>{{0, 1}};

  FeatureSchema s;
  s.n = 2;
  s.dim = 2;
  s.families = all_families();
  std::vector<double> x = assemble({1, 2}, v, tags, spans, t, poly, onto, s);
  CHECK(x.size() == s.width());

  // every one-hot block has exactly one 1
  for (const Block& b : s.blocks()) {
    bool one_hot_family =
        b.family == Family::CollocatePos || b.family == Family::Left3Pos ||
        b.family == Family::Right3Pos || b.family == Family::LeftConceptPos ||
        b.family == Family::RightConceptPos;
    if (!one_hot_family) continue;
    for (size_t off = b.offset; off < b.offset + b.width; off += kPosTagCount) {
      double sum = 0;
      for (int k = 0; k < kPosTagCount; ++k) sum += x[off + k];
      CHECK(sum == 1.0);
    }
  }

  // determinism
  CHECK(assemble({1, 2}, v, tags, spans, t, poly, onto, s) == x);
  // length mismatch
  CHECK_THROWS_AS(assemble({1, 3}, v, tags, spans, t, poly, onto, s), std::invalid_argument);

  // word2vec-only schema has width d
  FeatureSchema w2v;
  w2v.n = 1;
  w2v.dim = 2;
  w2v.families = {Family::Word2vec};
  CHECK(assemble({0, 1}, v, tags, spans, t, poly, onto, w2v).size() == 2);
}
