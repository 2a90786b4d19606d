#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>

#include "onto/embeddings.hpp"
#include "onto/io_util.hpp"
#include "onto/rng.hpp"

using namespace onto;

namespace {

EmbeddingTable fixture_table() {
  EmbeddingTable t(3, 0);
  t.add("fuel", {1, 0, 0});
  t.add("pump", {0, 1, 0});
  t.add("relay", {0.5, 0.5, 0});
  return t;
}

// Identical context distributions for two target words: every sentence
// places one of them inside the same topic vocabulary.
std::vector<Verbatim> synthetic_contexts(uint64_t seed) {
  Rng rng(seed);
  std::vector<std::string> topic = {"thread", "torque", "washer", "socket"};
  std::vector<std::string> other_vocab;
  for (int i = 0; i < 20; ++i) other_vocab.push_back("w" + std::to_string(i));
  std::vector<Verbatim> corpus;
  for (int i = 0; i < 3000; ++i) {
    std::string text;
    if (i % 2 == 0) {
      text = topic[rng.index(4)] + " " + (rng.real() < 0.5 ? "bolt" : "screw") + " " +
             topic[rng.index(4)];
    } else {
      // unrelated sentences over their own vocabulary
      std::string a = other_vocab[rng.index(other_vocab.size())];
      std::string b = other_vocab[rng.index(other_vocab.size())];
      std::string c = other_vocab[rng.index(other_vocab.size())];
      text = a + " " + b + " " + c;
    }
    corpus.push_back(make_verbatim("s" + std::to_string(i), text));
  }
  return corpus;
}

}  // namespace

TEST_CASE("cosine") {
  CHECK(cosine({1, 0}, {0, 1}) == doctest::Approx(0.0));
  CHECK(cosine({1, 1}, {2, 2}) == doctest::Approx(1.0));
  CHECK(cosine({0, 0}, {3, 4}) == 0.0);
  CHECK_THROWS_AS(cosine({1, 0}, {1, 0, 0}), std::invalid_argument);
}

TEST_CASE("lookup is total") {
  EmbeddingTable t = fixture_table();
  CHECK(t.lookup("fuel") == std::vector<double>{1, 0, 0});
  CHECK(t.lookup("absent") == std::vector<double>{0, 0, 0});
  CHECK(t.find("absent") == nullptr);
}

TEST_CASE("average_embedding") {
  EmbeddingTable t = fixture_table();
  CHECK(t.average("fuel") == std::vector<double>{1, 0, 0});
  CHECK(t.average("fuel pump") == std::vector<double>{0.5, 0.5, 0});
  CHECK(t.average("zz yy") == std::vector<double>{0, 0, 0});
  // absent words count as zero vectors in the mean
  CHECK(t.average("fuel zz") == std::vector<double>{0.5, 0, 0});
  // permutation invariance of the mean
  CHECK(t.average("fuel pump relay") == t.average("relay fuel pump"));
}

TEST_CASE("min_count threshold and empty-vocabulary error") {
  std::vector<Verbatim> corpus;
  for (int i = 0; i < 6; ++i) corpus.push_back(make_verbatim(std::to_string(i), "common word"));
  corpus.push_back(make_verbatim("x", "rare"));
  SkipGramParams p;
  p.dim = 8;
  p.min_count = 5;
  p.epochs = 1;
  EmbeddingTable t = train_skipgram(corpus, p);
  CHECK(t.has("common"));
  CHECK(t.has("word"));
  CHECK(!t.has("rare"));

  SkipGramParams strict = p;
  strict.min_count = 100;
  CHECK_THROWS_AS(train_skipgram(corpus, strict), std::runtime_error);
}

TEST_CASE("trained vector cosine with itself is 1") {
  std::vector<Verbatim> corpus;
  for (int i = 0; i < 10; ++i) corpus.push_back(make_verbatim(std::to_string(i), "a b c a b"));
  SkipGramParams p;
  p.dim = 8;
  p.min_count = 1;
  p.epochs = 2;
  EmbeddingTable t = train_skipgram(corpus, p);
  for (const std::string& w : t.vocab()) {
    CHECK(cosine(t.lookup(w), t.lookup(w)) == doctest::Approx(1.0));
  }
}

TEST_CASE("fixed seed reproduces identical tables bit for bit") {
  std::vector<Verbatim> corpus = synthetic_contexts(5);
  corpus.resize(300);
  SkipGramParams p;
  p.dim = 16;
  p.min_count = 1;
  p.epochs = 2;
  p.seed = 99;
  EmbeddingTable a = train_skipgram(corpus, p);
  EmbeddingTable b = train_skipgram(corpus, p);
  REQUIRE(a.vocab() == b.vocab());
  for (const std::string& w : a.vocab()) {
    CHECK(a.lookup(w) == b.lookup(w));  // exact equality
  }
}

TEST_CASE("words with identical context distributions end up close") {
  std::vector<Verbatim> corpus = synthetic_contexts(17);
  SkipGramParams p;
  p.dim = 16;
  p.window = 2;
  p.epochs = 8;
  p.negative = 5;
  p.min_count = 2;
  p.seed = 4242;
  EmbeddingTable t = train_skipgram(corpus, p);
  REQUIRE(t.has("bolt"));
  REQUIRE(t.has("screw"));
  double pair_sim = cosine(t.lookup("bolt"), t.lookup("screw"));
  int beaten = 0, total = 0;
  for (const std::string& w : t.vocab()) {
    if (w == "bolt" || w == "screw") continue;
    ++total;
    if (pair_sim > cosine(t.lookup("bolt"), t.lookup(w))) ++beaten;
  }
  REQUIRE(total >= 20);
  CHECK(static_cast<double>(beaten) / total >= 0.95);
}

TEST_CASE("embedding file round trip") {
  EmbeddingTable t = fixture_table();
  std::string path =
      (std::filesystem::temp_directory_path() / "onto_emb_test.txt").string();
  t.save(path);
  EmbeddingTable back = EmbeddingTable::load(path);
  CHECK(back.dim() == 3);
  CHECK(back.size() == 3);
  CHECK(back.lookup("fuel") == t.lookup("fuel"));
  CHECK(back.lookup("relay") == t.lookup("relay"));
}
