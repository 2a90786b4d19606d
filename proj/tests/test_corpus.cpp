#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "onto/corpus.hpp"
#include "onto/io_util.hpp"
#include "onto/rng.hpp"

using namespace onto;

namespace {

std::vector<std::string> norms(const Verbatim& v) {
  std::vector<std::string> out;
  for (const Token& t : v.tokens) out.push_back(t.norm);
  return out;
}

Verbatim vb(const std::string& text) { return make_verbatim("t", text); }

}  // namespace

TEST_CASE("tokenize basic rules") {
  CHECK(norms(vb("c/s service airbag light on.")) ==
        std::vector<std::string>{"c/s", "service", "airbag", "light", "on"});
  CHECK(norms(vb("")).empty());
  CHECK(norms(vb("  ENGINE   stall!! ")) == std::vector<std::string>{"engine", "stall"});
}

TEST_CASE("tokenize keeps numerics and internal joiners") {
  // a lone '&' strips to empty and drops
  CHECK(norms(vb("pulled codes 100 & 200")) ==
        std::vector<std::string>{"pulled", "codes", "100", "200"});
  CHECK(norms(vb("anti-lock a&b 300b")) == std::vector<std::string>{"anti-lock", "a&b", "300b"});
  CHECK(norms(vb("--x--")) == std::vector<std::string>{"x"});
}

TEST_CASE("tokenize records sentence boundaries") {
  Verbatim v = vb("light on. codes cleared; retest ok");
  CHECK(norms(v) == std::vector<std::string>{"light", "on", "codes", "cleared", "retest", "ok"});
  CHECK(v.break_before == std::vector<uint8_t>{0, 0, 1, 0, 1, 0});
  // attached punctuation splits the piece and still records the break
  Verbatim w = vb("ok.test");
  CHECK(norms(w) == std::vector<std::string>{"ok", "test"});
  CHECK(w.break_before == std::vector<uint8_t>{0, 1});
}

TEST_CASE("tokenize idempotent on normalized text") {
  Rng rng(7);
  std::vector<std::string> texts = {"c/s service airbag light on.", "ENGINE   stall!!",
                                    "a&b anti-lock 100. x; y", "fuel pump REPLACED..ok"};
  for (const std::string& t : texts) {
    Verbatim v = vb(t);
    std::string joined;
    for (size_t i = 0; i < v.tokens.size(); ++i) {
      if (i) joined += ' ';
      joined += v.tokens[i].norm;
    }
    CHECK(norms(vb(joined)) == norms(v));
  }
}

TEST_CASE("extract_ngrams enumeration") {
  Verbatim v = make_verbatim("t", "a b c");
  auto spans = extract_ngram_spans(v, 2);
  // a b c ab bc
  CHECK(spans.size() == 5);
  Verbatim single = make_verbatim("t", "a");
  CHECK(extract_ngram_spans(single, 4).size() == 1);
}

TEST_CASE("extract_ngrams respects sentence boundaries") {
  Verbatim v = make_verbatim("t", "a b. c");
  for (const Span& s : extract_ngram_spans(v, 2)) {
    bool covers_b_and_c = s.start <= 1 && s.start + s.n >= 3;
    CHECK(!covers_b_and_c);
  }
  // segment lengths 2 and 1: 2+1 unigrams + 1 bigram
  CHECK(extract_ngram_spans(v, 2).size() == 4);
}

TEST_CASE("extract_ngrams span count formula") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    // random corpus with boundary marks
    std::string text;
    int total = 2 + static_cast<int>(rng.below(12));
    for (int i = 0; i < total; ++i) {
      text += static_cast<char>('a' + rng.below(6));
      text += rng.real() < 0.2 ? ". " : " ";
    }
    Verbatim v = make_verbatim("t", text);
    int max_n = 1 + static_cast<int>(rng.below(4));
    // segment lengths from break markers
    std::vector<int> seg_lens;
    int cur = 0;
    for (size_t i = 0; i < v.size(); ++i) {
      if (v.break_before[i] && cur > 0) {
        seg_lens.push_back(cur);
        cur = 0;
      }
      ++cur;
    }
    if (cur > 0) seg_lens.push_back(cur);
    size_t expected = 0;
    for (int len : seg_lens) {
      for (int n = 1; n <= max_n; ++n) expected += static_cast<size_t>(std::max(0, len - n + 1));
    }
    CHECK(extract_ngram_spans(v, max_n).size() == expected);
  }
}

TEST_CASE("build_stats counts") {
  std::vector<Verbatim> corpus = {make_verbatim("a", "fuel pump ok"),
                                  make_verbatim("b", "fuel pump fuel pump"),
                                  make_verbatim("c", "other text")};
  CorpusStats st = build_stats_serial(corpus, 2);
  CHECK(st.total_docs == 3);
  CHECK(st.tf("fuel pump") == 3);
  CHECK(st.df("fuel pump") == 2);
  CHECK(st.tf("fuel") == 3);
  CHECK(st.df("fuel") == 2);
  for (const auto& [phrase, df] : st.doc_freq) {
    CHECK(df >= 1);
    CHECK(df <= st.total_docs);
    CHECK(df <= st.tf(phrase));
  }
}

TEST_CASE("build_stats additive over shards and parallel path matches") {
  Rng rng(3);
  std::vector<Verbatim> a, b;
  for (int i = 0; i < 40; ++i) {
    std::string text;
    for (int k = 0; k < 8; ++k) {
      text += static_cast<char>('a' + rng.below(5));
      text += ' ';
    }
    auto v = make_verbatim("v" + std::to_string(i), text);
    (i % 2 ? a : b).push_back(v);
  }
  std::vector<Verbatim> both = a;
  both.insert(both.end(), b.begin(), b.end());

  CorpusStats sa = build_stats_serial(a, 3);
  CorpusStats sb = build_stats_serial(b, 3);
  CorpusStats sboth = build_stats_serial(both, 3);
  CHECK(sboth.total_docs == sa.total_docs + sb.total_docs);
  for (const auto& [p, tf] : sboth.term_freq) {
    CHECK(tf == sa.tf(p) + sb.tf(p));
    CHECK(sboth.df(p) == sa.df(p) + sb.df(p));
  }

  CorpusStats par = build_stats_parallel(both, 3, 4);
  CHECK(par.total_docs == sboth.total_docs);
  CHECK(par.term_freq == sboth.term_freq);
  CHECK(par.doc_freq == sboth.doc_freq);
}

TEST_CASE("cooccurring_unigrams") {
  std::vector<Verbatim> corpus = {make_verbatim("1", "tps sensor fault")};
  auto got = cooccurring_unigrams(corpus, "tps");
  CHECK(got == std::unordered_set<std::string>{"sensor", "fault"});

  CHECK(cooccurring_unigrams(corpus, "absent").empty());

  std::vector<Verbatim> corpus2 = {make_verbatim("1", "a b"), make_verbatim("2", "a c")};
  CHECK(cooccurring_unigrams(corpus2, "a") == std::unordered_set<std::string>{"b", "c"});

  // multi-gram phrase containment and own-constituent exclusion
  std::vector<Verbatim> corpus3 = {make_verbatim("1", "fuel pump relay clicks")};
  CHECK(cooccurring_unigrams(corpus3, "fuel pump") ==
        std::unordered_set<std::string>{"relay", "clicks"});
}

TEST_CASE("corpus file round trip and synthesized ids") {
  std::string path = "test_corpus_io.tsv";
  atomic_write(path, "id1\tfuel pump ok\nno tab line here\n");
  auto corpus = load_corpus(path);
  REQUIRE(corpus.size() == 2);
  CHECK(corpus[0].id == "id1");
  CHECK(corpus[1].id == "line-2");
  CHECK(corpus[1].raw_text == "no tab line here");
}
