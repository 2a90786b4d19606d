#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace onto {

struct Token {
  std::string surface;  // original substring, case preserved
  std::string norm;     // lowercased, punctuation-stripped form
  uint32_t position = 0;
};

// A short text record plus its token stream. break_before[i] marks a
// sentence boundary (period/semicolon seen by the tokenizer) between
// tokens i-1 and i; break_before[0] is always 0.
struct Verbatim {
  std::string id;
  std::string raw_text;
  std::vector<Token> tokens;
  std::vector<uint8_t> break_before;

  size_t size() const { return tokens.size(); }
  bool boundary_free(uint32_t start, uint32_t n) const {
    for (uint32_t i = start + 1; i < start + n; ++i)
      if (break_before[i]) return false;
    return true;
  }
  std::string phrase(uint32_t start, uint32_t n) const;
  // Tokens joined with single spaces, segments joined with " . ".
  std::string normalized_text() const;
};

struct Collocate {
  std::string verbatim_id;
  uint32_t start = 0;
  uint32_t n = 1;
  std::string phrase;
};

// Lightweight span used in inner loops; verbatim known from context.
struct Span {
  uint32_t start = 0;
  uint32_t n = 1;
  bool operator==(const Span&) const = default;
};

struct CorpusStats {
  std::unordered_map<std::string, long long> term_freq;
  std::unordered_map<std::string, long long> doc_freq;
  long long total_docs = 0;

  long long tf(const std::string& phrase) const {
    auto it = term_freq.find(phrase);
    return it == term_freq.end() ? 0 : it->second;
  }
  long long df(const std::string& phrase) const {
    auto it = doc_freq.find(phrase);
    return it == doc_freq.end() ? 0 : it->second;
  }
};

struct Tokenized {
  std::vector<Token> tokens;
  std::vector<uint8_t> break_before;
};

// Splits on whitespace, then on punctuation other than '/', '-', '&'.
// Periods and semicolons record sentence boundaries. Empty pieces drop.
Tokenized tokenize(std::string_view raw_text);

Verbatim make_verbatim(std::string id, std::string raw_text);

// Every contiguous span of length 1..max_n that stays inside a sentence
// segment.
std::vector<Span> extract_ngram_spans(const Verbatim& v, int max_n);
std::vector<Collocate> extract_ngrams(const Verbatim& v, int max_n);

CorpusStats build_stats_serial(const std::vector<Verbatim>& corpus, int max_n);
CorpusStats build_stats_parallel(const std::vector<Verbatim>& corpus, int max_n, int threads);
CorpusStats build_stats(const std::vector<Verbatim>& corpus, int max_n, int threads = 1);

// Union over all verbatims containing `phrase` of their 1-gram norms,
// minus the phrase's own constituents. Window is the whole verbatim.
std::unordered_set<std::string> cooccurring_unigrams(const std::vector<Verbatim>& corpus,
                                                     const std::string& phrase);

// True if the phrase occurs as a boundary-free contiguous token run.
bool contains_phrase(const Verbatim& v, const std::vector<std::string>& phrase_tokens);

std::vector<Verbatim> load_corpus(const std::string& path);
void save_corpus(const std::vector<Verbatim>& corpus, const std::string& path);
void dump_stats(const CorpusStats& stats, const std::string& path);

}  // namespace onto
