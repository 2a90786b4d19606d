#include "onto/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <stdexcept>

#include "onto/io_util.hpp"
#include "onto/parallel.hpp"

namespace onto {

namespace {

bool is_word_char(unsigned char c) {
  if (c >= 0x80) return true;  // keep multibyte UTF-8 sequences intact
  return std::isalnum(c) || c == '/' || c == '-' || c == '&';
}

bool is_sentence_punct(unsigned char c) { return c == '.' || c == ';'; }

std::string strip_edges(std::string_view run) {
  size_t b = 0, e = run.size();
  while (b < e && !std::isalnum(static_cast<unsigned char>(run[b])) && static_cast<unsigned char>(run[b]) < 0x80) ++b;
  while (e > b && !std::isalnum(static_cast<unsigned char>(run[e - 1])) && static_cast<unsigned char>(run[e - 1]) < 0x80) --e;
  return std::string(run.substr(b, e - b));
}

}  // namespace

Tokenized tokenize(std::string_view raw_text) {
  Tokenized out;
  bool pending_break = false;
  size_t i = 0;
  const size_t len = raw_text.size();
  while (i < len) {
    unsigned char c = static_cast<unsigned char>(raw_text[i]);
    if (!is_word_char(c)) {
      if (is_sentence_punct(c)) pending_break = true;
      ++i;
      continue;
    }
    size_t start = i;
    while (i < len && is_word_char(static_cast<unsigned char>(raw_text[i]))) ++i;
    std::string_view run = raw_text.substr(start, i - start);
    std::string surface = strip_edges(run);
    if (surface.empty()) continue;
    Token tok;
    tok.surface = surface;
    tok.norm = lower(surface);
    tok.position = static_cast<uint32_t>(out.tokens.size());
    out.break_before.push_back(static_cast<uint8_t>(pending_break && !out.tokens.empty()));
    out.tokens.push_back(std::move(tok));
    pending_break = false;
  }
  return out;
}

Verbatim make_verbatim(std::string id, std::string raw_text) {
  Verbatim v;
  v.id = std::move(id);
  v.raw_text = std::move(raw_text);
  Tokenized t = tokenize(v.raw_text);
  v.tokens = std::move(t.tokens);
  v.break_before = std::move(t.break_before);
  return v;
}

std::string Verbatim::phrase(uint32_t start, uint32_t n) const {
  std::string out;
  for (uint32_t i = start; i < start + n; ++i) {
    if (i > start) out += ' ';
    out += tokens[i].norm;
  }
  return out;
}

std::string Verbatim::normalized_text() const {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += break_before[i] ? " . " : " ";
    out += tokens[i].norm;
  }
  return out;
}

std::vector<Span> extract_ngram_spans(const Verbatim& v, int max_n) {
  if (max_n < 1 || max_n > 4) throw std::invalid_argument("max_n must be in [1,4]");
  std::vector<Span> spans;
  const uint32_t len = static_cast<uint32_t>(v.size());
  for (uint32_t start = 0; start < len; ++start) {
    for (uint32_t n = 1; n <= static_cast<uint32_t>(max_n) && start + n <= len; ++n) {
      if (n > 1 && v.break_before[start + n - 1]) break;
      spans.push_back({start, n});
    }
  }
  return spans;
}

std::vector<Collocate> extract_ngrams(const Verbatim& v, int max_n) {
  std::vector<Collocate> out;
  for (const Span& s : extract_ngram_spans(v, max_n)) {
    out.push_back({v.id, s.start, s.n, v.phrase(s.start, s.n)});
  }
  return out;
}

namespace {

void accumulate_stats(const Verbatim& v, int max_n, CorpusStats& st) {
  std::unordered_set<std::string> seen;
  for (const Span& s : extract_ngram_spans(v, max_n)) {
    std::string p = v.phrase(s.start, s.n);
    ++st.term_freq[p];
    if (seen.insert(p).second) ++st.doc_freq[p];
  }
  ++st.total_docs;
}

void merge_stats(CorpusStats& into, const CorpusStats& from) {
  for (const auto& [p, c] : from.term_freq) into.term_freq[p] += c;
  for (const auto& [p, c] : from.doc_freq) into.doc_freq[p] += c;
  into.total_docs += from.total_docs;
}

}  // namespace

CorpusStats build_stats_serial(const std::vector<Verbatim>& corpus, int max_n) {
  if (corpus.empty()) throw std::invalid_argument("build_stats: empty corpus");
  CorpusStats st;
  for (const Verbatim& v : corpus) accumulate_stats(v, max_n, st);
  return st;
}

CorpusStats build_stats_parallel(const std::vector<Verbatim>& corpus, int max_n, int threads) {
  if (corpus.empty()) throw std::invalid_argument("build_stats: empty corpus");
  if (threads < 1) threads = 1;
  const size_t shards = static_cast<size_t>(threads);
  std::vector<CorpusStats> partial(shards);
  parallel_for(shards, threads, [&](size_t shard) {
    const size_t lo = corpus.size() * shard / shards;
    const size_t hi = corpus.size() * (shard + 1) / shards;
    for (size_t i = lo; i < hi; ++i) accumulate_stats(corpus[i], max_n, partial[shard]);
  });
  CorpusStats st;
  for (const CorpusStats& p : partial) merge_stats(st, p);
  return st;
}

CorpusStats build_stats(const std::vector<Verbatim>& corpus, int max_n, int threads) {
  return threads > 1 ? build_stats_parallel(corpus, max_n, threads)
                     : build_stats_serial(corpus, max_n);
}

bool contains_phrase(const Verbatim& v, const std::vector<std::string>& phrase_tokens) {
  const size_t n = phrase_tokens.size();
  if (n == 0 || v.size() < n) return false;
  for (size_t start = 0; start + n <= v.size(); ++start) {
    bool ok = true;
    for (size_t j = 0; j < n; ++j) {
      if (j > 0 && v.break_before[start + j]) { ok = false; break; }
      if (v.tokens[start + j].norm != phrase_tokens[j]) { ok = false; break; }
    }
    if (ok) return true;
  }
  return false;
}

std::unordered_set<std::string> cooccurring_unigrams(const std::vector<Verbatim>& corpus,
                                                     const std::string& phrase) {
  std::vector<std::string> parts = split(phrase, ' ');
  std::unordered_set<std::string> own(parts.begin(), parts.end());
  std::unordered_set<std::string> out;
  for (const Verbatim& v : corpus) {
    if (!contains_phrase(v, parts)) continue;
    for (const Token& t : v.tokens) {
      if (!own.count(t.norm)) out.insert(t.norm);
    }
  }
  return out;
}

std::vector<Verbatim> load_corpus(const std::string& path) {
  std::vector<Verbatim> corpus;
  size_t lineno = 0;
  for (const std::string& line : read_lines(path)) {
    ++lineno;
    if (line.empty()) continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      corpus.push_back(make_verbatim("line-" + std::to_string(lineno), line));
    } else {
      corpus.push_back(make_verbatim(line.substr(0, tab), line.substr(tab + 1)));
    }
  }
  return corpus;
}

void save_corpus(const std::vector<Verbatim>& corpus, const std::string& path) {
  std::string out;
  for (const Verbatim& v : corpus) {
    out += v.id;
    out += '\t';
    out += v.raw_text;
    out += '\n';
  }
  atomic_write(path, out);
}

void dump_stats(const CorpusStats& stats, const std::string& path) {
  std::map<std::string, long long> sorted(stats.term_freq.begin(), stats.term_freq.end());
  std::string out;
  for (const auto& [phrase, tf] : sorted) {
    out += phrase;
    out += '\t';
    out += std::to_string(tf);
    out += '\t';
    out += std::to_string(stats.df(phrase));
    out += '\n';
  }
  atomic_write(path, out);
}

}  // namespace onto
