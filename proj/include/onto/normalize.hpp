#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "onto/corpus.hpp"
#include "onto/embeddings.hpp"
#include "onto/lexicon.hpp"

namespace onto {

// Co-occurrence context of one ambiguous abbreviation: the intersection
// vocabulary V of the co-occurrence sets of the abbreviation and all of
// its full forms, TF-IDF vectors over V, and document-frequency priors.
struct AbbreviationContext {
  std::string abbr;
  std::vector<std::string> full_forms;
  std::unordered_set<std::string> c_abbr;
  std::vector<std::unordered_set<std::string>> c_n;
  std::vector<std::string> v;  // intersection vocabulary, sorted
  std::vector<std::vector<double>> tfidf_ff;  // per full form, length |v|
  std::vector<double> tfidf_abbr;             // length |v|
  std::vector<double> priors;                 // add-one smoothed, sums to 1
};

struct Correction {
  std::string step;  // whitespace | runon | misspell | abbrev
  std::string before;
  std::string after;
};

struct CorrectionLog {
  std::string verbatim_id;
  std::vector<Correction> entries;
};

int levenshtein(const std::string& a, const std::string& b);

// Candidates are correct 1-grams at edit distance exactly 1. A single
// candidate wins outright; several are ranked by ln(freq) * cosine with
// ties broken lexicographically; none leaves the word unchanged.
std::string correct_misspelling(const std::string& word, const Lexicons& lex,
                                const CorpusStats& stats, const EmbeddingTable& emb);

// One or two 1-grams. Valid splits have both halves correct; several are
// ranked by max cosine against the fused word, ties to the earliest
// split point.
std::vector<std::string> split_runon(const std::string& word, const Lexicons& lex,
                                     const EmbeddingTable& emb);

// Merge only when both fragments are incorrect and the concatenation is
// correct.
std::optional<std::string> merge_whitespace(const std::string& left, const std::string& right,
                                            const Lexicons& lex);

AbbreviationContext build_abbrev_context(const std::string& abbr,
                                         const std::vector<std::string>& full_forms,
                                         const std::vector<Verbatim>& corpus,
                                         const CorpusStats& stats);

struct AbbrevDecision {
  size_t chosen = 0;                // index into full_forms
  std::vector<double> posterior;    // sums to 1
  bool likelihood_used = false;     // false -> prior-only fallback
};

// Log-space naive-Bayes posterior over full forms. Falls back to priors
// alone when V is empty or any full form has an all-zero TF-IDF row.
AbbrevDecision disambiguate_abbrev(const AbbreviationContext& ctx);

// Per-corpus normalizer: abbreviation contexts are built once, then
// verbatims normalize independently (safe to run in parallel).
class Normalizer {
 public:
  Normalizer(const Lexicons& lex, const CorpusStats& stats, const EmbeddingTable& emb);

  // Resolves every multi-form abbreviation that occurs in the corpus.
  void resolve_abbreviations(const std::vector<Verbatim>& corpus);

  std::pair<Verbatim, CorrectionLog> normalize(const Verbatim& v) const;

  const std::unordered_map<std::string, AbbrevDecision>& decisions() const { return decisions_; }
  const std::unordered_map<std::string, AbbreviationContext>& contexts() const { return contexts_; }

 private:
  const Lexicons& lex_;
  const CorpusStats& stats_;
  const EmbeddingTable& emb_;
  std::unordered_map<std::string, AbbrevDecision> decisions_;
  std::unordered_map<std::string, AbbreviationContext> contexts_;
};

struct NormalizeResult {
  std::vector<Verbatim> corpus;
  std::vector<CorrectionLog> logs;
};

NormalizeResult normalize_corpus(const std::vector<Verbatim>& corpus, const Lexicons& lex,
                                 const CorpusStats& stats, const EmbeddingTable& emb,
                                 int threads = 1);

void save_correction_logs(const std::vector<CorrectionLog>& logs, const std::string& path);

}  // namespace onto
