#pragma once

#include <map>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace onto {

struct Dictionary {
  std::unordered_set<std::string> entries;
};

struct SeedOntology {
  std::unordered_map<std::string, std::string> concepts;  // phrase -> type label
  std::vector<std::string> types;                         // order of first appearance
  // 1-gram constituents of every concept phrase, for the membership
  // feature and for is_correct.
  std::unordered_set<std::string> constituents;
  // tokenized phrases grouped by length, for longest-match tagging
  std::unordered_set<std::string> phrases;

  bool has_type(const std::string& t) const {
    for (const auto& x : types)
      if (x == t) return true;
    return false;
  }
};

struct AbbreviationDict {
  // abbreviation norm -> ordered full forms (each a space-joined phrase)
  std::unordered_map<std::string, std::vector<std::string>> expansions;
};

struct SenseLexicon {
  std::unordered_map<std::string, int> sense_count;  // lemma (or a_b_c join) -> p
};

struct StopNoiseLists {
  std::unordered_set<std::string> stop_words;
  std::unordered_set<std::string> noise_words;

  bool excluded(const std::string& norm) const {
    return stop_words.count(norm) || noise_words.count(norm);
  }
};

struct LexiconPaths {
  std::string dictionary;
  std::string ontology;
  std::string abbreviations;  // optional: empty -> none
  std::string senses;         // optional
  std::string stop_words;     // optional
  std::string noise_words;    // optional
};

struct Lexicons {
  Dictionary dict;
  SeedOntology onto;
  AbbreviationDict abbr;
  SenseLexicon senses;
  StopNoiseLists stops;
  std::map<std::string, std::string> fingerprints;  // file role -> hex hash

  // dictionary ∪ ontology constituents, precomputed for the hot path
  std::unordered_set<std::string> correct_unigrams;

  bool is_correct(const std::string& word) const { return correct_unigrams.count(word) > 0; }
  bool is_abbreviation(const std::string& word) const { return abbr.expansions.count(word) > 0; }
};

Lexicons load_lexicons(const LexiconPaths& paths);

bool is_correct(const std::string& word, const Dictionary& dict, const SeedOntology& onto);

// Sense count for a collocate: direct lookup for 1-grams, underscore-join
// lookup then max-over-constituents for multi-grams, 1 when unseen,
// clamped to [1, cap].
int sense_count_for(const std::string& phrase, const SenseLexicon& lex, int cap);

}  // namespace onto
