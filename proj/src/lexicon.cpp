#include "onto/lexicon.hpp"

#include <algorithm>
#include <stdexcept>

#include "onto/corpus.hpp"
#include "onto/io_util.hpp"
#include "onto/rng.hpp"

namespace onto {

namespace {

std::string loc(const std::string& file, size_t lineno) {
  return file + ":" + std::to_string(lineno);
}

// A lexicon entry must tokenize to exactly one token; returns its norm.
std::string single_token(const std::string& raw, const std::string& file, size_t lineno) {
  Tokenized t = tokenize(raw);
  if (t.tokens.size() != 1) {
    throw std::runtime_error(loc(file, lineno) + ": '" + raw + "' is not a single token");
  }
  return t.tokens[0].norm;
}

std::unordered_set<std::string> load_word_list(const std::string& path) {
  std::unordered_set<std::string> out;
  size_t lineno = 0;
  for (const std::string& line : read_lines(path)) {
    ++lineno;
    std::string w = trim(line);
    if (w.empty() || w[0] == '#') continue;
    out.insert(single_token(w, path, lineno));
  }
  return out;
}

}  // namespace

Lexicons load_lexicons(const LexiconPaths& paths) {
  Lexicons lex;

  lex.dict.entries = load_word_list(paths.dictionary);
  lex.fingerprints["dictionary"] = to_hex(file_fingerprint(paths.dictionary));

  size_t lineno = 0;
  for (const std::string& line : read_lines(paths.ontology)) {
    ++lineno;
    if (trim(line).empty() || line[0] == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() != 2 || trim(cols[0]).empty() || trim(cols[1]).empty()) {
      throw std::runtime_error(loc(paths.ontology, lineno) + ": expected <phrase>\\t<type>");
    }
    Tokenized t = tokenize(cols[0]);
    if (t.tokens.empty() || t.tokens.size() > 4) {
      throw std::runtime_error(loc(paths.ontology, lineno) + ": concept phrase '" + cols[0] +
                               "' must be 1-4 tokens");
    }
    std::vector<std::string> norms;
    for (const Token& tok : t.tokens) norms.push_back(tok.norm);
    std::string phrase = join(norms, " ");
    std::string type = trim(cols[1]);
    auto it = lex.onto.concepts.find(phrase);
    if (it != lex.onto.concepts.end()) {
      if (it->second != type) {
        throw std::runtime_error(loc(paths.ontology, lineno) + ": concept '" + phrase +
                                 "' mapped to both '" + it->second + "' and '" + type + "'");
      }
      continue;
    }
    lex.onto.concepts.emplace(phrase, type);
    lex.onto.phrases.insert(phrase);
    for (const std::string& w : norms) lex.onto.constituents.insert(w);
    if (!lex.onto.has_type(type)) lex.onto.types.push_back(type);
  }
  lex.fingerprints["ontology"] = to_hex(file_fingerprint(paths.ontology));

  if (!paths.abbreviations.empty()) {
    lineno = 0;
    for (const std::string& line : read_lines(paths.abbreviations)) {
      ++lineno;
      if (trim(line).empty() || line[0] == '#') continue;
      auto cols = split(line, '\t');
      if (cols.size() != 2 || trim(cols[1]).empty()) {
        throw std::runtime_error(loc(paths.abbreviations, lineno) +
                                 ": expected <abbr>\\t<ff_1>|<ff_2>|...");
      }
      std::string abbr = single_token(cols[0], paths.abbreviations, lineno);
      std::vector<std::string> forms;
      for (const std::string& raw_ff : split(cols[1], '|')) {
        Tokenized t = tokenize(raw_ff);
        if (t.tokens.empty()) {
          throw std::runtime_error(loc(paths.abbreviations, lineno) + ": empty full form");
        }
        std::vector<std::string> norms;
        for (const Token& tok : t.tokens) norms.push_back(tok.norm);
        std::string form = join(norms, " ");
        if (std::find(forms.begin(), forms.end(), form) != forms.end()) {
          throw std::runtime_error(loc(paths.abbreviations, lineno) + ": duplicate full form '" +
                                   form + "' for '" + abbr + "'");
        }
        forms.push_back(form);
      }
      lex.abbr.expansions[abbr] = std::move(forms);
    }
    lex.fingerprints["abbreviations"] = to_hex(file_fingerprint(paths.abbreviations));
  }

  if (!paths.senses.empty()) {
    lineno = 0;
    for (const std::string& line : read_lines(paths.senses)) {
      ++lineno;
      if (trim(line).empty() || line[0] == '#') continue;
      auto cols = split(line, '\t');
      if (cols.size() != 2) {
        throw std::runtime_error(loc(paths.senses, lineno) + ": expected <lemma>\\t<count>");
      }
      long long p = parse_int(cols[1], loc(paths.senses, lineno));
      if (p < 1) {
        throw std::runtime_error(loc(paths.senses, lineno) + ": sense count must be >= 1");
      }
      lex.senses.sense_count[lower(trim(cols[0]))] = static_cast<int>(p);
    }
    lex.fingerprints["senses"] = to_hex(file_fingerprint(paths.senses));
  }

  if (!paths.stop_words.empty()) {
    lex.stops.stop_words = load_word_list(paths.stop_words);
    lex.fingerprints["stop_words"] = to_hex(file_fingerprint(paths.stop_words));
  }
  if (!paths.noise_words.empty()) {
    lex.stops.noise_words = load_word_list(paths.noise_words);
    lex.fingerprints["noise_words"] = to_hex(file_fingerprint(paths.noise_words));
  }

  lex.correct_unigrams = lex.dict.entries;
  lex.correct_unigrams.insert(lex.onto.constituents.begin(), lex.onto.constituents.end());
  return lex;
}

bool is_correct(const std::string& word, const Dictionary& dict, const SeedOntology& onto) {
  return dict.entries.count(word) > 0 || onto.constituents.count(word) > 0;
}

int sense_count_for(const std::string& phrase, const SenseLexicon& lex, int cap) {
  if (cap < 1) throw std::invalid_argument("sense cap must be >= 1");
  auto clamp = [cap](int p) { return std::min(std::max(p, 1), cap); };
  auto parts = split(phrase, ' ');
  if (parts.size() == 1) {
    auto it = lex.sense_count.find(phrase);
    return clamp(it == lex.sense_count.end() ? 1 : it->second);
  }
  auto joined = lex.sense_count.find(join(parts, "_"));
  if (joined != lex.sense_count.end()) return clamp(joined->second);
  int best = 1;
  for (const std::string& w : parts) {
    auto it = lex.sense_count.find(w);
    if (it != lex.sense_count.end()) best = std::max(best, it->second);
  }
  return clamp(best);
}

}  // namespace onto
