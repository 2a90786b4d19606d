#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace onto {

// Knobs for the synthetic verbatim generator that stands in for the
// proprietary corpora: type-pooled concept vocabulary, template grammar,
// per-verbatim noise rates, and the fraction of concept phrases withheld
// from the emitted seed ontology.
struct SynthSpec {
  int size = 10000;        // verbatims to emit
  int concepts = 300;      // distinct concept phrases across the three pools
  double holdout = 0.3;    // fraction of concept phrases absent from the seed ontology
  double misspell_rate = 0.05;
  double runon_rate = 0.05;
  double whitespace_rate = 0.05;
  double abbrev_rate = 0.05;      // per abbreviation-slot occurrence
  double noiseword_rate = 0.01;   // chance of an injected noise word
  double abbr_template_frac = 0.3;
  uint64_t seed = 42;
};

struct SynthSummary {
  int verbatims = 0;
  int gold_spans = 0;
  int held_out = 0;
  int abbrev_plants = 0;
  int misspell_plants = 0;
  int runon_plants = 0;
  int whitespace_plants = 0;
  std::map<std::string, std::string> files;  // role -> path
};

// Writes corpus.tsv (noisy), corpus_clean.tsv, gold.tsv, ontology.tsv,
// concepts_full.tsv, holdout.txt, dictionary.txt, stopwords.txt,
// noisewords.txt, abbreviations.tsv, senses.tsv, the planted-noise
// answer keys, and a config.txt pointing at all of them.
SynthSummary generate_synthetic(const SynthSpec& spec, const std::string& out_dir);

}  // namespace onto
