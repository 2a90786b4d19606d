#pragma once

#include <map>
#include <string>
#include <vector>

#include "onto/features.hpp"
#include "onto/forest.hpp"

namespace onto {

struct Metrics {
  long long tp = 0, fp = 0, fn = 0;
  double precision = 0, recall = 0, f1 = 0;

  static Metrics from_counts(long long tp, long long fp, long long fn);
};

// Binary scoring over aligned prediction/gold label pairs.
Metrics score_binary(const std::vector<std::string>& predictions,
                     const std::vector<std::string>& gold, const std::string& positive);

struct MacroMetrics {
  std::map<std::string, Metrics> per_class;
  Metrics macro;  // tp/fp/fn summed; P/R macro-averaged, F1 their harmonic mean
};

// Per-class counts with macro-averaged precision/recall. Predictions or
// gold labels outside `classes` contribute errors but no class row.
MacroMetrics score_macro(const std::vector<std::string>& predictions,
                         const std::vector<std::string>& gold,
                         const std::vector<std::string>& classes);

// Partition aligned pairs by collocate length and score each partition.
std::map<int, Metrics> score_per_n(const std::vector<std::string>& predictions,
                                   const std::vector<std::string>& gold,
                                   const std::vector<int>& lengths, const std::string& positive);

// Shared input for the ablation tools: features assembled once under the
// full schema; family removal drops that block's columns.
struct AblationData {
  Matrix x;
  std::vector<int> labels;
  std::vector<std::string> classes;
  FeatureSchema schema;
  std::vector<size_t> train_idx;
  std::vector<size_t> eval_idx;
  ForestConfig forest;
  uint64_t seed = 42;
  std::string positive;  // empty -> macro F1
  int threads = 1;
};

// Deterministic train/eval split of [0, n).
void make_split(size_t n, double train_fraction, uint64_t seed, std::vector<size_t>& train_idx,
                std::vector<size_t>& eval_idx);

double f1_with_families(const AblationData& data, const std::vector<Family>& families);

struct ImportanceEntry {
  Family family;
  double delta_f1;  // baseline - ablated
};

struct ImportanceReport {
  double baseline_f1 = 0;
  std::vector<ImportanceEntry> entries;  // sorted by delta desc, family asc
};

ImportanceReport drop_one_importance(const AblationData& data);

struct EliminationRound {
  double baseline_f1 = 0;
  std::vector<std::pair<Family, double>> candidates;  // f1 without that family
  bool removed = false;
  Family removed_family = Family::CollocatePos;
};

struct EliminationResult {
  std::vector<Family> kept;
  std::vector<EliminationRound> trace;
  double final_f1 = 0;
};

// Greedy removal of the family whose absence most improves F1; stops
// when no removal beats the current baseline by more than epsilon.
EliminationResult backward_elimination(const AblationData& data, double epsilon = 1e-6);

std::string importance_report_tsv(const ImportanceReport& report);
std::string elimination_trace_tsv(const EliminationResult& result);

}  // namespace onto
