#include "onto/evaluate.hpp"

#include <algorithm>
#include <stdexcept>

#include "onto/io_util.hpp"
#include "onto/parallel.hpp"

namespace onto {

Metrics Metrics::from_counts(long long tp, long long fp, long long fn) {
  Metrics m;
  m.tp = tp;
  m.fp = fp;
  m.fn = fn;
  m.precision = (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  m.recall = (tp + fn) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  m.f1 = (m.precision + m.recall) > 0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  return m;
}

Metrics score_binary(const std::vector<std::string>& predictions,
                     const std::vector<std::string>& gold, const std::string& positive) {
  if (predictions.empty() || predictions.size() != gold.size()) {
    throw std::invalid_argument("score: need non-empty aligned prediction/gold pairs");
  }
  long long tp = 0, fp = 0, fn = 0;
  for (size_t i = 0; i < predictions.size(); ++i) {
    bool p = predictions[i] == positive;
    bool g = gold[i] == positive;
    if (p && g) ++tp;
    else if (p && !g) ++fp;
    else if (!p && g) ++fn;
  }
  return Metrics::from_counts(tp, fp, fn);
}

MacroMetrics score_macro(const std::vector<std::string>& predictions,
                         const std::vector<std::string>& gold,
                         const std::vector<std::string>& classes) {
  if (predictions.empty() || predictions.size() != gold.size()) {
    throw std::invalid_argument("score: need non-empty aligned prediction/gold pairs");
  }
  MacroMetrics out;
  double psum = 0, rsum = 0;
  long long tp = 0, fp = 0, fn = 0;
  for (const std::string& c : classes) {
    Metrics m = score_binary(predictions, gold, c);
    psum += m.precision;
    rsum += m.recall;
    tp += m.tp;
    fp += m.fp;
    fn += m.fn;
    out.per_class.emplace(c, m);
  }
  out.macro.tp = tp;
  out.macro.fp = fp;
  out.macro.fn = fn;
  out.macro.precision = classes.empty() ? 0.0 : psum / static_cast<double>(classes.size());
  out.macro.recall = classes.empty() ? 0.0 : rsum / static_cast<double>(classes.size());
  out.macro.f1 = (out.macro.precision + out.macro.recall) > 0
                     ? 2.0 * out.macro.precision * out.macro.recall /
                           (out.macro.precision + out.macro.recall)
                     : 0.0;
  return out;
}

std::map<int, Metrics> score_per_n(const std::vector<std::string>& predictions,
                                   const std::vector<std::string>& gold,
                                   const std::vector<int>& lengths, const std::string& positive) {
  if (predictions.size() != gold.size() || predictions.size() != lengths.size()) {
    throw std::invalid_argument("score_per_n: misaligned inputs");
  }
  std::map<int, std::pair<std::vector<std::string>, std::vector<std::string>>> parts;
  for (size_t i = 0; i < predictions.size(); ++i) {
    parts[lengths[i]].first.push_back(predictions[i]);
    parts[lengths[i]].second.push_back(gold[i]);
  }
  std::map<int, Metrics> out;
  for (const auto& [n, pg] : parts) {
    out.emplace(n, score_binary(pg.first, pg.second, positive));
  }
  return out;
}

void make_split(size_t n, double train_fraction, uint64_t seed, std::vector<size_t>& train_idx,
                std::vector<size_t>& eval_idx) {
  if (n < 2) throw std::invalid_argument("make_split: need at least 2 samples");
  std::vector<size_t> idx(n);
  for (size_t i = 0; i < n; ++i) idx[i] = i;
  Rng rng(derive_seed(seed, "split"));
  rng.shuffle(idx);
  size_t cut = static_cast<size_t>(static_cast<double>(n) * train_fraction);
  cut = std::min(std::max<size_t>(cut, 1), n - 1);
  train_idx.assign(idx.begin(), idx.begin() + static_cast<long>(cut));
  eval_idx.assign(idx.begin() + static_cast<long>(cut), idx.end());
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(eval_idx.begin(), eval_idx.end());
}

namespace {

Matrix project_columns(const Matrix& x, const std::vector<size_t>& cols,
                       const std::vector<size_t>& rows) {
  Matrix out(rows.size(), cols.size());
  for (size_t r = 0; r < rows.size(); ++r) {
    const double* src = x.row(rows[r]);
    double* dst = out.row(r);
    for (size_t c = 0; c < cols.size(); ++c) dst[c] = src[cols[c]];
  }
  return out;
}

std::vector<size_t> columns_for(const FeatureSchema& schema, const std::vector<Family>& families) {
  std::vector<size_t> cols;
  for (const Block& b : schema.blocks()) {
    if (std::find(families.begin(), families.end(), b.family) == families.end()) continue;
    for (size_t i = 0; i < b.width; ++i) cols.push_back(b.offset + i);
  }
  return cols;
}

}  // namespace

double f1_with_families(const AblationData& data, const std::vector<Family>& families) {
  std::vector<size_t> cols = columns_for(data.schema, families);
  if (cols.empty()) throw std::invalid_argument("f1_with_families: no columns left");
  Matrix train_x = project_columns(data.x, cols, data.train_idx);
  Matrix eval_x = project_columns(data.x, cols, data.eval_idx);
  std::vector<int> train_y;
  for (size_t i : data.train_idx) train_y.push_back(data.labels[i]);

  ForestModel model = train_forest(train_x, train_y, data.classes, data.forest, data.seed, 0,
                                   data.threads);
  std::vector<std::string> preds(eval_x.rows), gold(eval_x.rows);
  for (size_t i = 0; i < eval_x.rows; ++i) {
    std::vector<double> proba = model.predict_proba(eval_x.row(i), eval_x.cols);
    size_t best = 0;
    for (size_t k = 1; k < proba.size(); ++k) {
      if (proba[k] > proba[best]) best = k;
    }
    preds[i] = data.classes[best];
    gold[i] = data.classes[data.labels[data.eval_idx[i]]];
  }
  if (!data.positive.empty()) return score_binary(preds, gold, data.positive).f1;
  return score_macro(preds, gold, data.classes).macro.f1;
}

ImportanceReport drop_one_importance(const AblationData& data) {
  if (data.schema.families.size() < 2) {
    throw std::invalid_argument("drop_one_importance: need at least 2 families");
  }
  ImportanceReport report;
  report.baseline_f1 = f1_with_families(data, data.schema.families);
  for (Family f : data.schema.families) {
    std::vector<Family> reduced;
    for (Family g : data.schema.families) {
      if (g != f) reduced.push_back(g);
    }
    double ablated = f1_with_families(data, reduced);
    report.entries.push_back({f, report.baseline_f1 - ablated});
  }
  std::sort(report.entries.begin(), report.entries.end(), [](const auto& a, const auto& b) {
    if (a.delta_f1 != b.delta_f1) return a.delta_f1 > b.delta_f1;
    return a.family < b.family;
  });
  return report;
}

EliminationResult backward_elimination(const AblationData& data, double epsilon) {
  if (data.schema.families.size() < 2) {
    throw std::invalid_argument("backward_elimination: need at least 2 families");
  }
  EliminationResult result;
  std::vector<Family> current = data.schema.families;
  double baseline = f1_with_families(data, current);

  while (current.size() > 1) {
    EliminationRound round;
    round.baseline_f1 = baseline;
    double best_f1 = baseline;
    Family best_family = current[0];
    bool improved = false;
    for (Family f : current) {
      std::vector<Family> reduced;
      for (Family g : current) {
        if (g != f) reduced.push_back(g);
      }
      double f1 = f1_with_families(data, reduced);
      round.candidates.emplace_back(f, f1);
      if (f1 > baseline + epsilon && (!improved || f1 > best_f1)) {
        best_f1 = f1;
        best_family = f;
        improved = true;
      }
    }
    if (!improved) {
      result.trace.push_back(std::move(round));
      break;
    }
    round.removed = true;
    round.removed_family = best_family;
    result.trace.push_back(std::move(round));
    current.erase(std::remove(current.begin(), current.end(), best_family), current.end());
    baseline = best_f1;
  }
  result.kept = current;
  result.final_f1 = baseline;
  return result;
}

std::string importance_report_tsv(const ImportanceReport& report) {
  std::string out = "# baseline_f1\t" + fmt_fixed(report.baseline_f1, 6) + "\n";
  for (const ImportanceEntry& e : report.entries) {
    out += family_name(e.family);
    out += '\t';
    out += fmt_fixed(e.delta_f1, 6);
    out += '\n';
  }
  return out;
}

std::string elimination_trace_tsv(const EliminationResult& result) {
  std::string out;
  for (size_t r = 0; r < result.trace.size(); ++r) {
    const EliminationRound& round = result.trace[r];
    for (const auto& [family, f1] : round.candidates) {
      out += std::to_string(r + 1);
      out += '\t';
      out += fmt_fixed(round.baseline_f1, 6);
      out += '\t';
      out += family_name(family);
      out += '\t';
      out += fmt_fixed(f1, 6);
      out += '\t';
      out += (round.removed && round.removed_family == family) ? "removed" : "-";
      out += '\n';
    }
  }
  std::vector<std::string> kept_names;
  for (Family f : result.kept) kept_names.emplace_back(family_name(f));
  out += "# kept\t" + join(kept_names, ",") + "\t" + fmt_fixed(result.final_f1, 6) + "\n";
  return out;
}

}  // namespace onto
