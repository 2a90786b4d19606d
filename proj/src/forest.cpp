#include "onto/forest.hpp"

#include <algorithm>
#include <cmath>
#include <stack>
#include <stdexcept>

#include "onto/io_util.hpp"
#include "onto/parallel.hpp"

namespace onto {

namespace {

double gini(const std::vector<uint32_t>& counts, double total) {
  double g = 1.0;
  for (uint32_t c : counts) {
    double p = c / total;
    g -= p * p;
  }
  return g;
}

struct SplitChoice {
  bool found = false;
  int feature = -1;
  double threshold = 0;
  double impurity = 0;  // weighted child Gini
};

struct NodeTask {
  int32_t node;
  std::vector<size_t> samples;
};

}  // namespace

Tree train_tree(const Matrix& x, const std::vector<int>& labels,
                const std::vector<size_t>& sample_idx, size_t n_classes, int min_samples_split,
                int mtry, Rng& rng) {
  if (sample_idx.empty()) throw std::invalid_argument("train_tree: empty sample set");
  const size_t width = x.cols;

  Tree tree;
  std::vector<int> feat_pool(width);
  for (size_t i = 0; i < width; ++i) feat_pool[i] = static_cast<int>(i);
  std::vector<std::pair<double, int>> sorted;  // (value, label) within node

  std::stack<NodeTask> work;
  tree.nodes.emplace_back();
  work.push({0, sample_idx});

  while (!work.empty()) {
    NodeTask task = std::move(work.top());
    work.pop();
    std::vector<size_t>& samples = task.samples;

    std::vector<uint32_t> hist(n_classes, 0);
    for (size_t i : samples) ++hist[labels[i]];
    const double total = static_cast<double>(samples.size());
    const double node_gini = gini(hist, total);

    auto make_leaf = [&]() {
      TreeNode& node = tree.nodes[task.node];
      node.feature = -1;
      node.histogram = hist;
    };

    if (node_gini == 0.0 || samples.size() < static_cast<size_t>(min_samples_split)) {
      make_leaf();
      continue;
    }

    // sample the candidate features for this node
    int m = mtry;
    if (m <= 0 || m > static_cast<int>(width)) m = static_cast<int>(width);
    std::vector<int> candidates;
    if (m == static_cast<int>(width)) {
      candidates = feat_pool;
    } else {
      for (int i = 0; i < m; ++i) {
        size_t j = i + rng.index(width - i);
        std::swap(feat_pool[i], feat_pool[j]);
      }
      candidates.assign(feat_pool.begin(), feat_pool.begin() + m);
      std::sort(candidates.begin(), candidates.end());
    }

    SplitChoice best;
    std::vector<uint32_t> left_hist(n_classes);
    for (int f : candidates) {
      sorted.clear();
      for (size_t i : samples) sorted.emplace_back(x.at(i, f), labels[i]);
      std::sort(sorted.begin(), sorted.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      if (sorted.front().first == sorted.back().first) continue;  // constant feature
      std::fill(left_hist.begin(), left_hist.end(), 0u);
      for (size_t i = 0; i + 1 < sorted.size(); ++i) {
        ++left_hist[sorted[i].second];
        if (sorted[i].first == sorted[i + 1].first) continue;
        double nl = static_cast<double>(i + 1);
        double nr = total - nl;
        std::vector<uint32_t> right_hist(n_classes);
        for (size_t c = 0; c < n_classes; ++c) right_hist[c] = hist[c] - left_hist[c];
        double impurity = (nl * gini(left_hist, nl) + nr * gini(right_hist, nr)) / total;
        double threshold = sorted[i].first + (sorted[i + 1].first - sorted[i].first) / 2.0;
        if (!best.found || impurity < best.impurity ||
            (impurity == best.impurity &&
             (f < best.feature || (f == best.feature && threshold < best.threshold)))) {
          best = {true, f, threshold, impurity};
        }
      }
    }

    if (!best.found) {
      make_leaf();
      continue;
    }

    std::vector<size_t> left, right;
    for (size_t i : samples) {
      (x.at(i, best.feature) < best.threshold ? left : right).push_back(i);
    }
    if (left.empty() || right.empty()) {  // defensive; midpoints separate both sides
      make_leaf();
      continue;
    }

    int32_t left_id = static_cast<int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    int32_t right_id = static_cast<int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    TreeNode& node = tree.nodes[task.node];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = left_id;
    node.right = right_id;
    // right first so the left subtree is processed next (stable layout)
    work.push({right_id, std::move(right)});
    work.push({left_id, std::move(left)});
  }
  return tree;
}

ForestModel train_forest(const Matrix& x, const std::vector<int>& labels,
                         const std::vector<std::string>& classes, const ForestConfig& config,
                         uint64_t seed, uint64_t schema_hash, int threads) {
  if (x.rows == 0) throw std::invalid_argument("train_forest: empty sample set");
  if (labels.size() != x.rows) throw std::invalid_argument("train_forest: label count mismatch");
  if (config.n_trees < 1) throw std::invalid_argument("train_forest: n_trees must be >= 1");
  for (int l : labels) {
    if (l < 0 || static_cast<size_t>(l) >= classes.size()) {
      throw std::invalid_argument("train_forest: label index out of range");
    }
  }

  ForestModel model;
  model.config = config;
  model.classes = classes;
  model.width = x.cols;
  model.schema_hash = schema_hash;
  model.seed = seed;
  model.trees.resize(config.n_trees);

  int mtry = config.mtry;
  if (mtry == -1) mtry = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(x.cols))));

  std::vector<uint64_t> tree_seeds(config.n_trees);
  for (int t = 0; t < config.n_trees; ++t) tree_seeds[t] = derive_seed(seed, t + 1);

  parallel_for(static_cast<size_t>(config.n_trees), threads, [&](size_t t) {
    Rng rng(tree_seeds[t]);
    std::vector<size_t> idx;
    idx.reserve(x.rows);
    if (config.bootstrap) {
      for (size_t i = 0; i < x.rows; ++i) idx.push_back(rng.index(x.rows));
    } else {
      for (size_t i = 0; i < x.rows; ++i) idx.push_back(i);
    }
    model.trees[t] =
        train_tree(x, labels, idx, classes.size(), config.min_samples_split, mtry, rng);
  });
  return model;
}

std::vector<double> ForestModel::predict_proba(const double* x, size_t width_in) const {
  if (width_in != width) {
    throw std::invalid_argument("predict_proba: expected " + std::to_string(width) +
                                " features, got " + std::to_string(width_in));
  }
  std::vector<double> proba(classes.size(), 0.0);
  for (const Tree& tree : trees) {
    const TreeNode& leaf = tree.leaf_for(x);
    double total = 0;
    for (uint32_t c : leaf.histogram) total += c;
    for (size_t k = 0; k < classes.size(); ++k) proba[k] += leaf.histogram[k] / total;
  }
  for (double& p : proba) p /= static_cast<double>(trees.size());
  return proba;
}

std::vector<double> ForestModel::predict_proba(const std::vector<double>& x) const {
  return predict_proba(x.data(), x.size());
}

size_t ForestModel::predict_index(const std::vector<double>& x) const {
  std::vector<double> proba = predict_proba(x);
  size_t best = 0;
  for (size_t k = 1; k < proba.size(); ++k) {
    if (proba[k] > proba[best]) best = k;
  }
  return best;
}

const std::string& ForestModel::predict(const std::vector<double>& x) const {
  return classes[predict_index(x)];
}

std::string ForestModel::serialize() const {
  std::string out;
  out += "forest 1\n";
  out += "classes";
  for (const std::string& c : classes) out += " " + c;
  out += '\n';
  out += "n_trees " + std::to_string(config.n_trees) + "\n";
  out += "min_samples_split " + std::to_string(config.min_samples_split) + "\n";
  out += "bootstrap " + std::to_string(config.bootstrap ? 1 : 0) + "\n";
  out += "mtry " + std::to_string(config.mtry) + "\n";
  out += "width " + std::to_string(width) + "\n";
  out += "schema_hash " + to_hex(schema_hash) + "\n";
  out += "seed " + std::to_string(seed) + "\n";
  for (const Tree& tree : trees) {
    out += "tree " + std::to_string(tree.nodes.size()) + "\n";
    for (const TreeNode& n : tree.nodes) {
      if (n.feature >= 0) {
        out += "node " + std::to_string(n.feature) + " " + fmt_double(n.threshold) + " " +
               std::to_string(n.left) + " " + std::to_string(n.right) + "\n";
      } else {
        out += "leaf";
        for (uint32_t c : n.histogram) out += " " + std::to_string(c);
        out += '\n';
      }
    }
  }
  return out;
}

ForestModel ForestModel::deserialize(const std::string& text) {
  auto lines = split(text, '\n');
  size_t i = 0;
  auto next = [&]() -> std::string {
    while (i < lines.size() && trim(lines[i]).empty()) ++i;
    if (i >= lines.size()) throw std::runtime_error("forest: truncated model");
    return lines[i++];
  };
  if (next() != "forest 1") throw std::runtime_error("forest: bad magic");
  ForestModel m;
  auto classes_line = split_ws(next());
  if (classes_line.empty() || classes_line[0] != "classes" || classes_line.size() < 2) {
    throw std::runtime_error("forest: bad classes line");
  }
  m.classes.assign(classes_line.begin() + 1, classes_line.end());
  auto read_kv = [&](const std::string& key) {
    auto parts = split_ws(next());
    if (parts.size() != 2 || parts[0] != key) throw std::runtime_error("forest: expected " + key);
    return parts[1];
  };
  m.config.n_trees = static_cast<int>(parse_int(read_kv("n_trees"), "forest"));
  m.config.min_samples_split = static_cast<int>(parse_int(read_kv("min_samples_split"), "forest"));
  m.config.bootstrap = parse_int(read_kv("bootstrap"), "forest") != 0;
  m.config.mtry = static_cast<int>(parse_int(read_kv("mtry"), "forest"));
  m.width = static_cast<size_t>(parse_int(read_kv("width"), "forest"));
  m.schema_hash = std::stoull(read_kv("schema_hash"), nullptr, 16);
  m.seed = std::stoull(read_kv("seed"));
  for (int t = 0; t < m.config.n_trees; ++t) {
    auto header = split_ws(next());
    if (header.size() != 2 || header[0] != "tree") throw std::runtime_error("forest: expected tree");
    size_t count = static_cast<size_t>(parse_int(header[1], "forest"));
    Tree tree;
    tree.nodes.resize(count);
    for (size_t k = 0; k < count; ++k) {
      auto parts = split_ws(next());
      if (parts.empty()) throw std::runtime_error("forest: bad node line");
      if (parts[0] == "node") {
        if (parts.size() != 5) throw std::runtime_error("forest: bad node line");
        tree.nodes[k].feature = static_cast<int32_t>(parse_int(parts[1], "forest"));
        tree.nodes[k].threshold = parse_double(parts[2], "forest");
        tree.nodes[k].left = static_cast<int32_t>(parse_int(parts[3], "forest"));
        tree.nodes[k].right = static_cast<int32_t>(parse_int(parts[4], "forest"));
      } else if (parts[0] == "leaf") {
        if (parts.size() != m.classes.size() + 1) throw std::runtime_error("forest: bad leaf line");
        tree.nodes[k].feature = -1;
        for (size_t c = 1; c < parts.size(); ++c) {
          tree.nodes[k].histogram.push_back(
              static_cast<uint32_t>(parse_int(parts[c], "forest")));
        }
      } else {
        throw std::runtime_error("forest: bad node kind '" + parts[0] + "'");
      }
    }
    m.trees.push_back(std::move(tree));
  }
  return m;
}

void ForestModel::save(const std::string& path) const { atomic_write(path, serialize()); }

ForestModel ForestModel::load(const std::string& path) { return deserialize(read_file(path)); }

}  // namespace onto
