#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "onto/rng.hpp"

namespace onto {

// Row-major sample matrix.
struct Matrix {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(size_t r, size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  double* row(size_t i) { return data.data() + i * cols; }
  const double* row(size_t i) const { return data.data() + i * cols; }
  double& at(size_t i, size_t j) { return data[i * cols + j]; }
  double at(size_t i, size_t j) const { return data[i * cols + j]; }
};

// Flattened tree. feature >= 0 -> internal node with threshold and two
// children; feature == -1 -> leaf owning a class-count histogram.
struct TreeNode {
  int32_t feature = -1;
  double threshold = 0.0;
  int32_t left = -1;
  int32_t right = -1;
  std::vector<uint32_t> histogram;  // leaves only
};

struct Tree {
  std::vector<TreeNode> nodes;

  const TreeNode& leaf_for(const double* x) const {
    size_t i = 0;
    while (nodes[i].feature >= 0) {
      i = (x[nodes[i].feature] < nodes[i].threshold) ? nodes[i].left : nodes[i].right;
    }
    return nodes[i];
  }
};

struct ForestConfig {
  int n_trees = 10;
  int min_samples_split = 2;
  bool bootstrap = true;
  // -1: ceil(sqrt(width)) per node; 0: all features (no subsampling)
  int mtry = -1;
};

struct ForestModel {
  ForestConfig config;
  std::vector<std::string> classes;
  size_t width = 0;
  uint64_t schema_hash = 0;
  uint64_t seed = 0;
  std::vector<Tree> trees;

  size_t n_classes() const { return classes.size(); }
  std::vector<double> predict_proba(const double* x, size_t width_in) const;
  std::vector<double> predict_proba(const std::vector<double>& x) const;
  size_t predict_index(const std::vector<double>& x) const;
  const std::string& predict(const std::vector<double>& x) const;

  std::string serialize() const;
  static ForestModel deserialize(const std::string& text);
  void save(const std::string& path) const;
  static ForestModel load(const std::string& path);
};

// Greedy Gini CART over mtry randomly chosen features per node. Splits
// whenever the node is impure, has >= min_samples_split samples, and any
// sampled feature is non-constant; threshold is the midpoint of adjacent
// sorted values, ties resolved to the lowest feature index then lowest
// threshold.
Tree train_tree(const Matrix& x, const std::vector<int>& labels,
                const std::vector<size_t>& sample_idx, size_t n_classes, int min_samples_split,
                int mtry, Rng& rng);

ForestModel train_forest(const Matrix& x, const std::vector<int>& labels,
                         const std::vector<std::string>& classes, const ForestConfig& config,
                         uint64_t seed, uint64_t schema_hash = 0, int threads = 1);

}  // namespace onto
