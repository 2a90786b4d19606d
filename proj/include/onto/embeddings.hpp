#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "onto/corpus.hpp"

namespace onto {

class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(int dim, int min_count) : dim_(dim), min_count_(min_count) {}

  int dim() const { return dim_; }
  int min_count() const { return min_count_; }
  size_t size() const { return vocab_.size(); }

  bool has(const std::string& word) const { return index_.count(word) > 0; }

  // Stored vector, or nullptr when absent.
  const double* find(const std::string& word) const;

  // Total lookup: zero vector when absent.
  std::vector<double> lookup(const std::string& word) const;

  // Arithmetic mean over constituent 1-grams; absent words contribute
  // zero vectors to the mean.
  std::vector<double> average(const std::string& phrase) const;

  void add(const std::string& word, std::vector<double> vec);
  const std::vector<std::string>& vocab() const { return vocab_; }

  void save(const std::string& path) const;
  static EmbeddingTable load(const std::string& path);

 private:
  int dim_ = 0;
  int min_count_ = 0;
  std::vector<std::string> vocab_;
  std::vector<std::vector<double>> vectors_;
  std::unordered_map<std::string, size_t> index_;
};

struct SkipGramParams {
  int dim = 100;
  int window = 5;
  int epochs = 5;
  int negative = 5;
  int min_count = 5;
  double alpha = 0.025;
  double alpha_min = 1e-4;
  uint64_t seed = 42;
  int threads = 1;  // > 1 uses asynchronous shard updates; determinism waived
};

// Skip-gram with negative sampling. With threads == 1 the result is
// bit-for-bit reproducible for a fixed seed.
EmbeddingTable train_skipgram(const std::vector<Verbatim>& corpus, const SkipGramParams& params);

// u.v / (|u||v|); 0 when either norm is 0; throws on length mismatch.
double cosine(const std::vector<double>& u, const std::vector<double>& v);

}  // namespace onto
