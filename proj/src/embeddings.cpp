#include "onto/embeddings.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>

#include "onto/io_util.hpp"
#include "onto/parallel.hpp"
#include "onto/rng.hpp"

namespace onto {

const double* EmbeddingTable::find(const std::string& word) const {
  auto it = index_.find(word);
  return it == index_.end() ? nullptr : vectors_[it->second].data();
}

std::vector<double> EmbeddingTable::lookup(const std::string& word) const {
  auto it = index_.find(word);
  if (it == index_.end()) return std::vector<double>(dim_, 0.0);
  return vectors_[it->second];
}

std::vector<double> EmbeddingTable::average(const std::string& phrase) const {
  std::vector<double> mean(dim_, 0.0);
  auto parts = split(phrase, ' ');
  if (parts.empty()) return mean;
  for (const std::string& w : parts) {
    if (const double* v = find(w)) {
      for (int i = 0; i < dim_; ++i) mean[i] += v[i];
    }
  }
  for (int i = 0; i < dim_; ++i) mean[i] /= static_cast<double>(parts.size());
  return mean;
}

void EmbeddingTable::add(const std::string& word, std::vector<double> vec) {
  if (static_cast<int>(vec.size()) != dim_) {
    throw std::invalid_argument("embedding dimension mismatch for '" + word + "'");
  }
  if (index_.count(word)) throw std::invalid_argument("duplicate embedding for '" + word + "'");
  index_.emplace(word, vocab_.size());
  vocab_.push_back(word);
  vectors_.push_back(std::move(vec));
}

void EmbeddingTable::save(const std::string& path) const {
  std::string out = std::to_string(vocab_.size()) + " " + std::to_string(dim_) + "\n";
  for (size_t i = 0; i < vocab_.size(); ++i) {
    out += vocab_[i];
    for (int j = 0; j < dim_; ++j) {
      out += ' ';
      out += fmt_double(vectors_[i][j]);
    }
    out += '\n';
  }
  atomic_write(path, out);
}

EmbeddingTable EmbeddingTable::load(const std::string& path) {
  auto lines = read_lines(path);
  if (lines.empty()) throw std::runtime_error(path + ": empty embedding file");
  auto header = split_ws(lines[0]);
  if (header.size() != 2) throw std::runtime_error(path + ": bad header");
  size_t vocab_size = static_cast<size_t>(parse_int(header[0], path + ":1"));
  int dim = static_cast<int>(parse_int(header[1], path + ":1"));
  EmbeddingTable table(dim, 0);
  for (size_t i = 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    auto cols = split_ws(lines[i]);
    if (cols.size() != static_cast<size_t>(dim) + 1) {
      throw std::runtime_error(path + ":" + std::to_string(i + 1) + ": expected word + " +
                               std::to_string(dim) + " floats");
    }
    std::vector<double> vec(dim);
    for (int j = 0; j < dim; ++j) {
      vec[j] = parse_double(cols[j + 1], path + ":" + std::to_string(i + 1));
    }
    table.add(cols[0], std::move(vec));
  }
  if (table.size() != vocab_size) {
    throw std::runtime_error(path + ": header claims " + std::to_string(vocab_size) +
                             " words, found " + std::to_string(table.size()));
  }
  return table;
}

double cosine(const std::vector<double>& u, const std::vector<double>& v) {
  if (u.size() != v.size()) throw std::invalid_argument("cosine: length mismatch");
  double dot = 0, nu = 0, nv = 0;
  for (size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return dot / (std::sqrt(nu) * std::sqrt(nv));
}

namespace {

struct SgnsState {
  int dim;
  std::vector<std::string> vocab;                 // by id, freq desc then lexicographic
  std::unordered_map<std::string, int> word_id;
  std::vector<long long> freq;
  std::vector<std::vector<int>> sentences;        // OOV tokens dropped
  std::vector<double> syn0, syn1;                 // vocab x dim
  std::vector<double> neg_cdf;                    // cumulative freq^0.75
};

int sample_negative(const SgnsState& st, Rng& rng) {
  double r = rng.real() * st.neg_cdf.back();
  auto it = std::upper_bound(st.neg_cdf.begin(), st.neg_cdf.end(), r);
  size_t i = static_cast<size_t>(it - st.neg_cdf.begin());
  if (i >= st.vocab.size()) i = st.vocab.size() - 1;
  return static_cast<int>(i);
}

void train_pair(SgnsState& st, int input, int target, int negative, double alpha, Rng& rng,
                std::vector<double>& grad) {
  double* in = st.syn0.data() + static_cast<size_t>(input) * st.dim;
  std::fill(grad.begin(), grad.end(), 0.0);
  for (int k = 0; k <= negative; ++k) {
    int out_word;
    double label;
    if (k == 0) {
      out_word = target;
      label = 1.0;
    } else {
      out_word = sample_negative(st, rng);
      if (out_word == target) continue;
      label = 0.0;
    }
    double* out = st.syn1.data() + static_cast<size_t>(out_word) * st.dim;
    double f = 0;
    for (int i = 0; i < st.dim; ++i) f += in[i] * out[i];
    double g;
    if (f > 6.0) {
      g = (label - 1.0) * alpha;
    } else if (f < -6.0) {
      g = label * alpha;
    } else {
      g = (label - 1.0 / (1.0 + std::exp(-f))) * alpha;
    }
    for (int i = 0; i < st.dim; ++i) grad[i] += g * out[i];
    for (int i = 0; i < st.dim; ++i) out[i] += g * in[i];
  }
  for (int i = 0; i < st.dim; ++i) in[i] += grad[i];
}

void train_range(SgnsState& st, const SkipGramParams& p, size_t lo, size_t hi, uint64_t seed,
                 std::atomic<long long>& processed, long long total_words) {
  Rng rng(seed);
  std::vector<double> grad(st.dim);
  long long local = 0;
  double alpha = p.alpha;
  for (int epoch = 0; epoch < p.epochs; ++epoch) {
    for (size_t s = lo; s < hi; ++s) {
      const std::vector<int>& sent = st.sentences[s];
      for (size_t pos = 0; pos < sent.size(); ++pos) {
        int h = 1 + static_cast<int>(rng.below(static_cast<uint64_t>(p.window)));
        for (int off = -h; off <= h; ++off) {
          if (off == 0) continue;
          long long ctx = static_cast<long long>(pos) + off;
          if (ctx < 0 || ctx >= static_cast<long long>(sent.size())) continue;
          train_pair(st, sent[ctx], sent[pos], p.negative, alpha, rng, grad);
        }
      }
      local += static_cast<long long>(sent.size());
      if (local >= 1000) {
        long long done = processed.fetch_add(local, std::memory_order_relaxed) + local;
        local = 0;
        alpha = std::max(p.alpha_min,
                         p.alpha * (1.0 - static_cast<double>(done) /
                                              static_cast<double>(total_words + 1)));
      }
    }
  }
  processed.fetch_add(local, std::memory_order_relaxed);
}

}  // namespace

EmbeddingTable train_skipgram(const std::vector<Verbatim>& corpus, const SkipGramParams& p) {
  if (corpus.empty()) throw std::invalid_argument("train_skipgram: empty corpus");

  std::unordered_map<std::string, long long> counts;
  for (const Verbatim& v : corpus) {
    for (const Token& t : v.tokens) ++counts[t.norm];
  }
  std::vector<std::pair<std::string, long long>> kept;
  for (const auto& [w, c] : counts) {
    if (c >= p.min_count) kept.emplace_back(w, c);
  }
  if (kept.empty()) throw std::runtime_error("train_skipgram: vocabulary empty after min_count threshold");
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  SgnsState st;
  st.dim = p.dim;
  for (const auto& [w, c] : kept) {
    st.word_id.emplace(w, static_cast<int>(st.vocab.size()));
    st.vocab.push_back(w);
    st.freq.push_back(c);
  }

  long long total_words = 0;
  st.sentences.reserve(corpus.size());
  for (const Verbatim& v : corpus) {
    std::vector<int> sent;
    sent.reserve(v.tokens.size());
    for (const Token& t : v.tokens) {
      auto it = st.word_id.find(t.norm);
      if (it != st.word_id.end()) sent.push_back(it->second);
    }
    total_words += static_cast<long long>(sent.size());
    st.sentences.push_back(std::move(sent));
  }
  total_words *= p.epochs;

  st.neg_cdf.resize(st.vocab.size());
  double acc = 0;
  for (size_t i = 0; i < st.vocab.size(); ++i) {
    acc += std::pow(static_cast<double>(st.freq[i]), 0.75);
    st.neg_cdf[i] = acc;
  }

  // init is always sequential so both execution modes start identically
  st.syn0.resize(st.vocab.size() * static_cast<size_t>(st.dim));
  st.syn1.assign(st.vocab.size() * static_cast<size_t>(st.dim), 0.0);
  Rng init_rng(derive_seed(p.seed, "sgns-init"));
  for (double& w : st.syn0) w = (init_rng.real() - 0.5) / st.dim;

  std::atomic<long long> processed{0};
  int threads = std::max(1, p.threads);
  if (threads == 1) {
    train_range(st, p, 0, st.sentences.size(), derive_seed(p.seed, "sgns-shard-0"), processed,
                total_words);
  } else {
    parallel_for(static_cast<size_t>(threads), threads, [&](size_t shard) {
      size_t lo = st.sentences.size() * shard / threads;
      size_t hi = st.sentences.size() * (shard + 1) / threads;
      train_range(st, p, lo, hi, derive_seed(p.seed, shard + 1), processed, total_words);
    });
  }

  EmbeddingTable table(p.dim, p.min_count);
  for (size_t i = 0; i < st.vocab.size(); ++i) {
    std::vector<double> vec(st.syn0.begin() + static_cast<long>(i) * st.dim,
                            st.syn0.begin() + static_cast<long>(i + 1) * st.dim);
    table.add(st.vocab[i], std::move(vec));
  }
  return table;
}

}  // namespace onto
