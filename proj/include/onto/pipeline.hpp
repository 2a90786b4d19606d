#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "onto/corpus.hpp"
#include "onto/evaluate.hpp"
#include "onto/features.hpp"
#include "onto/forest.hpp"
#include "onto/lexicon.hpp"
#include "onto/normalize.hpp"

namespace onto {

inline constexpr const char* kConceptLabel = "CONCEPT";
inline constexpr const char* kIrrelevantLabel = "IRRELEVANT";
inline constexpr int kMaxN = 4;
inline constexpr int kCommitteeSize = 8;

// Greedy leftmost-longest seed matching; matched tokens are consumed so
// subgrams and overlaps are never tagged.
std::vector<Span> tag_seed_concepts(const Verbatim& v, const SeedOntology& onto);

// 1-4 gram spans that do not overlap any concept span, contain no
// stop/noise word, and respect sentence boundaries.
std::vector<Span> collect_irrelevant(const Verbatim& v, const std::vector<Span>& concept_spans,
                                     const StopNoiseLists& stops);

// Inference candidates: same filter without the overlap rule.
std::vector<Span> generate_candidates(const Verbatim& v, const StopNoiseLists& stops);

struct LabeledSample {
  std::string verbatim_id;
  uint32_t start = 0;
  uint32_t n = 1;
  std::string phrase;
  std::string label;   // IRRELEVANT, CONCEPT (untyped), or a concept type
  std::string source;  // seed-ontology | manual | active-learning

  bool is_concept() const { return label != kIrrelevantLabel; }
  std::string key() const {
    return verbatim_id + "\t" + std::to_string(start) + "\t" + std::to_string(n);
  }
};

struct TrainingSet {
  std::vector<LabeledSample> samples;

  std::vector<const LabeledSample*> for_n(int n) const;
  std::vector<int> lengths_present() const;
  bool contains(const std::string& key) const;
  // false when the key was already present
  bool add(LabeledSample sample);

  void save(const std::string& path) const;
  static TrainingSet load(const std::string& path);

 private:
  std::unordered_set<std::string> keys_;
};

// Per-N balanced sets sampled from the seed tagging; concepts keep their
// seed type as the label.
TrainingSet build_training_set(const std::vector<Verbatim>& corpus, const SeedOntology& onto,
                               const StopNoiseLists& stops, long long per_n_quota, uint64_t seed);

struct FrequentPhrase {
  std::string phrase;
  long long term_freq = 0;
};

// Untagged phrases meeting the frequency bar, for manual labeling.
std::vector<FrequentPhrase> frequent_unlabeled(const CorpusStats& stats, const SeedOntology& onto,
                                               long long min_freq);
void save_label_requests(const std::vector<FrequentPhrase>& phrases, const std::string& path);

// Manual / active-learning label file: <phrase>\t<verbatim_id>\t<start>\t<n>\t<label>
std::vector<LabeledSample> load_label_file(const std::string& path, const std::string& source);

// Immutable feature models shared by training and inference.
struct FeatureModels {
  EmbeddingTable emb;
  PolysemyModel poly;
  std::shared_ptr<TagProvider> tagger;
  std::vector<Family> families = all_families();

  FeatureSchema schema_for(int n) const;
};

// Assembles features for samples grouped by verbatim (tags and seed
// spans computed once per verbatim).
struct SampleFeatures {
  std::map<int, Matrix> x;                       // per N
  std::map<int, std::vector<int>> stage1_labels; // 0 CONCEPT, 1 IRRELEVANT
  std::map<int, std::vector<int>> stage2_labels; // index into types, -1 for untyped/irrelevant
  std::map<int, std::vector<size_t>> sample_index;  // row -> index into input samples
};

SampleFeatures assemble_samples(const std::vector<LabeledSample>& samples,
                                const std::vector<Verbatim>& corpus, const Lexicons& lex,
                                const FeatureModels& models, int threads = 1);

struct TwoStageModel {
  std::map<int, ForestModel> stage1;
  std::map<int, ForestModel> stage2;
  std::map<int, FeatureSchema> schemas;
  std::vector<std::string> types;
  std::map<std::string, std::string> lexicon_fingerprints;
};

TwoStageModel train_two_stage(const SampleFeatures& features, const FeatureModels& models,
                              const std::vector<std::string>& types, const ForestConfig& config,
                              uint64_t seed, int threads = 1);

struct Extraction {
  std::string verbatim_id;
  uint32_t start = 0;
  uint32_t n = 1;
  std::string phrase;
  bool is_concept = false;
  std::string type;       // empty for irrelevant
  double p_stage1 = 0;    // P(CONCEPT)
  double p_stage2 = 0;    // probability of the chosen type
};

// Raw corpus in: normalization runs internally, candidates are scored by
// the per-N stage-1 forests, overlapping concept picks are resolved by
// highest probability (ties: longer span, then leftmost), and surviving
// concepts receive a stage-2 type.
std::vector<Extraction> infer(const std::vector<Verbatim>& raw_corpus, const TwoStageModel& model,
                              const FeatureModels& feature_models, const Lexicons& lex,
                              int threads = 1);

void save_extractions(const std::vector<Extraction>& extractions, const std::string& path);
std::vector<Extraction> load_extractions(const std::string& path);

struct Committee {
  std::vector<ForestModel> members;  // exactly 8, identical schemas
};

Committee train_committee(const Matrix& x, const std::vector<int>& stage1_labels,
                          const ForestConfig& config, uint64_t seed, int threads = 1);

// Indices of samples on which the committee splits exactly 4-4.
std::vector<size_t> committee_disagreements(const Committee& committee, const Matrix& x);

struct PoolSample {
  LabeledSample sample;  // label empty until assigned
  std::vector<double> features;
};

class LabelSource {
 public:
  virtual ~LabelSource() = default;
  // nullopt means the source cannot label this sample
  virtual std::optional<std::string> label_for(const PoolSample& sample) = 0;
};

class FileLabelSource : public LabelSource {
 public:
  explicit FileLabelSource(const std::string& path);
  std::optional<std::string> label_for(const PoolSample& sample) override;

 private:
  std::unordered_map<std::string, std::string> labels_;
};

struct ActiveLearnReport {
  struct Round {
    int round = 0;
    int n = 0;
    size_t pool_size = 0;
    size_t selected = 0;
    size_t added = 0;
  };
  std::vector<Round> rounds;
  size_t total_added = 0;
};

// Supplies per-N training matrices and unlabeled pools to the driver;
// implemented over a corpus by the CLI and over synthetic vectors in
// tests.
class ActiveLearnEnv {
 public:
  virtual ~ActiveLearnEnv() = default;
  virtual void trainset_matrix(int n, const TrainingSet& ts, Matrix& x,
                               std::vector<int>& stage1_labels) = 0;
  // already deduplicated against the training set
  virtual std::vector<PoolSample> pool(int round, int n, const TrainingSet& ts) = 0;
};

// Per round and length: train an 8-member committee on the current
// stage-1 samples, pull the exact 4-4 disagreements out of the pool,
// label them, and fold them back in before the next round retrains.
// Unlabelable selected samples abort with an error listing them.
ActiveLearnReport active_learning_rounds(TrainingSet& trainset, const std::vector<int>& lengths,
                                         ActiveLearnEnv& env, LabelSource& labels, int rounds,
                                         const ForestConfig& config, uint64_t seed,
                                         int threads = 1);

// ---- model bundle -------------------------------------------------------

struct ModelBundle {
  TwoStageModel model;
  FeatureModels features;
  std::map<std::string, std::string> manifest;
};

void save_bundle(const std::string& dir, const TwoStageModel& model, const FeatureModels& fm,
                 const std::map<std::string, std::string>& extra);
ModelBundle load_bundle(const std::string& dir);

// ---- span-level evaluation ----------------------------------------------

struct GoldEntry {
  std::string verbatim_id;
  uint32_t start = 0;
  uint32_t n = 1;
  std::string phrase;
  std::string type;
};

std::vector<GoldEntry> load_gold(const std::string& path);

struct EvalReport {
  Metrics stage1;
  std::map<int, Metrics> stage1_per_n;
  MacroMetrics stage2;
  size_t holdout_total = 0;
  size_t holdout_recovered = 0;

  std::string to_tsv() const;
};

// Matches extractions against gold spans by (verbatim, start, length).
// Gold spans with no emitted row count as stage-1 misses; stage-1 false
// positives count against stage 2 regardless of predicted type.
EvalReport evaluate_extractions(const std::vector<Extraction>& extractions,
                                const std::vector<GoldEntry>& gold,
                                const std::vector<std::string>& types,
                                const std::vector<std::string>& holdout_phrases = {});

}  // namespace onto
