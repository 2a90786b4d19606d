#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "onto/corpus.hpp"
#include "onto/embeddings.hpp"
#include "onto/lexicon.hpp"

namespace onto {

// Coarse 12-tag set plus the NONE sentinel used for padding.
enum class PosTag : uint8_t {
  NOUN, VERB, ADJ, ADV, PRON, DET, ADP, NUM, CONJ, PRT, X, PUNCT, NONE
};
constexpr int kPosTagCount = 13;  // one-hot width, NONE included

const char* pos_tag_name(PosTag t);
PosTag pos_tag_from_name(const std::string& name);
PosTag coarse_from_penn(const std::string& fine);

class TagProvider {
 public:
  virtual ~TagProvider() = default;
  virtual std::vector<PosTag> tag(const Verbatim& v) const = 0;
};

// Most-frequent-tag lexicon over common function words, then suffix
// rules: numeric -> NUM, -ed -> VERB, -ly -> ADV, default NOUN.
class BaselineTagger : public TagProvider {
 public:
  std::vector<PosTag> tag(const Verbatim& v) const override;
  static PosTag tag_word(const std::string& norm);
};

// Reads per-verbatim fine tags (<verbatim_id>\t<tag_1> <tag_2> ...) and
// maps them onto the coarse set.
class FileTagProvider : public TagProvider {
 public:
  explicit FileTagProvider(const std::string& path);
  std::vector<PosTag> tag(const Verbatim& v) const override;

 private:
  std::unordered_map<std::string, std::vector<PosTag>> tags_;
};

enum class Family : uint8_t {
  CollocatePos,
  Left3Pos,
  Right3Pos,
  LeftConceptPos,
  RightConceptPos,
  Word2vec,
  Context,
  Polysemy,
  Ontology,
};
constexpr int kFamilyCount = 9;

const char* family_name(Family f);
Family family_from_name(const std::string& name);
std::vector<Family> all_families();
std::vector<Family> families_from_csv(const std::string& csv);
std::string families_to_csv(const std::vector<Family>& fams);

struct Block {
  Family family;
  size_t offset;
  size_t width;
};

// Fixed per-N layout shared by trainer and scorer; the fingerprint ties
// a trained forest to the layout it was trained under.
struct FeatureSchema {
  int n = 1;
  int dim = 0;
  std::vector<Family> families;  // enabled, in canonical order

  size_t family_width(Family f) const;
  size_t width() const;
  std::vector<Block> blocks() const;
  bool enabled(Family f) const;
  FeatureSchema without(Family f) const;
  uint64_t fingerprint() const;
  std::string describe() const;
  static FeatureSchema parse(const std::string& line);
};

// Mean of up to 3 left-neighbor embeddings ++ mean of up to 3 right
// neighbors; sides with no neighbor are zero halves.
std::vector<double> context_feature(const Span& collocate, const Verbatim& v,
                                    const EmbeddingTable& emb);

// Element i is 1 when the i-th 1-gram is a constituent of any seed
// concept.
std::vector<double> ontology_feature(const Span& collocate, const Verbatim& v,
                                     const SeedOntology& onto);

struct KMeansResult {
  std::vector<std::vector<double>> centroids;
  std::vector<int> assignment;
  std::vector<double> sse_history;  // objective after each iteration
  int iterations = 0;
};

// Lloyd's algorithm with k-means++ seeding; stops when assignments are
// stable or after max_iters.
KMeansResult kmeans(const std::vector<std::vector<double>>& points, int k, uint64_t seed,
                    int max_iters = 100);

class PolysemyModel {
 public:
  PolysemyModel() = default;
  PolysemyModel(int dim, int sample_cap) : dim_(dim), sample_cap_(sample_cap) {}

  int dim() const { return dim_; }
  int sample_cap() const { return sample_cap_; }
  size_t size() const { return centroids_.size(); }
  bool has(const std::string& phrase) const { return centroids_.count(phrase) > 0; }

  void set(const std::string& phrase, std::vector<std::vector<double>> centroids);
  const std::vector<std::vector<double>>* centroids_for(const std::string& phrase) const;

  // Closest fitted centroid to this occurrence's context vector, or the
  // zero vector when the phrase was never fitted.
  std::vector<double> feature(const Span& collocate, const Verbatim& v,
                              const EmbeddingTable& emb) const;

  void save(const std::string& path) const;
  static PolysemyModel load(const std::string& path);

 private:
  int dim_ = 0;  // context-vector length, 2 * embedding dim
  int sample_cap_ = 1000;
  std::unordered_map<std::string, std::vector<std::vector<double>>> centroids_;
};

// Centroids for one phrase: sample up to sample_cap verbatims containing
// it, cluster their context vectors into sense_count_for(phrase) groups.
std::vector<std::vector<double>> fit_polysemy(const std::vector<Verbatim>& corpus,
                                              const EmbeddingTable& emb,
                                              const SenseLexicon& senses,
                                              const std::string& phrase, uint64_t seed,
                                              int sense_cap = 10, int sample_cap = 1000);

struct PolysemyFitOptions {
  int min_freq = 20;     // phrases below this get no model
  int sense_cap = 10;    // p_max
  int sample_cap = 1000;
  uint64_t seed = 42;
  int threads = 1;
};

PolysemyModel fit_polysemy_all(const std::vector<Verbatim>& corpus, const EmbeddingTable& emb,
                               const SenseLexicon& senses, const CorpusStats& stats,
                               const PolysemyFitOptions& opt);

// One-hot POS blocks for a collocate given the verbatim tag sequence and
// the seed concept spans.
void linguistic_features(const Span& collocate, const std::vector<PosTag>& tags,
                         const std::vector<Span>& concept_spans, const FeatureSchema& schema,
                         std::vector<double>& out);

std::vector<double> assemble(const Span& collocate, const Verbatim& v,
                             const std::vector<PosTag>& tags,
                             const std::vector<Span>& concept_spans, const EmbeddingTable& emb,
                             const PolysemyModel& poly, const SeedOntology& onto,
                             const FeatureSchema& schema);

}  // namespace onto
