#include "onto/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "onto/io_util.hpp"
#include "onto/parallel.hpp"
#include "onto/rng.hpp"

namespace onto {

namespace {

const char* kPosNames[kPosTagCount] = {"NOUN", "VERB", "ADJ",  "ADV", "PRON", "DET", "ADP",
                                       "NUM",  "CONJ", "PRT",  "X",   "PUNCT", "NONE"};

const std::unordered_map<std::string, PosTag>& baseline_lexicon() {
  static const std::unordered_map<std::string, PosTag> lex = {
      {"the", PosTag::DET},    {"a", PosTag::DET},      {"an", PosTag::DET},
      {"this", PosTag::DET},   {"that", PosTag::DET},   {"these", PosTag::DET},
      {"those", PosTag::DET},  {"all", PosTag::DET},    {"some", PosTag::DET},
      {"no", PosTag::DET},     {"each", PosTag::DET},   {"both", PosTag::DET},
      {"i", PosTag::PRON},     {"you", PosTag::PRON},   {"he", PosTag::PRON},
      {"she", PosTag::PRON},   {"it", PosTag::PRON},    {"we", PosTag::PRON},
      {"they", PosTag::PRON},  {"them", PosTag::PRON},  {"his", PosTag::PRON},
      {"her", PosTag::PRON},   {"its", PosTag::PRON},   {"their", PosTag::PRON},
      {"is", PosTag::VERB},    {"are", PosTag::VERB},   {"was", PosTag::VERB},
      {"were", PosTag::VERB},  {"be", PosTag::VERB},    {"been", PosTag::VERB},
      {"being", PosTag::VERB}, {"has", PosTag::VERB},   {"have", PosTag::VERB},
      {"had", PosTag::VERB},   {"do", PosTag::VERB},    {"does", PosTag::VERB},
      {"did", PosTag::VERB},   {"will", PosTag::VERB},  {"would", PosTag::VERB},
      {"can", PosTag::VERB},   {"could", PosTag::VERB}, {"should", PosTag::VERB},
      {"may", PosTag::VERB},   {"might", PosTag::VERB}, {"must", PosTag::VERB},
      {"states", PosTag::VERB},{"found", PosTag::VERB}, {"says", PosTag::VERB},
      {"in", PosTag::ADP},     {"on", PosTag::ADP},     {"at", PosTag::ADP},
      {"of", PosTag::ADP},     {"for", PosTag::ADP},    {"with", PosTag::ADP},
      {"from", PosTag::ADP},   {"by", PosTag::ADP},     {"about", PosTag::ADP},
      {"into", PosTag::ADP},   {"over", PosTag::ADP},   {"under", PosTag::ADP},
      {"near", PosTag::ADP},   {"during", PosTag::ADP}, {"after", PosTag::ADP},
      {"before", PosTag::ADP}, {"between", PosTag::ADP},{"per", PosTag::ADP},
      {"and", PosTag::CONJ},   {"or", PosTag::CONJ},    {"but", PosTag::CONJ},
      {"nor", PosTag::CONJ},   {"so", PosTag::CONJ},    {"yet", PosTag::CONJ},
      {"not", PosTag::PRT},    {"to", PosTag::PRT},     {"off", PosTag::PRT},
      {"out", PosTag::PRT},    {"up", PosTag::PRT},     {"down", PosTag::PRT},
      {"very", PosTag::ADV},   {"too", PosTag::ADV},    {"now", PosTag::ADV},
      {"then", PosTag::ADV},   {"here", PosTag::ADV},   {"there", PosTag::ADV},
      {"also", PosTag::ADV},   {"only", PosTag::ADV},   {"again", PosTag::ADV},
      {"still", PosTag::ADV},  {"when", PosTag::ADV},   {"while", PosTag::ADV},
      {"one", PosTag::NUM},    {"two", PosTag::NUM},    {"three", PosTag::NUM},
      {"four", PosTag::NUM},   {"five", PosTag::NUM},   {"six", PosTag::NUM},
      {"seven", PosTag::NUM},  {"eight", PosTag::NUM},  {"nine", PosTag::NUM},
      {"ten", PosTag::NUM},
  };
  return lex;
}

bool all_digits(const std::string& s) {
  if (s.empty()) return false;
  for (unsigned char c : s)
    if (!std::isdigit(c)) return false;
  return true;
}

const char* kFamilyNames[kFamilyCount] = {
    "collocate_pos", "left3_pos",  "right3_pos", "left_concept_pos", "right_concept_pos",
    "word2vec",      "context",    "polysemy",   "ontology"};

}  // namespace

const char* pos_tag_name(PosTag t) { return kPosNames[static_cast<int>(t)]; }

PosTag pos_tag_from_name(const std::string& name) {
  for (int i = 0; i < kPosTagCount; ++i) {
    if (name == kPosNames[i]) return static_cast<PosTag>(i);
  }
  throw std::invalid_argument("unknown POS tag '" + name + "'");
}

PosTag coarse_from_penn(const std::string& fine) {
  if (fine.empty()) return PosTag::X;
  if (fine.rfind("NN", 0) == 0) return PosTag::NOUN;
  if (fine.rfind("VB", 0) == 0 || fine == "MD") return PosTag::VERB;
  if (fine.rfind("JJ", 0) == 0) return PosTag::ADJ;
  if (fine.rfind("RB", 0) == 0 || fine == "WRB") return PosTag::ADV;
  if (fine.rfind("PRP", 0) == 0 || fine == "WP" || fine == "WP$" || fine == "EX")
    return PosTag::PRON;
  if (fine == "DT" || fine == "WDT" || fine == "PDT") return PosTag::DET;
  if (fine == "IN") return PosTag::ADP;
  if (fine == "CD") return PosTag::NUM;
  if (fine == "CC") return PosTag::CONJ;
  if (fine == "RP" || fine == "TO" || fine == "POS") return PosTag::PRT;
  if (!std::isalpha(static_cast<unsigned char>(fine[0]))) return PosTag::PUNCT;
  return PosTag::X;
}

PosTag BaselineTagger::tag_word(const std::string& norm) {
  const auto& lex = baseline_lexicon();
  auto it = lex.find(norm);
  if (it != lex.end()) return it->second;
  if (all_digits(norm)) return PosTag::NUM;
  if (norm.size() > 2 && norm.compare(norm.size() - 2, 2, "ed") == 0) return PosTag::VERB;
  if (norm.size() > 2 && norm.compare(norm.size() - 2, 2, "ly") == 0) return PosTag::ADV;
  return PosTag::NOUN;
}

std::vector<PosTag> BaselineTagger::tag(const Verbatim& v) const {
  std::vector<PosTag> out;
  out.reserve(v.size());
  for (const Token& t : v.tokens) out.push_back(tag_word(t.norm));
  return out;
}

FileTagProvider::FileTagProvider(const std::string& path) {
  size_t lineno = 0;
  for (const std::string& line : read_lines(path)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto cols = split(line, '\t');
    if (cols.size() != 2) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected <verbatim_id>\\t<tags>");
    }
    std::vector<PosTag> tags;
    for (const std::string& t : split_ws(cols[1])) tags.push_back(coarse_from_penn(t));
    tags_.emplace(cols[0], std::move(tags));
  }
}

std::vector<PosTag> FileTagProvider::tag(const Verbatim& v) const {
  auto it = tags_.find(v.id);
  if (it == tags_.end()) {
    throw std::runtime_error("no external tags for verbatim '" + v.id + "'");
  }
  if (it->second.size() != v.size()) {
    throw std::runtime_error("tag count mismatch for verbatim '" + v.id + "': " +
                             std::to_string(it->second.size()) + " tags for " +
                             std::to_string(v.size()) + " tokens");
  }
  return it->second;
}

const char* family_name(Family f) { return kFamilyNames[static_cast<int>(f)]; }

Family family_from_name(const std::string& name) {
  for (int i = 0; i < kFamilyCount; ++i) {
    if (name == kFamilyNames[i]) return static_cast<Family>(i);
  }
  throw std::invalid_argument("unknown feature family '" + name + "'");
}

std::vector<Family> all_families() {
  std::vector<Family> out;
  for (int i = 0; i < kFamilyCount; ++i) out.push_back(static_cast<Family>(i));
  return out;
}

std::vector<Family> families_from_csv(const std::string& csv) {
  std::vector<Family> out;
  for (const std::string& part : split(csv, ',')) {
    std::string name = trim(part);
    if (name.empty()) continue;
    Family f = family_from_name(name);
    if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string families_to_csv(const std::vector<Family>& fams) {
  std::vector<std::string> names;
  for (Family f : fams) names.emplace_back(family_name(f));
  return join(names, ",");
}

size_t FeatureSchema::family_width(Family f) const {
  switch (f) {
    case Family::CollocatePos: return static_cast<size_t>(n) * kPosTagCount;
    case Family::Left3Pos: return 3 * kPosTagCount;
    case Family::Right3Pos: return 3 * kPosTagCount;
    case Family::LeftConceptPos: return kPosTagCount;
    case Family::RightConceptPos: return kPosTagCount;
    case Family::Word2vec: return static_cast<size_t>(dim);
    case Family::Context: return 2 * static_cast<size_t>(dim);
    case Family::Polysemy: return 2 * static_cast<size_t>(dim);
    case Family::Ontology: return static_cast<size_t>(n);
  }
  return 0;
}

size_t FeatureSchema::width() const {
  size_t w = 0;
  for (Family f : families) w += family_width(f);
  return w;
}

std::vector<Block> FeatureSchema::blocks() const {
  std::vector<Block> out;
  size_t off = 0;
  for (Family f : families) {
    size_t w = family_width(f);
    out.push_back({f, off, w});
    off += w;
  }
  return out;
}

bool FeatureSchema::enabled(Family f) const {
  return std::find(families.begin(), families.end(), f) != families.end();
}

FeatureSchema FeatureSchema::without(Family f) const {
  FeatureSchema s = *this;
  s.families.erase(std::remove(s.families.begin(), s.families.end(), f), s.families.end());
  return s;
}

std::string FeatureSchema::describe() const {
  return "schema v1 n=" + std::to_string(n) + " dim=" + std::to_string(dim) +
         " families=" + families_to_csv(families);
}

uint64_t FeatureSchema::fingerprint() const { return fnv1a(describe()); }

FeatureSchema FeatureSchema::parse(const std::string& line) {
  auto parts = split_ws(line);
  if (parts.size() != 5 || parts[0] != "schema" || parts[1] != "v1") {
    throw std::runtime_error("bad schema line: " + line);
  }
  FeatureSchema s;
  for (size_t i = 2; i < parts.size(); ++i) {
    auto kv = split(parts[i], '=');
    if (kv.size() != 2) throw std::runtime_error("bad schema field: " + parts[i]);
    if (kv[0] == "n") s.n = static_cast<int>(parse_int(kv[1], "schema n"));
    else if (kv[0] == "dim") s.dim = static_cast<int>(parse_int(kv[1], "schema dim"));
    else if (kv[0] == "families") s.families = families_from_csv(kv[1]);
    else throw std::runtime_error("bad schema field: " + parts[i]);
  }
  return s;
}

std::vector<double> context_feature(const Span& collocate, const Verbatim& v,
                                    const EmbeddingTable& emb) {
  const int d = emb.dim();
  std::vector<double> out(2 * static_cast<size_t>(d), 0.0);
  int left_count = 0;
  for (int k = 3; k >= 1; --k) {
    long long pos = static_cast<long long>(collocate.start) - k;
    if (pos < 0) continue;
    ++left_count;
    if (const double* vec = emb.find(v.tokens[pos].norm)) {
      for (int i = 0; i < d; ++i) out[i] += vec[i];
    }
  }
  if (left_count > 0) {
    for (int i = 0; i < d; ++i) out[i] /= left_count;
  }
  int right_count = 0;
  for (int k = 0; k < 3; ++k) {
    size_t pos = static_cast<size_t>(collocate.start) + collocate.n + k;
    if (pos >= v.size()) break;
    ++right_count;
    if (const double* vec = emb.find(v.tokens[pos].norm)) {
      for (int i = 0; i < d; ++i) out[d + i] += vec[i];
    }
  }
  if (right_count > 0) {
    for (int i = 0; i < d; ++i) out[d + i] /= right_count;
  }
  return out;
}

std::vector<double> ontology_feature(const Span& collocate, const Verbatim& v,
                                     const SeedOntology& onto) {
  std::vector<double> out(collocate.n, 0.0);
  for (uint32_t i = 0; i < collocate.n; ++i) {
    if (onto.constituents.count(v.tokens[collocate.start + i].norm)) out[i] = 1.0;
  }
  return out;
}

namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    double x = a[i] - b[i];
    d += x * x;
  }
  return d;
}

size_t distinct_count(const std::vector<std::vector<double>>& points) {
  std::vector<std::vector<double>> sorted = points;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  return sorted.size();
}

}  // namespace

KMeansResult kmeans(const std::vector<std::vector<double>>& points, int k, uint64_t seed,
                    int max_iters) {
  if (points.empty()) throw std::invalid_argument("kmeans: no points");
  k = std::max(1, std::min<int>(k, static_cast<int>(distinct_count(points))));
  const size_t n = points.size();
  const size_t dim = points[0].size();
  Rng rng(seed);

  KMeansResult res;
  // k-means++ seeding
  res.centroids.push_back(points[rng.index(n)]);
  std::vector<double> d2(n);
  while (static_cast<int>(res.centroids.size()) < k) {
    double total = 0;
    for (size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::max();
      for (const auto& c : res.centroids) best = std::min(best, sq_dist(points[i], c));
      d2[i] = best;
      total += best;
    }
    size_t pick = 0;
    if (total > 0) {
      double r = rng.real() * total;
      double acc = 0;
      for (size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc >= r) {
          pick = i;
          break;
        }
      }
      // numeric tail: fall back to the last point with positive d2
      if (d2[pick] == 0) {
        for (size_t i = n; i-- > 0;) {
          if (d2[i] > 0) {
            pick = i;
            break;
          }
        }
      }
    }
    res.centroids.push_back(points[pick]);
  }

  res.assignment.assign(n, -1);
  for (int iter = 0; iter < max_iters; ++iter) {
    bool changed = false;
    for (size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = sq_dist(points[i], res.centroids[0]);
      for (int c = 1; c < k; ++c) {
        double d = sq_dist(points[i], res.centroids[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (res.assignment[i] != best) {
        res.assignment[i] = best;
        changed = true;
      }
    }
    // empty clusters keep their previous centroid
    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    std::vector<size_t> counts(k, 0);
    for (size_t i = 0; i < n; ++i) {
      const auto& p = points[i];
      auto& s = sums[res.assignment[i]];
      for (size_t j = 0; j < dim; ++j) s[j] += p[j];
      ++counts[res.assignment[i]];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      for (size_t j = 0; j < dim; ++j) res.centroids[c][j] = sums[c][j] / counts[c];
    }
    double sse = 0;
    for (size_t i = 0; i < n; ++i) sse += sq_dist(points[i], res.centroids[res.assignment[i]]);
    res.sse_history.push_back(sse);
    res.iterations = iter + 1;
    if (!changed) break;
  }
  return res;
}

void PolysemyModel::set(const std::string& phrase, std::vector<std::vector<double>> centroids) {
  for (const auto& c : centroids) {
    if (static_cast<int>(c.size()) != dim_) {
      throw std::invalid_argument("polysemy centroid dimension mismatch for '" + phrase + "'");
    }
  }
  centroids_[phrase] = std::move(centroids);
}

const std::vector<std::vector<double>>* PolysemyModel::centroids_for(
    const std::string& phrase) const {
  auto it = centroids_.find(phrase);
  return it == centroids_.end() ? nullptr : &it->second;
}

std::vector<double> PolysemyModel::feature(const Span& collocate, const Verbatim& v,
                                           const EmbeddingTable& emb) const {
  std::string phrase = v.phrase(collocate.start, collocate.n);
  const auto* cents = centroids_for(phrase);
  if (!cents || cents->empty()) return std::vector<double>(dim_, 0.0);
  std::vector<double> ctx = context_feature(collocate, v, emb);
  size_t best = 0;
  double best_d = sq_dist(ctx, (*cents)[0]);
  for (size_t c = 1; c < cents->size(); ++c) {
    double d = sq_dist(ctx, (*cents)[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return (*cents)[best];
}

void PolysemyModel::save(const std::string& path) const {
  std::string out = "polysemy " + std::to_string(centroids_.size()) + " " +
                    std::to_string(dim_) + " " + std::to_string(sample_cap_) + "\n";
  std::map<std::string, const std::vector<std::vector<double>>*> sorted;
  for (const auto& [phrase, cents] : centroids_) sorted.emplace(phrase, &cents);
  for (const auto& [phrase, cents] : sorted) {
    out += phrase;
    out += '\t';
    out += std::to_string(cents->size());
    out += '\t';
    bool first = true;
    for (const auto& c : *cents) {
      for (double x : c) {
        if (!first) out += ' ';
        out += fmt_double(x);
        first = false;
      }
    }
    out += '\n';
  }
  atomic_write(path, out);
}

PolysemyModel PolysemyModel::load(const std::string& path) {
  auto lines = read_lines(path);
  if (lines.empty()) throw std::runtime_error(path + ": empty polysemy file");
  auto header = split_ws(lines[0]);
  if (header.size() != 4 || header[0] != "polysemy") {
    throw std::runtime_error(path + ": bad polysemy header");
  }
  int dim = static_cast<int>(parse_int(header[2], path));
  int cap = static_cast<int>(parse_int(header[3], path));
  PolysemyModel model(dim, cap);
  for (size_t i = 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    auto cols = split(lines[i], '\t');
    if (cols.size() != 3) {
      throw std::runtime_error(path + ":" + std::to_string(i + 1) + ": bad polysemy record");
    }
    int p = static_cast<int>(parse_int(cols[1], path));
    auto vals = split_ws(cols[2]);
    if (vals.size() != static_cast<size_t>(p) * dim) {
      throw std::runtime_error(path + ":" + std::to_string(i + 1) + ": expected " +
                               std::to_string(p * dim) + " floats");
    }
    std::vector<std::vector<double>> cents(p, std::vector<double>(dim));
    for (int c = 0; c < p; ++c) {
      for (int j = 0; j < dim; ++j) {
        cents[c][j] = parse_double(vals[static_cast<size_t>(c) * dim + j], path);
      }
    }
    model.set(cols[0], std::move(cents));
  }
  return model;
}

std::vector<std::vector<double>> fit_polysemy(const std::vector<Verbatim>& corpus,
                                              const EmbeddingTable& emb,
                                              const SenseLexicon& senses,
                                              const std::string& phrase, uint64_t seed,
                                              int sense_cap, int sample_cap) {
  std::vector<std::string> parts = split(phrase, ' ');
  // first occurrence per containing verbatim
  std::vector<std::pair<size_t, uint32_t>> occurrences;
  for (size_t vi = 0; vi < corpus.size(); ++vi) {
    const Verbatim& v = corpus[vi];
    if (v.size() < parts.size()) continue;
    for (size_t start = 0; start + parts.size() <= v.size(); ++start) {
      bool ok = true;
      for (size_t j = 0; j < parts.size(); ++j) {
        if ((j > 0 && v.break_before[start + j]) || v.tokens[start + j].norm != parts[j]) {
          ok = false;
          break;
        }
      }
      if (ok) {
        occurrences.emplace_back(vi, static_cast<uint32_t>(start));
        break;
      }
    }
  }
  if (occurrences.empty()) {
    throw std::invalid_argument("fit_polysemy: '" + phrase + "' does not occur in corpus");
  }

  Rng rng(derive_seed(seed, phrase));
  std::vector<size_t> chosen =
      sample_without_replacement(occurrences.size(), static_cast<size_t>(sample_cap), rng);

  std::vector<std::vector<double>> vectors;
  vectors.reserve(chosen.size());
  for (size_t idx : chosen) {
    auto [vi, start] = occurrences[idx];
    Span span{start, static_cast<uint32_t>(parts.size())};
    vectors.push_back(context_feature(span, corpus[vi], emb));
  }

  int k = sense_count_for(phrase, senses, sense_cap);
  return kmeans(vectors, k, derive_seed(seed, fnv1a(phrase) ^ 0x5eedull)).centroids;
}

PolysemyModel fit_polysemy_all(const std::vector<Verbatim>& corpus, const EmbeddingTable& emb,
                               const SenseLexicon& senses, const CorpusStats& stats,
                               const PolysemyFitOptions& opt) {
  std::vector<std::string> phrases;
  for (const auto& [phrase, tf] : stats.term_freq) {
    if (tf >= opt.min_freq) phrases.push_back(phrase);
  }
  std::sort(phrases.begin(), phrases.end());

  // occurrence lists for all eligible phrases in one corpus pass
  std::unordered_map<std::string, std::vector<std::pair<size_t, uint32_t>>> occ;
  occ.reserve(phrases.size() * 2);
  for (const std::string& p : phrases) occ.emplace(p, std::vector<std::pair<size_t, uint32_t>>{});
  for (size_t vi = 0; vi < corpus.size(); ++vi) {
    const Verbatim& v = corpus[vi];
    std::unordered_set<std::string> seen;
    for (const Span& s : extract_ngram_spans(v, 4)) {
      std::string p = v.phrase(s.start, s.n);
      auto it = occ.find(p);
      if (it == occ.end()) continue;
      if (seen.insert(p).second) it->second.emplace_back(vi, s.start);
    }
  }

  PolysemyModel model(2 * emb.dim(), opt.sample_cap);
  std::vector<std::vector<std::vector<double>>> fitted(phrases.size());
  parallel_for(phrases.size(), opt.threads, [&](size_t i) {
    const std::string& phrase = phrases[i];
    const auto& occurrences = occ[phrase];
    if (occurrences.empty()) return;
    Rng rng(derive_seed(opt.seed, phrase));
    std::vector<size_t> chosen = sample_without_replacement(
        occurrences.size(), static_cast<size_t>(opt.sample_cap), rng);
    std::vector<std::vector<double>> vectors;
    vectors.reserve(chosen.size());
    for (size_t idx : chosen) {
      auto [vi, start] = occurrences[idx];
      uint32_t n = static_cast<uint32_t>(std::count(phrase.begin(), phrase.end(), ' ') + 1);
      vectors.push_back(context_feature({start, n}, corpus[vi], emb));
    }
    int k = sense_count_for(phrase, senses, opt.sense_cap);
    fitted[i] = kmeans(vectors, k, derive_seed(opt.seed, fnv1a(phrase) ^ 0x5eedull)).centroids;
  });
  for (size_t i = 0; i < phrases.size(); ++i) {
    if (!fitted[i].empty()) model.set(phrases[i], std::move(fitted[i]));
  }
  return model;
}

namespace {

void one_hot(std::vector<double>& out, size_t offset, PosTag tag) {
  out[offset + static_cast<size_t>(tag)] = 1.0;
}

}  // namespace

void linguistic_features(const Span& collocate, const std::vector<PosTag>& tags,
                         const std::vector<Span>& concept_spans, const FeatureSchema& schema,
                         std::vector<double>& out) {
  const long long start = collocate.start;
  const long long end = collocate.start + collocate.n;  // one past
  for (const Block& b : schema.blocks()) {
    switch (b.family) {
      case Family::CollocatePos:
        for (uint32_t i = 0; i < collocate.n; ++i) {
          one_hot(out, b.offset + static_cast<size_t>(i) * kPosTagCount,
                  tags[collocate.start + i]);
        }
        break;
      case Family::Left3Pos:
        for (int k = 0; k < 3; ++k) {
          long long pos = start - 3 + k;
          PosTag t = (pos >= 0) ? tags[pos] : PosTag::NONE;
          one_hot(out, b.offset + static_cast<size_t>(k) * kPosTagCount, t);
        }
        break;
      case Family::Right3Pos:
        for (int k = 0; k < 3; ++k) {
          long long pos = end + k;
          PosTag t = (pos < static_cast<long long>(tags.size())) ? tags[pos] : PosTag::NONE;
          one_hot(out, b.offset + static_cast<size_t>(k) * kPosTagCount, t);
        }
        break;
      case Family::LeftConceptPos: {
        PosTag t = PosTag::NONE;
        long long best_end = -1;
        for (const Span& s : concept_spans) {
          long long s_end = static_cast<long long>(s.start) + s.n;
          if (s_end <= start && s_end > best_end) {
            best_end = s_end;
            t = tags[s.start];
          }
        }
        one_hot(out, b.offset, t);
        break;
      }
      case Family::RightConceptPos: {
        PosTag t = PosTag::NONE;
        long long best_start = std::numeric_limits<long long>::max();
        for (const Span& s : concept_spans) {
          if (s.start >= end && s.start < best_start) {
            best_start = s.start;
            t = tags[s.start];
          }
        }
        one_hot(out, b.offset, t);
        break;
      }
      default:
        break;
    }
  }
}

std::vector<double> assemble(const Span& collocate, const Verbatim& v,
                             const std::vector<PosTag>& tags,
                             const std::vector<Span>& concept_spans, const EmbeddingTable& emb,
                             const PolysemyModel& poly, const SeedOntology& onto,
                             const FeatureSchema& schema) {
  if (collocate.n != static_cast<uint32_t>(schema.n)) {
    throw std::invalid_argument("assemble: collocate length " + std::to_string(collocate.n) +
                                " does not match schema n=" + std::to_string(schema.n));
  }
  std::vector<double> out(schema.width(), 0.0);
  linguistic_features(collocate, tags, concept_spans, schema, out);
  for (const Block& b : schema.blocks()) {
    switch (b.family) {
      case Family::Word2vec: {
        std::vector<double> mean = emb.average(v.phrase(collocate.start, collocate.n));
        std::copy(mean.begin(), mean.end(), out.begin() + static_cast<long>(b.offset));
        break;
      }
      case Family::Context: {
        std::vector<double> ctx = context_feature(collocate, v, emb);
        std::copy(ctx.begin(), ctx.end(), out.begin() + static_cast<long>(b.offset));
        break;
      }
      case Family::Polysemy: {
        std::vector<double> pf = poly.feature(collocate, v, emb);
        std::copy(pf.begin(), pf.end(), out.begin() + static_cast<long>(b.offset));
        break;
      }
      case Family::Ontology: {
        std::vector<double> of = ontology_feature(collocate, v, onto);
        std::copy(of.begin(), of.end(), out.begin() + static_cast<long>(b.offset));
        break;
      }
      default:
        break;
    }
  }
  return out;
}

}  // namespace onto
