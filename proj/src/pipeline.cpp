#include "onto/pipeline.hpp"

#include <algorithm>
#include <iostream>
#include <stdexcept>

#include "onto/io_util.hpp"
#include "onto/parallel.hpp"

namespace onto {

std::vector<Span> tag_seed_concepts(const Verbatim& v, const SeedOntology& onto) {
  std::vector<Span> spans;
  const uint32_t len = static_cast<uint32_t>(v.size());
  uint32_t pos = 0;
  while (pos < len) {
    uint32_t best_n = 0;
    uint32_t cap = std::min<uint32_t>(kMaxN, len - pos);
    for (uint32_t n = cap; n >= 1; --n) {
      if (!v.boundary_free(pos, n)) continue;
      if (onto.phrases.count(v.phrase(pos, n))) {
        best_n = n;
        break;
      }
    }
    if (best_n > 0) {
      spans.push_back({pos, best_n});
      pos += best_n;
    } else {
      ++pos;
    }
  }
  return spans;
}

namespace {

bool overlaps(const Span& a, const Span& b) {
  return a.start < b.start + b.n && b.start < a.start + a.n;
}

bool clean_span(const Verbatim& v, const Span& s, const StopNoiseLists& stops) {
  for (uint32_t i = 0; i < s.n; ++i) {
    if (stops.excluded(v.tokens[s.start + i].norm)) return false;
  }
  return true;
}

}  // namespace

std::vector<Span> collect_irrelevant(const Verbatim& v, const std::vector<Span>& concept_spans,
                                     const StopNoiseLists& stops) {
  std::vector<Span> out;
  for (const Span& s : extract_ngram_spans(v, kMaxN)) {
    bool hit = false;
    for (const Span& c : concept_spans) {
      if (overlaps(s, c)) {
        hit = true;
        break;
      }
    }
    if (hit) continue;
    if (!clean_span(v, s, stops)) continue;
    out.push_back(s);
  }
  return out;
}

std::vector<Span> generate_candidates(const Verbatim& v, const StopNoiseLists& stops) {
  std::vector<Span> out;
  for (const Span& s : extract_ngram_spans(v, kMaxN)) {
    if (clean_span(v, s, stops)) out.push_back(s);
  }
  return out;
}

std::vector<const LabeledSample*> TrainingSet::for_n(int n) const {
  std::vector<const LabeledSample*> out;
  for (const LabeledSample& s : samples) {
    if (static_cast<int>(s.n) == n) out.push_back(&s);
  }
  return out;
}

std::vector<int> TrainingSet::lengths_present() const {
  std::vector<int> out;
  for (int n = 1; n <= kMaxN; ++n) {
    for (const LabeledSample& s : samples) {
      if (static_cast<int>(s.n) == n) {
        out.push_back(n);
        break;
      }
    }
  }
  return out;
}

bool TrainingSet::contains(const std::string& key) const { return keys_.count(key) > 0; }

bool TrainingSet::add(LabeledSample sample) {
  if (!keys_.insert(sample.key()).second) return false;
  samples.push_back(std::move(sample));
  return true;
}

void TrainingSet::save(const std::string& path) const {
  std::string out;
  for (const LabeledSample& s : samples) {
    out += s.verbatim_id;
    out += '\t';
    out += std::to_string(s.start);
    out += '\t';
    out += std::to_string(s.n);
    out += '\t';
    out += s.phrase;
    out += '\t';
    out += s.label;
    out += '\t';
    out += s.source;
    out += '\n';
  }
  atomic_write(path, out);
}

TrainingSet TrainingSet::load(const std::string& path) {
  TrainingSet ts;
  size_t lineno = 0;
  for (const std::string& line : read_lines(path)) {
    ++lineno;
    if (trim(line).empty() || line[0] == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() != 6) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected 6 tab-separated columns");
    }
    LabeledSample s;
    s.verbatim_id = cols[0];
    s.start = static_cast<uint32_t>(parse_int(cols[1], path));
    s.n = static_cast<uint32_t>(parse_int(cols[2], path));
    if (s.n < 1 || s.n > kMaxN) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": collocate length " +
                               cols[2] + " out of range");
    }
    s.phrase = cols[3];
    s.label = cols[4];
    s.source = cols[5];
    ts.add(std::move(s));
  }
  return ts;
}

TrainingSet build_training_set(const std::vector<Verbatim>& corpus, const SeedOntology& onto,
                               const StopNoiseLists& stops, long long per_n_quota,
                               uint64_t seed) {
  struct Occurrence {
    size_t verbatim = 0;
    Span span;
  };
  std::map<int, std::vector<Occurrence>> concept_pool, irrelevant_pool;
  for (size_t vi = 0; vi < corpus.size(); ++vi) {
    const Verbatim& v = corpus[vi];
    std::vector<Span> concepts = tag_seed_concepts(v, onto);
    for (const Span& s : concepts) concept_pool[s.n].push_back({vi, s});
    for (const Span& s : collect_irrelevant(v, concepts, stops)) {
      irrelevant_pool[s.n].push_back({vi, s});
    }
  }

  TrainingSet ts;
  auto take = [&](std::vector<Occurrence>& pool, int n, bool as_concept) {
    Rng rng(derive_seed(seed, (as_concept ? 100 : 200) + n));
    std::vector<size_t> chosen = sample_without_replacement(
        pool.size(), static_cast<size_t>(std::max<long long>(0, per_n_quota)), rng);
    for (size_t idx : chosen) {
      const Occurrence& occ = pool[idx];
      const Verbatim& v = corpus[occ.verbatim];
      LabeledSample s;
      s.verbatim_id = v.id;
      s.start = occ.span.start;
      s.n = occ.span.n;
      s.phrase = v.phrase(occ.span.start, occ.span.n);
      s.source = "seed-ontology";
      if (as_concept) {
        auto it = onto.concepts.find(s.phrase);
        s.label = it != onto.concepts.end() ? it->second : kConceptLabel;
      } else {
        s.label = kIrrelevantLabel;
      }
      ts.add(std::move(s));
    }
  };

  for (int n = 1; n <= kMaxN; ++n) {
    auto ci = concept_pool.find(n);
    if (ci == concept_pool.end() || ci->second.empty()) {
      std::cerr << "warning: no seed concept occurrences of length " << n
                << "; omitting from coverage\n";
      continue;
    }
    take(ci->second, n, true);
    auto ii = irrelevant_pool.find(n);
    if (ii != irrelevant_pool.end()) take(ii->second, n, false);
  }
  return ts;
}

std::vector<FrequentPhrase> frequent_unlabeled(const CorpusStats& stats, const SeedOntology& onto,
                                               long long min_freq) {
  std::vector<FrequentPhrase> out;
  for (const auto& [phrase, tf] : stats.term_freq) {
    if (tf < min_freq) continue;
    if (onto.phrases.count(phrase)) continue;
    out.push_back({phrase, tf});
  }
  std::sort(out.begin(), out.end(), [](const FrequentPhrase& a, const FrequentPhrase& b) {
    if (a.term_freq != b.term_freq) return a.term_freq > b.term_freq;
    return a.phrase < b.phrase;
  });
  return out;
}

void save_label_requests(const std::vector<FrequentPhrase>& phrases, const std::string& path) {
  std::string out;
  for (const FrequentPhrase& p : phrases) {
    out += p.phrase;
    out += '\t';
    out += std::to_string(p.term_freq);
    out += '\n';
  }
  atomic_write(path, out);
}

std::vector<LabeledSample> load_label_file(const std::string& path, const std::string& source) {
  std::vector<LabeledSample> out;
  size_t lineno = 0;
  for (const std::string& line : read_lines(path)) {
    ++lineno;
    if (trim(line).empty() || line[0] == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() != 5) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected <phrase>\\t<verbatim_id>\\t<start>\\t<n>\\t<label>");
    }
    LabeledSample s;
    s.phrase = cols[0];
    s.verbatim_id = cols[1];
    s.start = static_cast<uint32_t>(parse_int(cols[2], path));
    s.n = static_cast<uint32_t>(parse_int(cols[3], path));
    s.label = trim(cols[4]);
    s.source = source;
    if (s.label.empty()) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": empty label");
    }
    out.push_back(std::move(s));
  }
  return out;
}

FeatureSchema FeatureModels::schema_for(int n) const {
  FeatureSchema s;
  s.n = n;
  s.dim = emb.dim();
  s.families = families;
  return s;
}

SampleFeatures assemble_samples(const std::vector<LabeledSample>& samples,
                                const std::vector<Verbatim>& corpus, const Lexicons& lex,
                                const FeatureModels& models, int threads) {
  std::unordered_map<std::string, size_t> by_id;
  for (size_t i = 0; i < corpus.size(); ++i) by_id.emplace(corpus[i].id, i);

  // group sample indices by verbatim so tags are computed once
  std::unordered_map<size_t, std::vector<size_t>> grouped;
  for (size_t i = 0; i < samples.size(); ++i) {
    auto it = by_id.find(samples[i].verbatim_id);
    if (it == by_id.end()) {
      throw std::runtime_error("sample references unknown verbatim '" + samples[i].verbatim_id +
                               "'");
    }
    grouped[it->second].push_back(i);
  }
  std::vector<std::pair<size_t, std::vector<size_t>>> groups(grouped.begin(), grouped.end());
  std::sort(groups.begin(), groups.end());

  std::unordered_map<std::string, int> type_index;
  for (size_t t = 0; t < lex.onto.types.size(); ++t) {
    type_index.emplace(lex.onto.types[t], static_cast<int>(t));
  }

  std::map<int, FeatureSchema> schemas;
  for (int n = 1; n <= kMaxN; ++n) schemas.emplace(n, models.schema_for(n));

  std::vector<std::vector<double>> rows(samples.size());
  parallel_for(groups.size(), threads, [&](size_t g) {
    const auto& [vi, idxs] = groups[g];
    const Verbatim& v = corpus[vi];
    std::vector<PosTag> tags = models.tagger->tag(v);
    std::vector<Span> seed_spans = tag_seed_concepts(v, lex.onto);
    for (size_t si : idxs) {
      const LabeledSample& s = samples[si];
      if (s.start + s.n > v.size()) {
        throw std::runtime_error("sample span out of range in verbatim '" + v.id + "'");
      }
      rows[si] = assemble({s.start, s.n}, v, tags, seed_spans, models.emb, models.poly, lex.onto,
                          schemas.at(static_cast<int>(s.n)));
    }
  });

  SampleFeatures out;
  std::map<int, size_t> counts;
  for (const LabeledSample& s : samples) ++counts[static_cast<int>(s.n)];
  for (const auto& [n, count] : counts) {
    out.x.emplace(n, Matrix(count, schemas.at(n).width()));
  }
  std::map<int, size_t> cursor;
  for (size_t i = 0; i < samples.size(); ++i) {
    const LabeledSample& s = samples[i];
    int n = static_cast<int>(s.n);
    size_t r = cursor[n]++;
    std::copy(rows[i].begin(), rows[i].end(), out.x.at(n).row(r));
    out.stage1_labels[n].push_back(s.is_concept() ? 0 : 1);
    auto ti = type_index.find(s.label);
    out.stage2_labels[n].push_back(ti == type_index.end() ? -1 : ti->second);
    out.sample_index[n].push_back(i);
  }
  return out;
}

TwoStageModel train_two_stage(const SampleFeatures& features, const FeatureModels& models,
                              const std::vector<std::string>& types, const ForestConfig& config,
                              uint64_t seed, int threads) {
  TwoStageModel model;
  model.types = types;
  const std::vector<std::string> stage1_classes = {kConceptLabel, kIrrelevantLabel};

  for (const auto& [n, x] : features.x) {
    const std::vector<int>& s1 = features.stage1_labels.at(n);
    bool has_concept = std::count(s1.begin(), s1.end(), 0) > 0;
    bool has_irrelevant = std::count(s1.begin(), s1.end(), 1) > 0;
    if (!has_concept) {
      std::cerr << "warning: no concept samples for N=" << n << "; model omits this length\n";
      continue;
    }
    if (!has_irrelevant) {
      std::cerr << "warning: no irrelevant samples for N=" << n << "; model omits this length\n";
      continue;
    }
    FeatureSchema schema = models.schema_for(n);
    model.schemas.emplace(n, schema);
    model.stage1.emplace(n, train_forest(x, s1, stage1_classes, config,
                                         derive_seed(seed, 10 + n), schema.fingerprint(),
                                         threads));

    // stage 2 trains on the typed concept samples only
    const std::vector<int>& s2 = features.stage2_labels.at(n);
    std::vector<size_t> typed;
    for (size_t i = 0; i < s2.size(); ++i) {
      if (s2[i] >= 0) typed.push_back(i);
    }
    if (typed.empty()) {
      std::cerr << "warning: no typed concept samples for N=" << n << "; stage 2 omits it\n";
      model.stage1.erase(n);
      model.schemas.erase(n);
      continue;
    }
    Matrix x2(typed.size(), x.cols);
    std::vector<int> y2;
    for (size_t r = 0; r < typed.size(); ++r) {
      std::copy(x.row(typed[r]), x.row(typed[r]) + x.cols, x2.row(r));
      y2.push_back(s2[typed[r]]);
    }
    model.stage2.emplace(n, train_forest(x2, y2, types, config, derive_seed(seed, 20 + n),
                                         schema.fingerprint(), threads));
  }
  return model;
}

std::vector<Extraction> infer(const std::vector<Verbatim>& raw_corpus, const TwoStageModel& model,
                              const FeatureModels& feature_models, const Lexicons& lex,
                              int threads) {
  if (raw_corpus.empty()) return {};
  CorpusStats stats = build_stats(raw_corpus, kMaxN, threads);
  NormalizeResult norm = normalize_corpus(raw_corpus, lex, stats, feature_models.emb, threads);

  std::map<int, FeatureSchema> schemas;
  for (const auto& [n, schema] : model.schemas) {
    if (model.stage1.at(n).schema_hash != schema.fingerprint()) {
      throw std::runtime_error("stage-1 forest for N=" + std::to_string(n) +
                               " was trained under a different feature schema");
    }
    schemas.emplace(n, schema);
  }

  std::vector<std::vector<Extraction>> per_verbatim(norm.corpus.size());
  parallel_for(norm.corpus.size(), threads, [&](size_t vi) {
    const Verbatim& v = norm.corpus[vi];
    if (v.size() == 0) return;
    std::vector<PosTag> tags = feature_models.tagger->tag(v);
    std::vector<Span> seed_spans = tag_seed_concepts(v, lex.onto);

    struct Scored {
      Span span;
      double p_concept;
      bool is_concept;
      std::vector<double> features;
    };
    std::vector<Scored> scored;
    for (const Span& s : generate_candidates(v, lex.stops)) {
      auto mi = model.stage1.find(static_cast<int>(s.n));
      if (mi == model.stage1.end()) continue;  // length not covered by the model
      std::vector<double> x = assemble(s, v, tags, seed_spans, feature_models.emb,
                                       feature_models.poly, lex.onto,
                                       schemas.at(static_cast<int>(s.n)));
      std::vector<double> proba = mi->second.predict_proba(x);
      bool is_concept = proba[0] >= proba[1];  // tie goes to the earlier class
      scored.push_back({s, proba[0], is_concept, std::move(x)});
    }

    // overlap resolution among concept picks: longest span first, ties to
    // the higher stage-1 probability, then leftmost
    std::vector<size_t> concept_idx;
    for (size_t i = 0; i < scored.size(); ++i) {
      if (scored[i].is_concept) concept_idx.push_back(i);
    }
    std::sort(concept_idx.begin(), concept_idx.end(), [&](size_t a, size_t b) {
      const Scored& sa = scored[a];
      const Scored& sb = scored[b];
      if (sa.span.n != sb.span.n) return sa.span.n > sb.span.n;
      if (sa.p_concept != sb.p_concept) return sa.p_concept > sb.p_concept;
      return sa.span.start < sb.span.start;
    });
    std::vector<size_t> kept;
    for (size_t i : concept_idx) {
      bool clash = false;
      for (size_t k : kept) {
        if (overlaps(scored[i].span, scored[k].span)) {
          clash = true;
          break;
        }
      }
      if (!clash) kept.push_back(i);
    }
    std::sort(kept.begin(), kept.end());
    std::unordered_set<size_t> kept_set(kept.begin(), kept.end());

    std::vector<Extraction>& out = per_verbatim[vi];
    for (size_t i = 0; i < scored.size(); ++i) {
      const Scored& s = scored[i];
      if (s.is_concept && !kept_set.count(i)) continue;  // suppressed by overlap resolution
      Extraction e;
      e.verbatim_id = v.id;
      e.start = s.span.start;
      e.n = s.span.n;
      e.phrase = v.phrase(s.span.start, s.span.n);
      e.is_concept = s.is_concept;
      e.p_stage1 = s.p_concept;
      if (s.is_concept) {
        const ForestModel& stage2 = model.stage2.at(static_cast<int>(s.span.n));
        std::vector<double> proba = stage2.predict_proba(s.features);
        size_t best = 0;
        for (size_t k = 1; k < proba.size(); ++k) {
          if (proba[k] > proba[best]) best = k;
        }
        e.type = stage2.classes[best];
        e.p_stage2 = proba[best];
      }
      out.push_back(std::move(e));
    }
  });

  std::vector<Extraction> all;
  for (auto& part : per_verbatim) {
    for (auto& e : part) all.push_back(std::move(e));
  }
  return all;
}

void save_extractions(const std::vector<Extraction>& extractions, const std::string& path) {
  std::string out;
  for (const Extraction& e : extractions) {
    out += e.verbatim_id;
    out += '\t';
    out += std::to_string(e.start);
    out += '\t';
    out += std::to_string(e.n);
    out += '\t';
    out += e.phrase;
    out += '\t';
    out += e.is_concept ? kConceptLabel : kIrrelevantLabel;
    out += '\t';
    out += e.is_concept ? e.type : "-";
    out += '\t';
    out += fmt_fixed(e.p_stage1, 6);
    out += '\t';
    out += e.is_concept ? fmt_fixed(e.p_stage2, 6) : "-";
    out += '\n';
  }
  atomic_write(path, out);
}

std::vector<Extraction> load_extractions(const std::string& path) {
  std::vector<Extraction> out;
  size_t lineno = 0;
  for (const std::string& line : read_lines(path)) {
    ++lineno;
    if (trim(line).empty() || line[0] == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() != 8) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected 8 columns");
    }
    Extraction e;
    e.verbatim_id = cols[0];
    e.start = static_cast<uint32_t>(parse_int(cols[1], path));
    e.n = static_cast<uint32_t>(parse_int(cols[2], path));
    e.phrase = cols[3];
    e.is_concept = cols[4] == kConceptLabel;
    e.type = cols[5] == "-" ? "" : cols[5];
    e.p_stage1 = parse_double(cols[6], path);
    e.p_stage2 = cols[7] == "-" ? 0.0 : parse_double(cols[7], path);
    out.push_back(std::move(e));
  }
  return out;
}

Committee train_committee(const Matrix& x, const std::vector<int>& stage1_labels,
                          const ForestConfig& config, uint64_t seed, int threads) {
  Committee committee;
  const std::vector<std::string> classes = {kConceptLabel, kIrrelevantLabel};
  committee.members.resize(kCommitteeSize);
  std::vector<uint64_t> seeds(kCommitteeSize);
  for (int m = 0; m < kCommitteeSize; ++m) seeds[m] = derive_seed(seed, 1000 + m);
  parallel_for(kCommitteeSize, threads, [&](size_t m) {
    committee.members[m] = train_forest(x, stage1_labels, classes, config, seeds[m], 0, 1);
  });
  return committee;
}

std::vector<size_t> committee_disagreements(const Committee& committee, const Matrix& x) {
  if (committee.members.size() != kCommitteeSize) {
    throw std::invalid_argument("committee must have exactly 8 members");
  }
  std::vector<size_t> selected;
  for (size_t i = 0; i < x.rows; ++i) {
    int concept_votes = 0;
    for (const ForestModel& m : committee.members) {
      std::vector<double> proba = m.predict_proba(x.row(i), x.cols);
      if (proba[0] >= proba[1]) ++concept_votes;
    }
    if (concept_votes == kCommitteeSize / 2) selected.push_back(i);
  }
  return selected;
}

FileLabelSource::FileLabelSource(const std::string& path) {
  for (const LabeledSample& s : load_label_file(path, "file")) {
    labels_[s.key()] = s.label;
  }
}

std::optional<std::string> FileLabelSource::label_for(const PoolSample& sample) {
  auto it = labels_.find(sample.sample.key());
  if (it == labels_.end()) return std::nullopt;
  return it->second;
}

void save_bundle(const std::string& dir, const TwoStageModel& model, const FeatureModels& fm,
                 const std::map<std::string, std::string>& extra) {
  ensure_dir(dir);
  std::string manifest = "version = 1\n";
  std::vector<std::string> ns;
  for (const auto& [n, f] : model.stage1) ns.push_back(std::to_string(n));
  manifest += "ns = " + join(ns, ",") + "\n";
  manifest += "types = " + join(model.types, ",") + "\n";
  manifest += "families = " + families_to_csv(fm.families) + "\n";
  manifest += "dim = " + std::to_string(fm.emb.dim()) + "\n";
  for (const auto& [k, v] : model.lexicon_fingerprints) manifest += "fp_" + k + " = " + v + "\n";
  for (const auto& [k, v] : extra) manifest += k + " = " + v + "\n";

  for (const auto& [n, forest] : model.stage1) {
    forest.save(dir + "/stage1_n" + std::to_string(n) + ".forest");
  }
  for (const auto& [n, forest] : model.stage2) {
    forest.save(dir + "/stage2_n" + std::to_string(n) + ".forest");
  }
  std::string schemas;
  for (const auto& [n, schema] : model.schemas) schemas += schema.describe() + "\n";
  atomic_write(dir + "/schemas.txt", schemas);
  fm.emb.save(dir + "/embeddings.txt");
  fm.poly.save(dir + "/polysemy.txt");
  atomic_write(dir + "/manifest.txt", manifest);
}

ModelBundle load_bundle(const std::string& dir) {
  ModelBundle bundle;
  for (const std::string& line : read_lines(dir + "/manifest.txt")) {
    if (trim(line).empty() || line[0] == '#') continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos) continue;
    bundle.manifest[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  auto need = [&](const std::string& key) {
    auto it = bundle.manifest.find(key);
    if (it == bundle.manifest.end()) {
      throw std::runtime_error(dir + "/manifest.txt: missing key '" + key + "'");
    }
    return it->second;
  };
  for (const std::string& t : split(need("types"), ',')) {
    if (!t.empty()) bundle.model.types.push_back(t);
  }
  bundle.features.families = families_from_csv(need("families"));
  bundle.features.emb = EmbeddingTable::load(dir + "/embeddings.txt");
  bundle.features.poly = PolysemyModel::load(dir + "/polysemy.txt");
  bundle.features.tagger = std::make_shared<BaselineTagger>();
  for (const std::string& line : read_lines(dir + "/schemas.txt")) {
    if (trim(line).empty()) continue;
    FeatureSchema schema = FeatureSchema::parse(line);
    bundle.model.schemas.emplace(schema.n, schema);
  }
  for (const std::string& ns : split(need("ns"), ',')) {
    if (ns.empty()) continue;
    int n = static_cast<int>(parse_int(ns, "manifest ns"));
    bundle.model.stage1.emplace(n, ForestModel::load(dir + "/stage1_n" + ns + ".forest"));
    bundle.model.stage2.emplace(n, ForestModel::load(dir + "/stage2_n" + ns + ".forest"));
  }
  for (const auto& [k, v] : bundle.manifest) {
    if (k.rfind("fp_", 0) == 0) bundle.model.lexicon_fingerprints[k.substr(3)] = v;
  }
  return bundle;
}

std::vector<GoldEntry> load_gold(const std::string& path) {
  std::vector<GoldEntry> out;
  size_t lineno = 0;
  for (const std::string& line : read_lines(path)) {
    ++lineno;
    if (trim(line).empty() || line[0] == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() != 5) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected 5 columns");
    }
    GoldEntry g;
    g.verbatim_id = cols[0];
    g.start = static_cast<uint32_t>(parse_int(cols[1], path));
    g.n = static_cast<uint32_t>(parse_int(cols[2], path));
    g.phrase = cols[3];
    g.type = cols[4];
    out.push_back(std::move(g));
  }
  return out;
}

namespace {

std::string span_key(const std::string& id, uint32_t start, uint32_t n) {
  return id + "\t" + std::to_string(start) + "\t" + std::to_string(n);
}

}  // namespace

EvalReport evaluate_extractions(const std::vector<Extraction>& extractions,
                                const std::vector<GoldEntry>& gold,
                                const std::vector<std::string>& types,
                                const std::vector<std::string>& holdout_phrases) {
  EvalReport report;
  std::unordered_map<std::string, const GoldEntry*> gold_by_key;
  for (const GoldEntry& g : gold) gold_by_key.emplace(span_key(g.verbatim_id, g.start, g.n), &g);

  std::unordered_set<std::string> holdout(holdout_phrases.begin(), holdout_phrases.end());
  std::unordered_set<std::string> recovered;

  std::vector<std::string> s1_pred, s1_gold, s2_pred, s2_gold;
  std::vector<int> lengths;
  std::unordered_set<std::string> covered_as_concept, seen_keys;

  for (const Extraction& e : extractions) {
    std::string key = span_key(e.verbatim_id, e.start, e.n);
    seen_keys.insert(key);
    auto gi = gold_by_key.find(key);
    bool in_gold = gi != gold_by_key.end();
    s1_pred.push_back(e.is_concept ? kConceptLabel : kIrrelevantLabel);
    s1_gold.push_back(in_gold ? kConceptLabel : kIrrelevantLabel);
    lengths.push_back(static_cast<int>(e.n));
    if (e.is_concept) {
      covered_as_concept.insert(key);
      s2_pred.push_back(e.type);
      s2_gold.push_back(in_gold ? gi->second->type : "NONE");
      if (in_gold && holdout.count(gi->second->phrase)) recovered.insert(gi->second->phrase);
    }
  }
  for (const GoldEntry& g : gold) {
    std::string key = span_key(g.verbatim_id, g.start, g.n);
    if (!seen_keys.count(key)) {
      s1_pred.push_back(kIrrelevantLabel);
      s1_gold.push_back(kConceptLabel);
      lengths.push_back(static_cast<int>(g.n));
    }
    if (!covered_as_concept.count(key)) {
      s2_pred.push_back("NONE");
      s2_gold.push_back(g.type);
    }
  }

  report.stage1 = score_binary(s1_pred, s1_gold, kConceptLabel);
  report.stage1_per_n = score_per_n(s1_pred, s1_gold, lengths, kConceptLabel);
  if (!s2_pred.empty()) report.stage2 = score_macro(s2_pred, s2_gold, types);
  report.holdout_total = holdout.size();
  report.holdout_recovered = recovered.size();
  return report;
}

namespace {

void metrics_row(std::string& out, const std::string& name, const Metrics& m) {
  out += name;
  out += '\t';
  out += std::to_string(m.tp);
  out += '\t';
  out += std::to_string(m.fp);
  out += '\t';
  out += std::to_string(m.fn);
  out += '\t';
  out += fmt_fixed(m.precision, 4);
  out += '\t';
  out += fmt_fixed(m.recall, 4);
  out += '\t';
  out += fmt_fixed(m.f1, 4);
  out += '\n';
}

}  // namespace

std::string EvalReport::to_tsv() const {
  std::string out = "# scope\ttp\tfp\tfn\tprecision\trecall\tf1\n";
  metrics_row(out, "stage1-overall", stage1);
  for (const auto& [n, m] : stage1_per_n) {
    metrics_row(out, "stage1-n" + std::to_string(n), m);
  }
  metrics_row(out, "stage2-macro", stage2.macro);
  for (const auto& [type, m] : stage2.per_class) {
    metrics_row(out, "stage2-type-" + type, m);
  }
  if (holdout_total > 0) {
    double frac = static_cast<double>(holdout_recovered) / static_cast<double>(holdout_total);
    out += "holdout-recovery\t" + std::to_string(holdout_recovered) + "\t" +
           std::to_string(holdout_total) + "\t" + fmt_fixed(frac, 4) + "\n";
  }
  return out;
}

ActiveLearnReport active_learning_rounds(TrainingSet& trainset, const std::vector<int>& lengths,
                                         ActiveLearnEnv& env, LabelSource& labels, int rounds,
                                         const ForestConfig& config, uint64_t seed, int threads) {
  ActiveLearnReport report;
  for (int round = 1; round <= rounds; ++round) {
    for (int n : lengths) {
      ActiveLearnReport::Round r;
      r.round = round;
      r.n = n;

      Matrix x;
      std::vector<int> y;
      env.trainset_matrix(n, trainset, x, y);
      if (x.rows == 0) continue;
      Committee committee =
          train_committee(x, y, config, derive_seed(seed, round * 100 + n), threads);

      std::vector<PoolSample> pool = env.pool(round, n, trainset);
      r.pool_size = pool.size();
      if (pool.empty()) {
        report.rounds.push_back(r);
        continue;
      }
      Matrix px(pool.size(), x.cols);
      for (size_t i = 0; i < pool.size(); ++i) {
        if (pool[i].features.size() != x.cols) {
          throw std::invalid_argument("pool feature width mismatch");
        }
        std::copy(pool[i].features.begin(), pool[i].features.end(), px.row(i));
      }
      std::vector<size_t> selected = committee_disagreements(committee, px);
      r.selected = selected.size();

      std::vector<std::string> unlabeled;
      for (size_t i : selected) {
        PoolSample& ps = pool[i];
        std::optional<std::string> label = labels.label_for(ps);
        if (!label) {
          unlabeled.push_back(ps.sample.phrase + " (" + ps.sample.key() + ")");
          continue;
        }
        ps.sample.label = *label;
        ps.sample.source = "active-learning";
        if (trainset.add(ps.sample)) ++r.added;
      }
      if (!unlabeled.empty()) {
        throw std::runtime_error("active learning: no label provided for " +
                                 std::to_string(unlabeled.size()) + " selected sample(s): " +
                                 join(unlabeled, "; "));
      }
      report.total_added += r.added;
      report.rounds.push_back(r);
    }
  }
  return report;
}

}  // namespace onto
