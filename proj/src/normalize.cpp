#include "onto/normalize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "onto/io_util.hpp"
#include "onto/parallel.hpp"

namespace onto {

namespace {

// token alphabet: the characters tokenize can leave in a norm
constexpr char kAlphabet[] = "abcdefghijklmnopqrstuvwxyz0123456789/-&";
constexpr size_t kAlphabetLen = sizeof(kAlphabet) - 1;

}  // namespace

int levenshtein(const std::string& a, const std::string& b) {
  const size_t n = a.size(), m = b.size();
  std::vector<int> prev(m + 1), cur(m + 1);
  for (size_t j = 0; j <= m; ++j) prev[j] = static_cast<int>(j);
  for (size_t i = 1; i <= n; ++i) {
    cur[0] = static_cast<int>(i);
    for (size_t j = 1; j <= m; ++j) {
      int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

namespace {

// All correct 1-grams at edit distance exactly 1, sorted.
std::vector<std::string> distance1_candidates(const std::string& word, const Lexicons& lex) {
  std::unordered_set<std::string> seen;
  std::vector<std::string> out;
  auto consider = [&](const std::string& cand) {
    if (cand == word || cand.empty()) return;
    if (!lex.is_correct(cand)) return;
    if (seen.insert(cand).second) out.push_back(cand);
  };
  // deletions
  for (size_t i = 0; i < word.size(); ++i) {
    consider(word.substr(0, i) + word.substr(i + 1));
  }
  // substitutions
  for (size_t i = 0; i < word.size(); ++i) {
    std::string cand = word;
    for (size_t k = 0; k < kAlphabetLen; ++k) {
      if (cand[i] == kAlphabet[k]) continue;
      cand[i] = kAlphabet[k];
      consider(cand);
      cand[i] = word[i];
    }
  }
  // insertions
  for (size_t i = 0; i <= word.size(); ++i) {
    for (size_t k = 0; k < kAlphabetLen; ++k) {
      consider(word.substr(0, i) + kAlphabet[k] + word.substr(i));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::string correct_misspelling(const std::string& word, const Lexicons& lex,
                                const CorpusStats& stats, const EmbeddingTable& emb) {
  std::vector<std::string> candidates = distance1_candidates(word, lex);
  if (candidates.empty()) return word;
  if (candidates.size() == 1) return candidates[0];
  std::vector<double> word_vec = emb.lookup(word);
  std::string best;
  double best_score = 0;
  bool first = true;
  for (const std::string& cand : candidates) {
    double freq = static_cast<double>(std::max<long long>(1, stats.tf(cand)));
    double score = std::log(freq) * cosine(word_vec, emb.lookup(cand));
    if (first || score > best_score) {
      best = cand;
      best_score = score;
      first = false;
    }
  }
  return best;
}

std::vector<std::string> split_runon(const std::string& word, const Lexicons& lex,
                                     const EmbeddingTable& emb) {
  struct SplitCand {
    std::string left, right;
  };
  std::vector<SplitCand> valid;
  for (size_t pos = 1; pos < word.size(); ++pos) {
    std::string left = word.substr(0, pos);
    std::string right = word.substr(pos);
    if (lex.is_correct(left) && lex.is_correct(right)) valid.push_back({left, right});
  }
  if (valid.empty()) return {word};
  if (valid.size() == 1) return {valid[0].left, valid[0].right};
  std::vector<double> word_vec = emb.lookup(word);
  size_t best = 0;
  double best_score = 0;
  bool first = true;
  for (size_t i = 0; i < valid.size(); ++i) {
    double score = std::max(cosine(word_vec, emb.lookup(valid[i].left)),
                            cosine(word_vec, emb.lookup(valid[i].right)));
    if (first || score > best_score) {
      best = i;
      best_score = score;
      first = false;
    }
  }
  return {valid[best].left, valid[best].right};
}

std::optional<std::string> merge_whitespace(const std::string& left, const std::string& right,
                                            const Lexicons& lex) {
  if (lex.is_correct(left) || lex.is_correct(right)) return std::nullopt;
  std::string merged = left + right;
  if (!lex.is_correct(merged)) return std::nullopt;
  return merged;
}

AbbreviationContext build_abbrev_context(const std::string& abbr,
                                         const std::vector<std::string>& full_forms,
                                         const std::vector<Verbatim>& corpus,
                                         const CorpusStats& stats) {
  if (full_forms.size() < 2) {
    throw std::invalid_argument("build_abbrev_context: need at least 2 full forms");
  }
  AbbreviationContext ctx;
  ctx.abbr = abbr;
  ctx.full_forms = full_forms;
  ctx.c_abbr = cooccurring_unigrams(corpus, abbr);
  for (const std::string& ff : full_forms) {
    ctx.c_n.push_back(cooccurring_unigrams(corpus, ff));
  }

  for (const std::string& w : ctx.c_abbr) {
    bool everywhere = true;
    for (const auto& cn : ctx.c_n) {
      if (!cn.count(w)) {
        everywhere = false;
        break;
      }
    }
    if (everywhere) ctx.v.push_back(w);
  }
  std::sort(ctx.v.begin(), ctx.v.end());

  // tf = number of verbatims containing both u and the context word,
  // idf = ln(total_docs / doc_freq(context word))
  auto tfidf_for = [&](const std::string& phrase) {
    std::vector<double> vec(ctx.v.size(), 0.0);
    if (ctx.v.empty()) return vec;
    std::unordered_map<std::string, size_t> pos;
    for (size_t i = 0; i < ctx.v.size(); ++i) pos.emplace(ctx.v[i], i);
    std::vector<std::string> parts = split(phrase, ' ');
    std::vector<long long> cooc(ctx.v.size(), 0);
    for (const Verbatim& verb : corpus) {
      if (!contains_phrase(verb, parts)) continue;
      std::unordered_set<std::string> uniq;
      for (const Token& t : verb.tokens) uniq.insert(t.norm);
      for (const std::string& w : uniq) {
        auto it = pos.find(w);
        if (it != pos.end()) ++cooc[it->second];
      }
    }
    for (size_t i = 0; i < ctx.v.size(); ++i) {
      double idf = std::log(static_cast<double>(stats.total_docs) /
                            static_cast<double>(std::max<long long>(1, stats.df(ctx.v[i]))));
      vec[i] = static_cast<double>(cooc[i]) * idf;
    }
    return vec;
  };

  ctx.tfidf_abbr = tfidf_for(abbr);
  for (const std::string& ff : full_forms) ctx.tfidf_ff.push_back(tfidf_for(ff));

  double denom = 0;
  for (const std::string& ff : full_forms) denom += static_cast<double>(stats.df(ff) + 1);
  for (const std::string& ff : full_forms) {
    ctx.priors.push_back(static_cast<double>(stats.df(ff) + 1) / denom);
  }
  return ctx;
}

AbbrevDecision disambiguate_abbrev(const AbbreviationContext& ctx) {
  const size_t n = ctx.full_forms.size();
  if (n < 2) throw std::invalid_argument("disambiguate_abbrev: need at least 2 full forms");

  AbbrevDecision out;
  bool model_usable = !ctx.v.empty();
  std::vector<double> row_sum(n, 0.0);
  for (size_t f = 0; f < n && model_usable; ++f) {
    for (double x : ctx.tfidf_ff[f]) row_sum[f] += x;
    if (row_sum[f] <= 0.0) model_usable = false;
  }

  std::vector<double> posterior(n, 0.0);
  if (model_usable) {
    std::vector<double> log_post(n, 0.0);
    for (size_t f = 0; f < n; ++f) {
      double ll = 0;
      for (size_t i = 0; i < ctx.v.size(); ++i) {
        double w = ctx.tfidf_abbr[i];
        if (w == 0.0) continue;
        double p = ctx.tfidf_ff[f][i];
        if (p <= 0.0) {
          ll = -std::numeric_limits<double>::infinity();
          break;
        }
        ll += w * (std::log(p) - std::log(row_sum[f]));
      }
      log_post[f] = ll + std::log(ctx.priors[f]);
    }
    double max_lp = *std::max_element(log_post.begin(), log_post.end());
    double total = 0;
    if (std::isfinite(max_lp)) {
      for (size_t f = 0; f < n; ++f) {
        posterior[f] = std::exp(log_post[f] - max_lp);
        total += posterior[f];
      }
    }
    if (total > 0) {
      for (double& p : posterior) p /= total;
      out.likelihood_used = true;
    } else {
      model_usable = false;
    }
  }
  if (!model_usable) {
    posterior = ctx.priors;
    out.likelihood_used = false;
  }

  size_t best = 0;
  for (size_t f = 1; f < n; ++f) {
    if (posterior[f] > posterior[best] ||
        (posterior[f] == posterior[best] && ctx.priors[f] > ctx.priors[best])) {
      best = f;
    }
  }
  out.chosen = best;
  out.posterior = std::move(posterior);
  return out;
}

Normalizer::Normalizer(const Lexicons& lex, const CorpusStats& stats, const EmbeddingTable& emb)
    : lex_(lex), stats_(stats), emb_(emb) {}

void Normalizer::resolve_abbreviations(const std::vector<Verbatim>& corpus) {
  for (const auto& [abbr, forms] : lex_.abbr.expansions) {
    if (forms.size() < 2) continue;
    if (stats_.tf(abbr) == 0) continue;  // never occurs, nothing to replace
    AbbreviationContext ctx = build_abbrev_context(abbr, forms, corpus, stats_);
    decisions_.emplace(abbr, disambiguate_abbrev(ctx));
    contexts_.emplace(abbr, std::move(ctx));
  }
}

std::pair<Verbatim, CorrectionLog> Normalizer::normalize(const Verbatim& v) const {
  CorrectionLog log;
  log.verbatim_id = v.id;

  std::vector<std::string> toks;
  std::vector<uint8_t> breaks;
  toks.reserve(v.size());
  for (const Token& t : v.tokens) toks.push_back(t.norm);
  breaks = v.break_before;

  // known abbreviations are handled by the final step, not repaired
  auto repairable = [&](const std::string& w) {
    return !lex_.is_correct(w) && !lex_.is_abbreviation(w);
  };

  // 1. white-space merges, one left-to-right pass
  for (size_t i = 0; i + 1 < toks.size();) {
    if (!breaks[i + 1] && repairable(toks[i]) && repairable(toks[i + 1])) {
      if (auto merged = merge_whitespace(toks[i], toks[i + 1], lex_)) {
        log.entries.push_back({"whitespace", toks[i] + " " + toks[i + 1], *merged});
        toks[i] = *merged;
        toks.erase(toks.begin() + static_cast<long>(i) + 1);
        breaks.erase(breaks.begin() + static_cast<long>(i) + 1);
        ++i;
        continue;
      }
    }
    ++i;
  }

  // 2. run-on splits
  for (size_t i = 0; i < toks.size();) {
    if (repairable(toks[i])) {
      std::vector<std::string> parts = split_runon(toks[i], lex_, emb_);
      if (parts.size() == 2) {
        log.entries.push_back({"runon", toks[i], parts[0] + " " + parts[1]});
        toks[i] = parts[0];
        toks.insert(toks.begin() + static_cast<long>(i) + 1, parts[1]);
        breaks.insert(breaks.begin() + static_cast<long>(i) + 1, 0);
        i += 2;
        continue;
      }
    }
    ++i;
  }

  // 3. misspelling corrections
  for (size_t i = 0; i < toks.size(); ++i) {
    if (!repairable(toks[i])) continue;
    std::string fixed = correct_misspelling(toks[i], lex_, stats_, emb_);
    if (fixed != toks[i]) {
      log.entries.push_back({"misspell", toks[i], fixed});
      toks[i] = fixed;
    }
  }

  // 4. abbreviation replacement
  for (size_t i = 0; i < toks.size();) {
    auto it = lex_.abbr.expansions.find(toks[i]);
    if (it == lex_.abbr.expansions.end()) {
      ++i;
      continue;
    }
    std::string replacement;
    if (it->second.size() == 1) {
      replacement = it->second[0];
    } else {
      auto dec = decisions_.find(toks[i]);
      if (dec == decisions_.end()) {
        ++i;  // no context resolved for this corpus
        continue;
      }
      replacement = it->second[dec->second.chosen];
    }
    log.entries.push_back({"abbrev", toks[i], replacement});
    std::vector<std::string> parts = split(replacement, ' ');
    toks[i] = parts[0];
    for (size_t k = 1; k < parts.size(); ++k) {
      toks.insert(toks.begin() + static_cast<long>(i + k), parts[k]);
      breaks.insert(breaks.begin() + static_cast<long>(i + k), 0);
    }
    i += parts.size();
  }

  Verbatim out;
  out.id = v.id;
  out.break_before = std::move(breaks);
  out.tokens.reserve(toks.size());
  for (size_t i = 0; i < toks.size(); ++i) {
    out.tokens.push_back({toks[i], toks[i], static_cast<uint32_t>(i)});
  }
  out.raw_text = out.normalized_text();
  return {std::move(out), std::move(log)};
}

NormalizeResult normalize_corpus(const std::vector<Verbatim>& corpus, const Lexicons& lex,
                                 const CorpusStats& stats, const EmbeddingTable& emb,
                                 int threads) {
  Normalizer norm(lex, stats, emb);
  norm.resolve_abbreviations(corpus);
  NormalizeResult result;
  result.corpus.resize(corpus.size());
  result.logs.resize(corpus.size());
  parallel_for(corpus.size(), threads, [&](size_t i) {
    auto [nv, log] = norm.normalize(corpus[i]);
    result.corpus[i] = std::move(nv);
    result.logs[i] = std::move(log);
  });
  return result;
}

void save_correction_logs(const std::vector<CorrectionLog>& logs, const std::string& path) {
  std::string out;
  for (const CorrectionLog& log : logs) {
    for (const Correction& c : log.entries) {
      out += log.verbatim_id;
      out += '\t';
      out += c.step;
      out += '\t';
      out += c.before;
      out += '\t';
      out += c.after;
      out += '\n';
    }
  }
  atomic_write(path, out);
}

}  // namespace onto
