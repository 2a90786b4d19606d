#include "onto/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "onto/io_util.hpp"
#include "onto/rng.hpp"

namespace onto {

namespace {

const std::vector<std::string> kPartHeads = {
    "engine",     "sensor",   "module",     "pump",     "relay",   "valve",  "bracket",
    "harness",    "compressor", "radiator", "alternator", "battery", "injector", "manifold",
    "gasket",     "solenoid", "actuator",   "regulator", "caliper", "rotor",  "bushing",
    "axle",       "clutch",   "damper",     "filter",   "gauge",   "hose",   "spindle",
    "fastener",   "impeller"};

const std::vector<std::string> kPartMods = {
    "fuel",   "brake",    "coolant",      "exhaust", "intake",   "ignition", "steering",
    "throttle", "oxygen", "turbo",        "camshaft", "crankshaft", "rear",  "front",
    "upper",  "lower",    "auxiliary",    "primary", "transmission", "pressure"};

const std::vector<std::string> kSymptomHeads = {
    "leak",     "rattle",  "vibration", "stall",  "misfire", "surge",     "hesitation",
    "grinding", "squeal",  "knock",     "drift",  "shudder", "fault",     "failure",
    "short",    "corrosion", "crack",   "wear",   "buzz",    "whine"};

const std::vector<std::string> kSymptomMods = {
    "intermittent", "constant", "loud",      "faint",  "internal", "sudden",
    "gradual",      "excessive", "slight",   "external"};

const std::vector<std::string> kActionHeads = {
    "replaced",  "repaired", "reprogrammed", "inspected", "adjusted",  "cleaned",
    "tightened", "resealed", "calibrated",   "flushed",   "lubricated", "secured",
    "rerouted",  "updated",  "swapped",      "overhauled", "aligned",   "torqued",
    "reinstalled", "patched"};

const std::vector<std::string> kActionMods = {
    "fully", "partially", "completely", "temporarily", "promptly", "carefully",
    "properly", "freshly"};

const std::vector<std::string> kContextBank = {
    "connector", "fuse",     "clamp",   "pigtail",  "grommet",  "spade",   "terminal",
    "wiring",    "loom",     "boot",    "shield",   "sleeve",   "washer",  "stud",
    "flange",    "coupler",  "adapter", "retainer", "clip",     "pin",     "seal",
    "diaphragm", "plunger",  "orifice", "screen",   "baffle",   "liner",   "shim",
    "spacer",    "dowel",    "ferrule", "lug",      "eyelet",   "bezel",   "knob",
    "lever",     "detent",   "pawl",    "ratchet",  "follower", "keeper",  "yoke",
    "collar",    "boss",     "gusset",  "strut",    "brace",    "tang",    "stub",
    "rivet"};

const std::vector<std::string> kFillers = {
    "customer", "states",  "reports", "tech",   "found", "verified", "noted",  "checked",
    "scan",     "unit",    "retest",  "ok",     "cold",  "warm",     "start",  "idle",
    "road",     "test",    "drive",   "concern", "done", "again",    "now",    "twice"};

// administrative clause vocabulary, disjoint from the concept pools
const std::vector<std::string> kClauseWords = {
    "hoist",    "bay",      "order",    "ticket",   "bulletin", "policy",   "mileage",
    "miles",    "odometer", "photos",   "attached", "advisor",  "writer",   "appointment",
    "loaner",   "recheck",  "callback", "estimate", "invoice",  "approved", "declined",
    "warranty", "goodwill", "deductible", "courtesy", "shuttle", "pickup",  "dropoff",
    "morning",  "afternoon", "monday",  "friday",   "waiting",  "opened",   "closed",
    "provided", "offered",  "scheduled", "confirmed", "billed",  "approval", "claim",
    "per",      "mentioned", "prior",   "history",  "quoted",   "parts",    "work",
    "service",  "raised"};

// appended 0-2 times per verbatim; <NUM> becomes a random code
const std::vector<std::vector<std::string>> kClauses = {
    {"per", "bulletin", "<NUM>"},
    {"order", "<NUM>", "opened", "monday", "morning"},
    {"customer", "waiting", "on", "estimate", "approval"},
    {"unit", "on", "hoist", "in", "bay", "<NUM>"},
    {"photos", "attached", "to", "ticket", "<NUM>"},
    {"courtesy", "shuttle", "offered"},
    {"odometer", "<NUM>", "miles"},
    {"warranty", "claim", "approved", "by", "advisor"},
    {"loaner", "provided", "pickup", "friday", "afternoon"},
    {"recheck", "scheduled", "for", "friday"},
    {"goodwill", "policy", "<NUM>", "declined"},
    {"invoice", "<NUM>", "billed", "and", "closed"},
    {"callback", "confirmed", "with", "writer"},
    {"appointment", "confirmed", "for", "monday", "afternoon"},
    {"estimate", "<NUM>", "approved", "with", "deductible"},
};

// clauses that mention a bare concept word outside any concept use;
// <CW> never expands to a complete concept phrase
const std::vector<std::vector<std::string>> kMentionClauses = {
    {"customer", "mentioned", "<CW>", "history"},
    {"prior", "<CW>", "repair", "quoted"},
    {"<CW>", "parts", "on", "order"},
    {"quoted", "<CW>", "work", "for", "friday"},
    {"history", "shows", "prior", "<CW>", "service"},
    {"<CW>", "concern", "raised", "at", "dropoff"},
};

const std::vector<std::string> kStopWords = {
    "the", "a",  "an",  "is",   "are",    "was",   "has",    "have", "on", "at",
    "with", "and", "to", "of",  "in",     "for",   "from",   "during", "after", "before",
    "near", "no", "it", "this", "that"};

const std::vector<std::string> kNoiseWords = {"please", "thanks", "asap", "fyi"};

struct AbbrFamily {
  std::string code;
  std::vector<std::string> expansions;  // 3-token phrases, type A
  std::vector<double> sense_weights;    // skewed toward the first expansion
  std::vector<std::string> ctx_words;  // 5 shared context words
};

std::vector<AbbrFamily> abbr_families() {
  std::vector<AbbrFamily> fams = {
      {"tps",
       {"throttle position sensor", "tire pressure sensor", "tank pressure sensor"},
       {0.94, 0.03, 0.03},
       {}},
      {"fpr", {"fuel pressure regulator", "front power relay"}, {0.95, 0.05}, {}},
      {"ecm", {"engine control module", "exhaust control module"}, {0.95, 0.05}, {}},
      {"bcv", {"brake control valve", "boost control valve"}, {0.95, 0.05}, {}},
      {"ivs", {"intake valve solenoid", "idle valve sensor"}, {0.95, 0.05}, {}},
      {"cps",
       {"camshaft position sensor", "crankshaft position sensor", "coolant pressure sensor"},
       {0.94, 0.03, 0.03},
       {}},
      {"rcm", {"rear control module", "restraint control module"}, {0.95, 0.05}, {}},
      {"tcv", {"transmission control valve", "turbo control valve"}, {0.95, 0.05}, {}},
      {"ohs", {"oxygen heater sensor", "oil heat sensor"}, {0.95, 0.05}, {}},
      {"apv", {"auxiliary pump valve", "air pump valve"}, {0.95, 0.05}, {}},
  };
  for (size_t f = 0; f < fams.size(); ++f) {
    for (int k = 0; k < 5; ++k) {
      fams[f].ctx_words.push_back(kContextBank[(f * 5 + k) % kContextBank.size()]);
    }
  }
  return fams;
}

// Template slots: P part, S symptom, C action, AP abbreviation-family
// part, X context word of that family. Literal "." starts a new sentence.
const std::vector<std::vector<std::string>> kTemplates = {
    {"customer", "states", "the", "<P>", "has", "<S>", ".", "<C>", "and", "retest", "ok"},
    {"customer", "reports", "<S>", "from", "the", "<P>", "during", "cold", "start", ".",
     "tech", "<C>", "now"},
    {"tech", "found", "<S>", "at", "the", "<P>", ".", "<C>", "and", "verified", "ok"},
    {"the", "<P>", "shows", "<S>", "on", "road", "test", ".", "unit", "<C>", "again"},
    {"scan", "noted", "<S>", "in", "the", "<P>", ".", "<C>", "and", "test", "ok"},
    {"checked", "the", "<P>", "for", "<S>", ".", "no", "concern", "now"},
    {"the", "<P>", "has", "<S>", "during", "warm", "idle", ".", "<C>", "and", "road",
     "test", "ok"},
};
const std::vector<std::vector<std::string>> kAbbrTemplates = {
    {"customer", "states", "the", "<AP>", "has", "<S>", "near", "<X>", ".", "<C>", "and",
     "retest", "ok"},
    {"tech", "found", "<S>", "at", "the", "<AP>", "near", "<X>", ".", "<C>", "now"},
};

struct Pools {
  // phrase -> type, plus per-type phrase lists in creation order
  std::map<std::string, std::string> type_of;
  std::vector<std::string> parts, symptoms, actions;
};

void add_phrase(Pools& pools, const std::string& phrase, const std::string& type) {
  if (pools.type_of.count(phrase)) return;
  pools.type_of.emplace(phrase, type);
  if (type == "A") pools.parts.push_back(phrase);
  else if (type == "B") pools.symptoms.push_back(phrase);
  else pools.actions.push_back(phrase);
}

std::string sample_of(const std::vector<std::string>& bank, Rng& rng) {
  return bank[rng.index(bank.size())];
}

Pools build_pools(int total, const std::vector<AbbrFamily>& fams, Rng& rng) {
  Pools pools;
  // every head word is itself a concept of its type, the way real
  // ontologies carry generic heads ("sensor") next to specific phrases
  for (const std::string& h : kPartHeads) add_phrase(pools, h, "A");
  for (const std::string& h : kSymptomHeads) add_phrase(pools, h, "B");
  for (const std::string& h : kActionHeads) add_phrase(pools, h, "C");
  for (const AbbrFamily& fam : fams) {
    for (const std::string& e : fam.expansions) add_phrase(pools, e, "A");
  }

  int a_target = total * 43 / 100;
  int b_target = total * 33 / 100;
  int c_target = total - a_target - b_target;

  auto fill = [&](const std::string& type, int target, auto&& make) {
    int current = type == "A" ? static_cast<int>(pools.parts.size())
                 : type == "B" ? static_cast<int>(pools.symptoms.size())
                               : static_cast<int>(pools.actions.size());
    int guard = 0;
    while (current < target && guard < target * 200) {
      ++guard;
      std::string phrase = make();
      if (pools.type_of.count(phrase)) continue;
      add_phrase(pools, phrase, type);
      ++current;
    }
  };

  // multi-gram length mix on top of the head 1-grams
  auto pick_len = [&rng]() {
    double r = rng.real();
    if (r < 0.45) return 2;
    if (r < 0.80) return 3;
    return 4;
  };

  fill("A", a_target, [&]() {
    int len = pick_len();
    if (len == 2) return sample_of(kPartMods, rng) + " " + sample_of(kPartHeads, rng);
    if (len == 3) {
      return sample_of(kPartMods, rng) + " " + sample_of(kPartHeads, rng) + " " +
             sample_of(kPartHeads, rng);
    }
    return sample_of(kPartMods, rng) + " " + sample_of(kPartMods, rng) + " " +
           sample_of(kPartHeads, rng) + " " + sample_of(kPartHeads, rng);
  });
  fill("B", b_target, [&]() {
    int len = pick_len();
    if (len == 2) return sample_of(kSymptomMods, rng) + " " + sample_of(kSymptomHeads, rng);
    if (len == 3) {
      return sample_of(kSymptomMods, rng) + " " + sample_of(kSymptomMods, rng) + " " +
             sample_of(kSymptomHeads, rng);
    }
    return sample_of(kSymptomMods, rng) + " " + sample_of(kSymptomMods, rng) + " " +
           sample_of(kSymptomHeads, rng) + " " + sample_of(kSymptomHeads, rng);
  });
  fill("C", c_target, [&]() {
    int len = pick_len();
    if (len == 2) return sample_of(kActionMods, rng) + " " + sample_of(kActionHeads, rng);
    if (len == 3) {
      return sample_of(kActionMods, rng) + " " + sample_of(kActionHeads, rng) + " " +
             sample_of(kActionHeads, rng);
    }
    return sample_of(kActionMods, rng) + " " + sample_of(kActionMods, rng) + " " +
           sample_of(kActionHeads, rng) + " " + sample_of(kActionHeads, rng);
  });
  return pools;
}

struct GoldSpan {
  uint32_t start;
  uint32_t n;
  std::string phrase;
  std::string type;
};

struct DraftVerbatim {
  std::string id;
  std::vector<std::vector<std::string>> segments;  // sentences
  std::vector<GoldSpan> gold;
  std::string clean_text;  // rendered before noise injection
  bool forced_coverage = false;  // keeps its expansion spelled out
  // planted abbreviation, if any
  bool has_abbr_slot = false;
  int abbr_family = -1;
  int abbr_expansion = -1;
  int abbr_segment = -1;
  size_t abbr_token = 0;  // index within segment of the expansion start
  bool abbr_planted = false;

  std::vector<std::string> flat() const {
    std::vector<std::string> out;
    for (const auto& seg : segments) out.insert(out.end(), seg.begin(), seg.end());
    return out;
  }
  std::string render() const {
    std::string out;
    for (size_t s = 0; s < segments.size(); ++s) {
      for (size_t i = 0; i < segments[s].size(); ++i) {
        if (!out.empty()) out += ' ';
        out += segments[s][i];
      }
      out += " .";
    }
    return out;
  }
};

int weighted_pick(const std::vector<double>& weights, Rng& rng) {
  double total = 0;
  for (double w : weights) total += w;
  double r = rng.real() * total;
  double acc = 0;
  for (size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (acc >= r) return static_cast<int>(i);
  }
  return static_cast<int>(weights.size()) - 1;
}

std::string pick_ctx_word(const AbbrFamily& fam, int expansion, Rng& rng) {
  // each expansion leans on its own pair of context words but touches all
  if (rng.real() < 0.75) {
    size_t base = static_cast<size_t>(expansion) * 2;
    return fam.ctx_words[(base + rng.index(2)) % fam.ctx_words.size()];
  }
  return fam.ctx_words[rng.index(fam.ctx_words.size())];
}

DraftVerbatim instantiate(const std::vector<std::string>& tmpl, const Pools& pools,
                          const std::vector<AbbrFamily>& fams, Rng& rng,
                          const std::string* forced_phrase, const std::string* forced_type,
                          int forced_family, int forced_expansion, int forced_ctx) {
  DraftVerbatim v;
  v.segments.emplace_back();
  uint32_t pos = 0;
  bool forced_used = false;
  int family = -1, expansion = -1;

  auto put_phrase = [&](const std::string& phrase, const std::string& type) {
    auto words = split(phrase, ' ');
    v.gold.push_back({pos, static_cast<uint32_t>(words.size()), phrase, type});
    for (const std::string& w : words) {
      v.segments.back().push_back(w);
      ++pos;
    }
  };

  for (const std::string& piece : tmpl) {
    if (piece == ".") {
      v.segments.emplace_back();
      continue;
    }
    if (piece == "<P>" || piece == "<S>" || piece == "<C>") {
      const std::vector<std::string>* pool =
          piece == "<P>" ? &pools.parts : piece == "<S>" ? &pools.symptoms : &pools.actions;
      const std::string type = piece == "<P>" ? "A" : piece == "<S>" ? "B" : "C";
      if (forced_phrase && !forced_used && forced_type && *forced_type == type) {
        put_phrase(*forced_phrase, type);
        forced_used = true;
      } else {
        put_phrase((*pool)[rng.index(pool->size())], type);
      }
      continue;
    }
    if (piece == "<AP>") {
      family = forced_family >= 0 ? forced_family : static_cast<int>(rng.index(fams.size()));
      const AbbrFamily& fam = fams[family];
      expansion = forced_expansion >= 0 ? forced_expansion
                                        : weighted_pick(fam.sense_weights, rng);
      v.has_abbr_slot = true;
      v.abbr_family = family;
      v.abbr_expansion = expansion;
      v.abbr_segment = static_cast<int>(v.segments.size()) - 1;
      v.abbr_token = v.segments.back().size();
      put_phrase(fam.expansions[expansion], "A");
      continue;
    }
    if (piece == "<X>") {
      const AbbrFamily& fam = fams[family >= 0 ? family : 0];
      std::string w = forced_ctx >= 0 ? fam.ctx_words[forced_ctx]
                                      : pick_ctx_word(fam, expansion >= 0 ? expansion : 0, rng);
      v.segments.back().push_back(w);
      ++pos;
      continue;
    }
    v.segments.back().push_back(piece);
    ++pos;
  }
  while (!v.segments.empty() && v.segments.back().empty()) v.segments.pop_back();
  return v;
}

// 0-2 administrative clause sentences plus an occasional bare-word
// mention: the same word can be part of a concept in one verbatim and
// plain filler in another
void append_clauses(DraftVerbatim& v, Rng& rng, const std::vector<std::string>& mention_words) {
  double r = rng.real();
  int count = r < 0.35 ? 0 : r < 0.75 ? 1 : 2;
  for (int c = 0; c < count; ++c) {
    const auto& clause = kClauses[rng.index(kClauses.size())];
    std::vector<std::string> sentence;
    for (const std::string& w : clause) {
      if (w == "<NUM>") {
        sentence.push_back(std::to_string(100 + rng.below(9900)));
      } else {
        sentence.push_back(w);
      }
    }
    v.segments.push_back(std::move(sentence));
  }
  if (!mention_words.empty() && rng.real() < 0.15) {
    const auto& clause = kMentionClauses[rng.index(kMentionClauses.size())];
    std::vector<std::string> sentence;
    for (const std::string& w : clause) {
      if (w == "<CW>") {
        sentence.push_back(mention_words[rng.index(mention_words.size())]);
      } else {
        sentence.push_back(w);
      }
    }
    v.segments.push_back(std::move(sentence));
  }
}

}  // namespace

SynthSummary generate_synthetic(const SynthSpec& spec, const std::string& out_dir) {
  if (spec.size < 1) throw std::invalid_argument("synth: size must be >= 1");
  if (spec.concepts < 40) throw std::invalid_argument("synth: need at least 40 concepts");
  if (spec.holdout < 0 || spec.holdout >= 1) {
    throw std::invalid_argument("synth: holdout must be in [0, 1)");
  }
  ensure_dir(out_dir);
  Rng rng(derive_seed(spec.seed, "synth"));

  std::vector<AbbrFamily> fams = abbr_families();
  Pools pools = build_pools(spec.concepts, fams, rng);

  // constituent words usable as bare mentions: anything that is not
  // itself a 1-gram concept phrase
  std::vector<std::string> mention_words;
  {
    std::set<std::string> constituents;
    for (const auto& [phrase, type] : pools.type_of) {
      for (const std::string& w : split(phrase, ' ')) constituents.insert(w);
    }
    for (const std::string& w : constituents) {
      if (!pools.type_of.count(w)) mention_words.push_back(w);
    }
  }

  // dictionary = every real word the generator can emit
  std::set<std::string> dict_words;
  auto add_words = [&](const std::vector<std::string>& bank) {
    dict_words.insert(bank.begin(), bank.end());
  };
  add_words(kPartHeads);
  add_words(kPartMods);
  add_words(kSymptomHeads);
  add_words(kSymptomMods);
  add_words(kActionHeads);
  add_words(kActionMods);
  add_words(kContextBank);
  add_words(kFillers);
  add_words(kClauseWords);
  add_words(kStopWords);
  for (const AbbrFamily& f : fams) {
    for (const std::string& e : f.expansions) {
      for (const std::string& w : split(e, ' ')) dict_words.insert(w);
    }
  }
  add_words(kNoiseWords);

  std::unordered_set<std::string> correct = {dict_words.begin(), dict_words.end()};
  std::unordered_set<std::string> abbr_codes;
  for (const AbbrFamily& f : fams) abbr_codes.insert(f.code);

  // forced coverage: every concept phrase and every (family, expansion,
  // ctx word) pair appears at least once
  struct Forced {
    const std::string* phrase = nullptr;
    const std::string* type = nullptr;
    int family = -1, expansion = -1, ctx = -1;
  };
  std::vector<Forced> forced;
  std::vector<std::pair<std::string, std::string>> all_concepts(pools.type_of.begin(),
                                                                pools.type_of.end());
  for (const auto& [phrase, type] : all_concepts) {
    Forced f;
    f.phrase = &phrase;
    f.type = &type;
    forced.push_back(f);
  }
  for (size_t fi = 0; fi < fams.size(); ++fi) {
    for (size_t e = 0; e < fams[fi].expansions.size(); ++e) {
      for (int c = 0; c < static_cast<int>(fams[fi].ctx_words.size()); ++c) {
        Forced f;
        f.family = static_cast<int>(fi);
        f.expansion = static_cast<int>(e);
        f.ctx = c;
        forced.push_back(f);
      }
    }
  }

  std::vector<DraftVerbatim> drafts;
  drafts.reserve(spec.size);
  for (int i = 0; i < spec.size; ++i) {
    std::string id = "v" + std::to_string(i + 1);
    DraftVerbatim v;
    bool is_forced = static_cast<size_t>(i) < forced.size();
    if (is_forced) {
      const Forced& f = forced[i];
      if (f.family >= 0) {
        const auto& tmpl = kAbbrTemplates[rng.index(kAbbrTemplates.size())];
        v = instantiate(tmpl, pools, fams, rng, nullptr, nullptr, f.family, f.expansion, f.ctx);
      } else {
        // pick a template containing a slot of the forced type
        while (true) {
          const auto& tmpl = kTemplates[rng.index(kTemplates.size())];
          std::string slot = *f.type == "A" ? "<P>" : *f.type == "B" ? "<S>" : "<C>";
          if (std::find(tmpl.begin(), tmpl.end(), slot) == tmpl.end()) continue;
          v = instantiate(tmpl, pools, fams, rng, f.phrase, f.type, -1, -1, -1);
          break;
        }
      }
    } else if (rng.real() < spec.abbr_template_frac) {
      const auto& tmpl = kAbbrTemplates[rng.index(kAbbrTemplates.size())];
      v = instantiate(tmpl, pools, fams, rng, nullptr, nullptr, -1, -1, -1);
    } else {
      const auto& tmpl = kTemplates[rng.index(kTemplates.size())];
      v = instantiate(tmpl, pools, fams, rng, nullptr, nullptr, -1, -1, -1);
    }
    v.id = id;
    v.forced_coverage = is_forced;
    append_clauses(v, rng, mention_words);
    v.clean_text = v.render();
    drafts.push_back(std::move(v));
  }

  // noise answer keys
  std::string ans_misspell, ans_runon, ans_whitespace, ans_abbrev;
  SynthSummary summary;

  for (DraftVerbatim& v : drafts) {
    // abbreviation plant decision first so repair noise avoids its span
    size_t abbr_lo = 0, abbr_hi = 0;  // flat index range of the expansion
    if (v.has_abbr_slot && !v.forced_coverage && rng.real() < spec.abbrev_rate) {
      v.abbr_planted = true;
      size_t flat = 0;
      for (int s = 0; s < v.abbr_segment; ++s) flat += v.segments[s].size();
      abbr_lo = flat + v.abbr_token;
      abbr_hi = abbr_lo + split(fams[v.abbr_family].expansions[v.abbr_expansion], ' ').size();
    }

    double r = rng.real();
    auto flat_tokens = v.flat();
    auto locate = [&](size_t flat_idx) {
      size_t seg = 0, off = flat_idx;
      while (off >= v.segments[seg].size()) {
        off -= v.segments[seg].size();
        ++seg;
      }
      return std::pair<size_t, size_t>(seg, off);
    };
    auto eligible = [&](size_t idx) {
      if (v.abbr_planted && idx >= abbr_lo && idx < abbr_hi) return false;
      return true;
    };

    if (r < spec.misspell_rate) {
      for (int attempt = 0; attempt < 12; ++attempt) {
        size_t idx = rng.index(flat_tokens.size());
        const std::string& w = flat_tokens[idx];
        if (!eligible(idx) || w.size() < 4 || !correct.count(w)) continue;
        // one random edit that leaves the token incorrect
        std::string bad = w;
        int kind = static_cast<int>(rng.below(3));
        size_t p = rng.index(w.size());
        char c = static_cast<char>('a' + rng.below(26));
        if (kind == 0) bad.erase(p, 1);
        else if (kind == 1) bad[p] = c;
        else bad.insert(p, 1, c);
        if (bad == w || correct.count(bad) || abbr_codes.count(bad)) continue;
        auto [seg, off] = locate(idx);
        v.segments[seg][off] = bad;
        ans_misspell += v.id + "\t" + std::to_string(idx) + "\t" + bad + "\t" + w + "\n";
        ++summary.misspell_plants;
        break;
      }
    } else if (r < spec.misspell_rate + spec.runon_rate) {
      for (int attempt = 0; attempt < 12; ++attempt) {
        size_t idx = rng.index(flat_tokens.size());
        if (!eligible(idx) || !eligible(idx + 1)) continue;
        auto [seg, off] = locate(idx);
        if (off + 1 >= v.segments[seg].size()) continue;  // stay inside the sentence
        const std::string& a = v.segments[seg][off];
        const std::string& b = v.segments[seg][off + 1];
        if (!correct.count(a) || !correct.count(b)) continue;
        std::string fused = a + b;
        if (correct.count(fused) || abbr_codes.count(fused)) continue;
        ans_runon += v.id + "\t" + fused + "\t" + a + " " + b + "\n";
        v.segments[seg][off] = fused;
        v.segments[seg].erase(v.segments[seg].begin() + static_cast<long>(off) + 1);
        ++summary.runon_plants;
        break;
      }
    } else if (r < spec.misspell_rate + spec.runon_rate + spec.whitespace_rate) {
      for (int attempt = 0; attempt < 12; ++attempt) {
        size_t idx = rng.index(flat_tokens.size());
        const std::string& w = flat_tokens[idx];
        if (!eligible(idx) || w.size() < 6 || !correct.count(w)) continue;
        size_t cut = 0;
        for (int t = 0; t < 10; ++t) {
          size_t c2 = 2 + rng.index(w.size() - 3);
          std::string left = w.substr(0, c2), right = w.substr(c2);
          if (!correct.count(left) && !correct.count(right) && !abbr_codes.count(left) &&
              !abbr_codes.count(right)) {
            cut = c2;
            break;
          }
        }
        if (cut == 0) continue;
        std::string left = w.substr(0, cut), right = w.substr(cut);
        auto [seg, off] = locate(idx);
        v.segments[seg][off] = left;
        v.segments[seg].insert(v.segments[seg].begin() + static_cast<long>(off) + 1, right);
        ans_whitespace += v.id + "\t" + left + " " + right + "\t" + w + "\n";
        ++summary.whitespace_plants;
        break;
      }
    }

    if (v.abbr_planted) {
      const AbbrFamily& fam = fams[v.abbr_family];
      const std::string& expansion = fam.expansions[v.abbr_expansion];
      size_t len = split(expansion, ' ').size();
      auto& seg = v.segments[v.abbr_segment];
      seg[v.abbr_token] = fam.code;
      seg.erase(seg.begin() + static_cast<long>(v.abbr_token) + 1,
                seg.begin() + static_cast<long>(v.abbr_token) + static_cast<long>(len));
      ans_abbrev += v.id + "\t" + fam.code + "\t" + expansion + "\n";
      ++summary.abbrev_plants;
    }

    if (rng.real() < spec.noiseword_rate) {
      size_t seg = rng.index(v.segments.size());
      if (!v.segments[seg].empty()) {
        size_t at = rng.index(v.segments[seg].size() + 1);
        v.segments[seg].insert(v.segments[seg].begin() + static_cast<long>(at),
                               kNoiseWords[rng.index(kNoiseWords.size())]);
      }
    }
  }

  // holdout: a uniform sample of distinct concept phrases
  std::vector<std::string> phrases;
  for (const auto& [phrase, type] : pools.type_of) phrases.push_back(phrase);
  size_t holdout_count = static_cast<size_t>(
      std::llround(spec.holdout * static_cast<double>(phrases.size())));
  Rng hold_rng(derive_seed(spec.seed, "holdout"));
  std::vector<size_t> held = sample_without_replacement(phrases.size(), holdout_count, hold_rng);
  std::unordered_set<std::string> held_set;
  for (size_t i : held) held_set.insert(phrases[i]);
  summary.held_out = static_cast<int>(held_set.size());

  // sense counts: how many roles a word plays, with a sprinkle of extras
  std::map<std::string, int> roles;
  auto bump = [&](const std::vector<std::string>& bank) {
    for (const std::string& w : bank) ++roles[w];
  };
  bump(kPartHeads);
  bump(kPartMods);
  bump(kSymptomHeads);
  bump(kSymptomMods);
  bump(kActionHeads);
  bump(kActionMods);
  bump(kContextBank);
  bump(kFillers);
  bump(kClauseWords);
  Rng sense_rng(derive_seed(spec.seed, "senses"));
  for (auto& [w, p] : roles) {
    if (sense_rng.real() < 0.1) p += 1 + static_cast<int>(sense_rng.below(3));
  }

  // ---- write everything ----
  auto path_of = [&](const std::string& name) { return out_dir + "/" + name; };
  SynthSummary& sum = summary;
  sum.verbatims = spec.size;

  std::string corpus_noisy, corpus_clean, gold;
  for (const DraftVerbatim& v : drafts) {
    corpus_noisy += v.id + "\t" + v.render() + "\n";
    corpus_clean += v.id + "\t" + v.clean_text + "\n";
    for (const GoldSpan& g : v.gold) {
      gold += v.id + "\t" + std::to_string(g.start) + "\t" + std::to_string(g.n) + "\t" +
              g.phrase + "\t" + g.type + "\n";
      ++sum.gold_spans;
    }
  }

  atomic_write(path_of("corpus.tsv"), corpus_noisy);
  atomic_write(path_of("corpus_clean.tsv"), corpus_clean);
  atomic_write(path_of("gold.tsv"), gold);

  std::string onto_tsv, full_tsv, holdout_txt;
  for (const auto& [phrase, type] : pools.type_of) {
    full_tsv += phrase + "\t" + type + "\n";
    if (held_set.count(phrase)) holdout_txt += phrase + "\n";
    else onto_tsv += phrase + "\t" + type + "\n";
  }
  atomic_write(path_of("ontology.tsv"), onto_tsv);
  atomic_write(path_of("concepts_full.tsv"), full_tsv);
  atomic_write(path_of("holdout.txt"), holdout_txt);

  std::string dict_txt;
  for (const std::string& w : dict_words) dict_txt += w + "\n";
  atomic_write(path_of("dictionary.txt"), dict_txt);

  std::string stops_txt, noise_txt;
  for (const std::string& w : kStopWords) stops_txt += w + "\n";
  for (const std::string& w : kNoiseWords) noise_txt += w + "\n";
  atomic_write(path_of("stopwords.txt"), stops_txt);
  atomic_write(path_of("noisewords.txt"), noise_txt);

  std::string abbr_tsv;
  for (const AbbrFamily& f : fams) {
    abbr_tsv += f.code + "\t" + join(f.expansions, "|") + "\n";
  }
  atomic_write(path_of("abbreviations.tsv"), abbr_tsv);

  std::string senses_tsv;
  for (const auto& [w, p] : roles) senses_tsv += w + "\t" + std::to_string(p) + "\n";
  atomic_write(path_of("senses.tsv"), senses_tsv);

  atomic_write(path_of("answers_misspell.tsv"), ans_misspell);
  atomic_write(path_of("answers_runon.tsv"), ans_runon);
  atomic_write(path_of("answers_whitespace.tsv"), ans_whitespace);
  atomic_write(path_of("answers_abbrev.tsv"), ans_abbrev);

  std::string config;
  config += "corpus = " + path_of("corpus.tsv") + "\n";
  config += "gold = " + path_of("gold.tsv") + "\n";
  config += "dict = " + path_of("dictionary.txt") + "\n";
  config += "onto = " + path_of("ontology.tsv") + "\n";
  config += "abbr = " + path_of("abbreviations.tsv") + "\n";
  config += "senses = " + path_of("senses.tsv") + "\n";
  config += "stops = " + path_of("stopwords.txt") + "\n";
  config += "noise = " + path_of("noisewords.txt") + "\n";
  config += "holdout = " + path_of("holdout.txt") + "\n";
  atomic_write(path_of("config.txt"), config);

  sum.files["corpus"] = path_of("corpus.tsv");
  sum.files["gold"] = path_of("gold.tsv");
  sum.files["ontology"] = path_of("ontology.tsv");
  sum.files["holdout"] = path_of("holdout.txt");
  sum.files["config"] = path_of("config.txt");
  return summary;
}

}  // namespace onto
