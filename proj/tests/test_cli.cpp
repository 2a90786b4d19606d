#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <map>
#include <set>

#include "onto/cli.hpp"
#include "onto/io_util.hpp"
#include "onto/pipeline.hpp"

using namespace onto;

namespace {

int run(std::vector<std::string> args) { return cli::run(args); }

std::string tmp_dir(const std::string& name) {
  std::string dir = (std::filesystem::temp_directory_path() / name).string();
  ensure_dir(dir);
  return dir;
}

}  // namespace

TEST_CASE("unknown subcommands and flags are usage errors") {
  CHECK(run({}) == 2);
  CHECK(run({"frobnicate"}) == 2);
  CHECK(run({"train"}) == 2);                       // missing required options
  CHECK(run({"synth", "--bogus", "1"}) == 2);       // unknown flag
  CHECK(run({"eval", "--extractions"}) == 2);       // dangling value
  CHECK(run({"help"}) == 0);
}

TEST_CASE("cli pipeline end to end on a small synthetic corpus") {
  std::string dir = tmp_dir("onto_cli_e2e");
  REQUIRE(run({"synth", "--out", dir, "--size", "700", "--concepts", "60", "--seed", "5"}) == 0);
  std::string cfg = dir + "/config.txt";
  REQUIRE(file_exists(cfg));

  REQUIRE(run({"stats", "--config", cfg, "--out", dir + "/stats.tsv"}) == 0);
  CHECK(file_exists(dir + "/stats.tsv"));

  REQUIRE(run({"normalize", "--config", cfg, "--out", dir + "/normalized.tsv", "--log",
               dir + "/corrections.tsv", "--dim", "16", "--epochs", "2", "--min-count", "3",
               "--seed", "5"}) == 0);
  CHECK(file_exists(dir + "/normalized.tsv"));
  CHECK(file_exists(dir + "/corrections.tsv"));

  REQUIRE(run({"embed", "--corpus", dir + "/normalized.tsv", "--out", dir + "/emb.txt",
               "--dim", "16", "--epochs", "2", "--min-count", "3", "--seed", "5"}) == 0);

  REQUIRE(run({"trainset", "--config", cfg, "--corpus", dir + "/normalized.tsv", "--out",
               dir + "/trainset.tsv", "--quota", "300", "--seed", "5", "--request-out",
               dir + "/requests.tsv", "--min-freq", "20"}) == 0);
  CHECK(file_exists(dir + "/requests.tsv"));

  REQUIRE(run({"train", "--config", cfg, "--corpus", dir + "/normalized.tsv", "--trainset",
               dir + "/trainset.tsv", "--emb", dir + "/emb.txt", "--out", dir + "/model",
               "--seed", "5", "--poly-min-freq", "25"}) == 0);
  CHECK(file_exists(dir + "/model/manifest.txt"));

  // repeated identical invocations produce byte-identical bundles
  REQUIRE(run({"train", "--config", cfg, "--corpus", dir + "/normalized.tsv", "--trainset",
               dir + "/trainset.tsv", "--emb", dir + "/emb.txt", "--out", dir + "/model2",
               "--seed", "5", "--poly-min-freq", "25"}) == 0);
  for (const char* f : {"/manifest.txt", "/stage1_n1.forest", "/stage2_n1.forest",
                        "/schemas.txt", "/polysemy.txt", "/embeddings.txt"}) {
    CHECK(read_file(dir + "/model" + std::string(f)) ==
          read_file(dir + "/model2" + std::string(f)));
  }

  REQUIRE(run({"infer", "--config", cfg, "--model", dir + "/model", "--out",
               dir + "/extractions.tsv", "--seed", "5"}) == 0);
  auto extractions = load_extractions(dir + "/extractions.tsv");
  CHECK(!extractions.empty());

  // concept extractions never overlap within a verbatim
  std::map<std::string, std::vector<std::pair<uint32_t, uint32_t>>> concept_spans;
  for (const Extraction& e : extractions) {
    if (e.is_concept) concept_spans[e.verbatim_id].emplace_back(e.start, e.n);
  }
  for (const auto& [vid, spans] : concept_spans) {
    for (size_t i = 0; i < spans.size(); ++i) {
      for (size_t j = i + 1; j < spans.size(); ++j) {
        bool overlap = spans[i].first < spans[j].first + spans[j].second &&
                       spans[j].first < spans[i].first + spans[i].second;
        CHECK(!overlap);
      }
    }
  }

  REQUIRE(run({"eval", "--config", cfg, "--extractions", dir + "/extractions.tsv", "--out",
               dir + "/report.tsv"}) == 0);
  std::string report = read_file(dir + "/report.tsv");
  CHECK(report.find("stage1-overall") != std::string::npos);
  CHECK(report.find("holdout-recovery") != std::string::npos);
}

TEST_CASE("embed reruns are byte identical") {
  std::string dir = tmp_dir("onto_cli_embed");
  REQUIRE(run({"synth", "--out", dir, "--size", "150", "--concepts", "50", "--seed", "3"}) == 0);
  REQUIRE(run({"embed", "--corpus", dir + "/corpus.tsv", "--out", dir + "/e1.txt", "--dim",
               "8", "--epochs", "1", "--min-count", "2", "--seed", "9"}) == 0);
  REQUIRE(run({"embed", "--corpus", dir + "/corpus.tsv", "--out", dir + "/e2.txt", "--dim",
               "8", "--epochs", "1", "--min-count", "2", "--seed", "9"}) == 0);
  CHECK(read_file(dir + "/e1.txt") == read_file(dir + "/e2.txt"));
}

TEST_CASE("importance subcommand runs both modes") {
  std::string dir = tmp_dir("onto_cli_imp");
  REQUIRE(run({"synth", "--out", dir, "--size", "400", "--concepts", "50", "--seed", "7"}) == 0);
  std::string cfg = dir + "/config.txt";
  REQUIRE(run({"embed", "--corpus", dir + "/corpus.tsv", "--out", dir + "/emb.txt", "--dim",
               "8", "--epochs", "1", "--min-count", "3", "--seed", "7"}) == 0);
  REQUIRE(run({"trainset", "--config", cfg, "--out", dir + "/trainset.tsv", "--quota", "80",
               "--seed", "7"}) == 0);
  REQUIRE(run({"importance", "--config", cfg, "--trainset", dir + "/trainset.tsv", "--emb",
               dir + "/emb.txt", "--mode", "drop-one", "--n", "1", "--trees", "3", "--out",
               dir + "/drop.tsv", "--seed", "7", "--poly-min-freq", "30"}) == 0);
  CHECK(read_file(dir + "/drop.tsv").find("word2vec") != std::string::npos);
  REQUIRE(run({"importance", "--config", cfg, "--trainset", dir + "/trainset.tsv", "--emb",
               dir + "/emb.txt", "--mode", "backward", "--n", "1", "--trees", "3", "--out",
               dir + "/backward.tsv", "--seed", "7", "--poly-min-freq", "30"}) == 0);
  CHECK(read_file(dir + "/backward.tsv").find("# kept") != std::string::npos);
  CHECK(run({"importance", "--config", cfg, "--trainset", dir + "/trainset.tsv", "--emb",
             dir + "/emb.txt", "--mode", "sideways"}) == 2);
}

TEST_CASE("active-learn batch mode with a scripted label file") {
  std::string dir = tmp_dir("onto_cli_al");
  REQUIRE(run({"synth", "--out", dir, "--size", "500", "--concepts", "50", "--seed", "19"}) == 0);
  std::string cfg = dir + "/config.txt";
  REQUIRE(run({"normalize", "--config", cfg, "--out", dir + "/normalized.tsv", "--dim", "8",
               "--epochs", "1", "--min-count", "3", "--seed", "19"}) == 0);
  REQUIRE(run({"embed", "--corpus", dir + "/normalized.tsv", "--out", dir + "/emb.txt",
               "--dim", "8", "--epochs", "1", "--min-count", "3", "--seed", "19"}) == 0);
  REQUIRE(run({"trainset", "--config", cfg, "--corpus", dir + "/normalized.tsv", "--out",
               dir + "/trainset.tsv", "--quota", "150", "--seed", "19"}) == 0);

  // label every candidate span of the corpus from gold (full answer key)
  auto corpus = load_corpus(dir + "/normalized.tsv");
  auto gold = load_gold(dir + "/gold.tsv");
  std::set<std::string> gold_keys;
  for (const GoldEntry& g : gold) {
    gold_keys.insert(g.verbatim_id + "\t" + std::to_string(g.start) + "\t" +
                     std::to_string(g.n));
  }
  std::string labels;
  for (const Verbatim& v : corpus) {
    for (const Collocate& c : extract_ngrams(v, 4)) {
      std::string key = v.id + "\t" + std::to_string(c.start) + "\t" + std::to_string(c.n);
      labels += c.phrase + "\t" + key + "\t" +
                (gold_keys.count(key) ? "CONCEPT" : "IRRELEVANT") + "\n";
    }
  }
  atomic_write(dir + "/labels.tsv", labels);

  REQUIRE(run({"active-learn", "--config", cfg, "--corpus", dir + "/normalized.tsv",
               "--trainset", dir + "/trainset.tsv", "--emb", dir + "/emb.txt", "--labels",
               dir + "/labels.tsv", "--out", dir + "/augmented.tsv", "--rounds", "2",
               "--sample", "60", "--trees", "5", "--seed", "19", "--poly-min-freq", "40"}) ==
          0);
  TrainingSet before = TrainingSet::load(dir + "/trainset.tsv");
  TrainingSet after = TrainingSet::load(dir + "/augmented.tsv");
  CHECK(after.samples.size() >= before.samples.size());
  std::set<std::string> keys;
  for (const LabeledSample& s : after.samples) CHECK(keys.insert(s.key()).second);
}
