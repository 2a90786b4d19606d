// Times the OpenMP kernels against their serial reference paths on a
// generated corpus: stats building, skip-gram training, polysemy
// fitting, forest training, and inference.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "onto/corpus.hpp"
#include "onto/embeddings.hpp"
#include "onto/features.hpp"
#include "onto/forest.hpp"
#include "onto/io_util.hpp"
#include "onto/lexicon.hpp"
#include "onto/parallel.hpp"
#include "onto/pipeline.hpp"
#include "onto/synth.hpp"

using namespace onto;

namespace {

double seconds(std::chrono::steady_clock::time_point a, std::chrono::steady_clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

template <class F>
double timed(F&& fn) {
  auto t0 = std::chrono::steady_clock::now();
  fn();
  return seconds(t0, std::chrono::steady_clock::now());
}

void report(const char* name, double serial, double parallel, int threads) {
  std::printf("%-22s serial %8.3fs   %d threads %8.3fs   speedup %.2fx\n", name, serial, threads,
              parallel, parallel > 0 ? serial / parallel : 0.0);
}

}  // namespace

int main(int argc, char** argv) {
  int threads = hardware_threads();
  int size = 4000;
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a == "--threads" && i + 1 < argc) threads = std::atoi(argv[++i]);
    else if (a == "--size" && i + 1 < argc) size = std::atoi(argv[++i]);
  }
  std::printf("benchmark: %d verbatims, %d threads\n\n", size, threads);

  std::string dir = std::filesystem::temp_directory_path() / "onto_bench";
  SynthSpec spec;
  spec.size = size;
  spec.concepts = 120;
  generate_synthetic(spec, dir);

  std::vector<Verbatim> corpus = load_corpus(dir + "/corpus.tsv");
  LexiconPaths paths;
  paths.dictionary = dir + "/dictionary.txt";
  paths.ontology = dir + "/ontology.tsv";
  paths.abbreviations = dir + "/abbreviations.tsv";
  paths.senses = dir + "/senses.tsv";
  paths.stop_words = dir + "/stopwords.txt";
  paths.noise_words = dir + "/noisewords.txt";
  Lexicons lex = load_lexicons(paths);

  CorpusStats stats;
  {
    double ts = timed([&] { stats = build_stats_serial(corpus, 4); });
    double tp = timed([&] { build_stats_parallel(corpus, 4, threads); });
    report("build_stats", ts, tp, threads);
  }

  SkipGramParams sp;
  sp.dim = 50;
  sp.epochs = 2;
  sp.min_count = 5;
  EmbeddingTable emb;
  {
    double ts = timed([&] { emb = train_skipgram(corpus, sp); });
    SkipGramParams par = sp;
    par.threads = threads;
    double tp = timed([&] { train_skipgram(corpus, par); });
    report("train_skipgram", ts, tp, threads);
  }

  PolysemyModel poly;
  {
    PolysemyFitOptions opt;
    opt.threads = 1;
    double ts = timed([&] { poly = fit_polysemy_all(corpus, emb, lex.senses, stats, opt); });
    opt.threads = threads;
    double tp = timed([&] { fit_polysemy_all(corpus, emb, lex.senses, stats, opt); });
    report("fit_polysemy_all", ts, tp, threads);
  }

  TrainingSet ts_set = build_training_set(corpus, lex.onto, lex.stops, 1500, 42);
  FeatureModels fm;
  fm.emb = emb;
  fm.poly = poly;
  fm.tagger = std::make_shared<BaselineTagger>();
  SampleFeatures sf = assemble_samples(ts_set.samples, corpus, lex, fm, threads);

  TwoStageModel model;
  {
    ForestConfig fc;
    double t1 = timed([&] {
      model = train_two_stage(sf, fm, lex.onto.types, fc, 42, 1);
    });
    double t2 = timed([&] { train_two_stage(sf, fm, lex.onto.types, fc, 42, threads); });
    report("train_two_stage", t1, t2, threads);
  }

  {
    double t1 = timed([&] { infer(corpus, model, fm, lex, 1); });
    double t2 = timed([&] { infer(corpus, model, fm, lex, threads); });
    report("infer", t1, t2, threads);
  }

  return 0;
}
