// Serial reference vs OpenMP batch annotation over a synthetic corpus built
// from the preview fixture sentences.

#include <fstream>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "unscientify/batch.hpp"
#include "unscientify/knowledge.hpp"

using namespace unscientify;

namespace {

const PatternLibrary& library() {
  static const PatternLibrary lib = load_library(UNSCIENTIFY_DEFAULT_PATTERNS);
  return lib;
}

std::vector<Sentence> corpus(std::size_t n) {
  std::vector<std::string> lines;
  std::ifstream in(std::string(UNSCIENTIFY_DEFAULT_PATTERNS) + "/../corpora/fixtures.txt");
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line[0] != '#') lines.push_back(line);
  }
  if (lines.empty()) lines.push_back("It is possible that the effect depends on temperature.");
  Document doc;
  for (std::size_t i = 0; i < n; ++i) {
    doc.sentences.push_back(make_naive_sentence("s" + std::to_string(i), lines[i % lines.size()]));
  }
  return prepare_document(doc, library()).sentences;
}

void BM_Serial(benchmark::State& state) {
  auto sentences = corpus(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(annotate_batch_serial(sentences, library()));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_Parallel(benchmark::State& state) {
  auto sentences = corpus(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(annotate_batch(sentences, library()));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_Serial)->Arg(256)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Parallel)->Arg(256)->Arg(2048)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
