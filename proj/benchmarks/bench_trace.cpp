#include <benchmark/benchmark.h>

#include <string>

#include "rsg/pipeline.hpp"

namespace {

void BM_TraceCorpus(benchmark::State& state, const char* name) {
  const rsg::Manifest m = rsg::load_manifest(std::string(RSG_CORPUS_DIR) + "/" + name);
  for (auto _ : state) {
    auto r = rsg::run_trace(m);
    benchmark::DoNotOptimize(r.graphic.loops.size());
  }
}

void BM_TraceCircleStep(benchmark::State& state) {
  rsg::Manifest m = rsg::load_manifest(std::string(RSG_CORPUS_DIR) + "/circle.json");
  m.step = 1.0 / static_cast<double>(state.range(0));
  for (auto _ : state) {
    auto r = rsg::run_trace(m);
    benchmark::DoNotOptimize(r.graphic.loops.size());
  }
}

}  // namespace

BENCHMARK_CAPTURE(BM_TraceCorpus, circle, "circle.json")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_TraceCorpus, four_cusps, "four_cusps.json")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_TraceCorpus, ten_cusps, "ten_cusps.json")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TraceCircleStep)->Arg(250)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
