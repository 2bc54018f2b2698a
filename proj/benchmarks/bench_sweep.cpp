#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "rsg/classifier.hpp"
#include "rsg/graphic_io.hpp"
#include "rsg/pipeline.hpp"
#include "rsg/sweep.hpp"
#ifdef RSG_HAVE_SYNTHETIC
#include "synthetic.hpp"
#endif

namespace {

rsg::Graphic traced(const char* name) {
  return rsg::run_trace(rsg::load_manifest(std::string(RSG_CORPUS_DIR) + "/" + name)).graphic;
}

void BM_SweepTenCusps(benchmark::State& state) {
  const rsg::Graphic g = traced("ten_cusps.json");
  for (auto _ : state) {
    for (auto v : rsg::kAllVariants) benchmark::DoNotOptimize(rsg::sweep(g, v).events.size());
  }
}

void BM_Validate(benchmark::State& state) {
  const rsg::Graphic g = traced("ten_cusps.json");
  for (auto _ : state) benchmark::DoNotOptimize(rsg::validate(g).size());
}

#ifdef RSG_HAVE_SYNTHETIC
void BM_SweepSynthetic(benchmark::State& state) {
  std::mt19937_64 rng(20240601);
  std::vector<rsg::Graphic> pool;
  for (int i = 0; i < 64; ++i) pool.push_back(rsg::testing::random_valid_graphic(rng, static_cast<int>(state.range(0))));
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(rsg::sweep(pool[i++ % pool.size()], rsg::Variant::Up).events.size());
  }
}
BENCHMARK(BM_SweepSynthetic)->Arg(0)->Arg(2)->Arg(4);
#endif

}  // namespace

BENCHMARK(BM_SweepTenCusps)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Validate)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
