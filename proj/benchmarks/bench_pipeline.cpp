#include <benchmark/benchmark.h>

#include <random>

#include "opencat/embedding.hpp"
#include "opencat/ibl.hpp"
#include "opencat/pipeline.hpp"
#include "opencat/reference_frame.hpp"
#include "opencat/synthetic.hpp"

using namespace opencat;

namespace {

const ObjectCloud& sample_cloud() {
  static const ObjectCloud cloud = make_synthetic_object(2, 0, 0, SyntheticOptions{5000, 0.003});
  return cloud;
}

void BM_ConstructLrf(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(construct_lrf(sample_cloud()));
}
BENCHMARK(BM_ConstructLrf);

void BM_RenderViews(benchmark::State& state) {
  RenderOptions opts;
  opts.resolution = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(render_object(sample_cloud(), opts));
}
BENCHMARK(BM_RenderViews)->Arg(64)->Arg(224);

void BM_FallbackEmbedding(benchmark::State& state) {
  const Pipeline pipeline = Pipeline::create(PipelineConfig::fallback_profile());
  for (auto _ : state) benchmark::DoNotOptimize(represent_object(sample_cloud(), pipeline));
}
BENCHMARK(BM_FallbackEmbedding)->Unit(benchmark::kMillisecond);

void BM_Classify(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  auto feature = [&] {
    FeatureVector f;
    f.layout.shape_length = 1200;
    f.values.resize(1200);
    for (auto& v : f.values) v = n(rng);
    return f;
  };
  PerceptualMemory memory;
  for (int64_t i = 0; i < state.range(0); ++i) memory.teach("c" + std::to_string(i % 20), feature());
  const FeatureVector q = feature();
  for (auto _ : state) benchmark::DoNotOptimize(memory.classify(q));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Classify)->Range(64, 4096)->Complexity(benchmark::oN);

}  // namespace

BENCHMARK_MAIN();
