#include <benchmark/benchmark.h>

#include <map>
#include <random>

#include "rerankkit/features.hpp"
#include "rerankkit/model.hpp"
#include "rerankkit/synth.hpp"
#include "rerankkit/train.hpp"

using namespace rerankkit;

namespace {

const Scene& kitti_scene(int proposals) {
  static std::map<int, Scene> cache;
  auto it = cache.find(proposals);
  if (it == cache.end()) {
    SynthConfig cfg;
    cfg.width = 1242;
    cfg.height = 375;
    cfg.num_scenes = 1;
    cfg.proposals_per_scene = proposals;
    it = cache.emplace(proposals, generate_synthetic(cfg).scenes.front()).first;
  }
  return it->second;
}

void BM_IntegralBuild(benchmark::State& state) {
  const Scene& s = kitti_scene(100);
  for (auto _ : state) {
    auto img = IntegralImage::build(s.width, s.height, [&](int r, int c) { return s.seg_mask(r, c) == 2; });
    benchmark::DoNotOptimize(img.total());
  }
  state.SetItemsProcessed(state.iterations() * s.width * s.height);
}
BENCHMARK(BM_IntegralBuild)->Unit(benchmark::kMicrosecond);

void BM_BoxSum(benchmark::State& state) {
  const Scene& s = kitti_scene(100);
  const auto img = IntegralImage::build(s.width, s.height, [&](int r, int c) { return s.seg_mask(r, c) == 1; });
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> cx(0, s.width), cy(0, s.height);
  std::vector<PixelRect> rects;
  for (int i = 0; i < 1024; ++i) {
    const int a = cx(rng), b = cx(rng), c = cy(rng), d = cy(rng);
    rects.push_back({std::min(a, b), std::min(c, d), std::max(a, b), std::max(c, d)});
  }
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(img.box_sum(rects[i++ & 1023]));
}
BENCHMARK(BM_BoxSum);

void BM_ExtractScoreSort(benchmark::State& state) {
  const Scene& s = kitti_scene(static_cast<int>(state.range(0)));
  ScoringModel model;
  model.class_id = 2;
  model.weights = {1.0, -0.2, 0.5, 0.8, 0.3, 0.4, 0.1};
  const FeatureConfig fc;
  for (auto _ : state) {
    const Ranking r = rerank(model, extract_all(s, 2, fc));
    benchmark::DoNotOptimize(r.order.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ExtractScoreSort)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_Train(benchmark::State& state) {
  SynthConfig cfg;
  cfg.num_scenes = static_cast<int>(state.range(0));
  const SyntheticDataset ds = generate_synthetic(cfg);
  const auto examples = build_examples(ds.scenes, 2, FeatureConfig{}, LossMode::kOneMinusIou);
  for (auto _ : state) {
    const TrainResult r = train(examples, 2, TrainConfig{});
    benchmark::DoNotOptimize(r.model.weights.data());
  }
}
BENCHMARK(BM_Train)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
