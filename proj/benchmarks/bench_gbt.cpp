#include <benchmark/benchmark.h>

#include "blockselect/datagen.hpp"
#include "blockselect/scorer.hpp"

using namespace blockselect;

namespace {

BlockDataset make_data(std::size_t n_blocks, std::size_t block_len, std::size_t singles,
                       std::size_t n_samples) {
  SynthSpec spec;
  spec.n_blocks = n_blocks;
  spec.block_len = block_len;
  spec.p_singles = singles;
  spec.n_samples = n_samples;
  spec.informative_block_lags = {{0, 0}, {1, 0}};
  spec.informative_singles.clear();
  spec.seed = 1;
  return gen_block_dataset(spec);
}

void BM_GbtFit(benchmark::State& state) {
  const auto n_features = static_cast<std::size_t>(state.range(0));
  const auto n_samples = static_cast<std::size_t>(state.range(1));
  const BlockDataset data = make_data(n_features / 8, 8, n_features % 8, n_samples);
  const GbtTrainContext ctx(data.X, data.y);
  const SelectionMask mask = SelectionMask::ones(data.X.n_features());
  GbtParams params;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_gbt(ctx, mask, params));
  }
  state.SetItemsProcessed(state.iterations() * n_samples);
}
BENCHMARK(BM_GbtFit)->Args({16, 1000})->Args({56, 1000})->Args({112, 1000})->Args({56, 4000})
    ->Unit(benchmark::kMillisecond);

void BM_TrainContextBuild(benchmark::State& state) {
  const BlockDataset data = make_data(7, 8, 0, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(GbtTrainContext(data.X, data.y));
  }
}
BENCHMARK(BM_TrainContextBuild)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

void BM_ScoreMaskCacheMiss(benchmark::State& state) {
  const BlockDataset data = make_data(7, 8, 0, 1500);
  ScorerConfig cfg;
  GbtScorer scorer(data.X, data.y, cfg);
  SelectionMask mask = SelectionMask::ones(data.X.n_features());
  std::size_t toggle = 0;
  for (auto _ : state) {
    mask.flip(toggle % mask.size());
    ++toggle;
    benchmark::DoNotOptimize(scorer.score(mask));
  }
}
BENCHMARK(BM_ScoreMaskCacheMiss)->Unit(benchmark::kMillisecond);

void BM_ScoreMaskCacheHit(benchmark::State& state) {
  const BlockDataset data = make_data(7, 8, 0, 1500);
  ScorerConfig cfg;
  GbtScorer scorer(data.X, data.y, cfg);
  const SelectionMask mask = SelectionMask::ones(data.X.n_features());
  scorer.score(mask);
  for (auto _ : state) {
    benchmark::DoNotOptimize(scorer.score(mask));
  }
}
BENCHMARK(BM_ScoreMaskCacheHit);

}  // namespace

BENCHMARK_MAIN();
