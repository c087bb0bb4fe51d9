#include <benchmark/benchmark.h>

#include "blockselect/convergence_lab.hpp"
#include "blockselect/rng.hpp"
#include "blockselect/selector_baselines.hpp"
#include "blockselect/selector_oca.hpp"

using namespace blockselect;

namespace {

// Constant-time oracle; isolates the sweep machinery from fit cost.
class HashScorer final : public Scorer {
 public:
  explicit HashScorer(std::size_t n) : n_(n) {}
  std::size_t n_features() const override { return n_; }

 protected:
  Evaluation evaluate(const SelectionMask& mask) override {
    Evaluation out;
    std::uint64_t h = 1469598103934665603ull;
    for (std::uint8_t b : mask.bits) {
      h ^= b;
      h *= 1099511628211ull;
    }
    out.score = {static_cast<std::size_t>(h % 1000), 1000};
    out.importance.values.assign(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      if (mask.test(i)) out.importance.values[i] = 1.0;
    }
    return out;
  }

 private:
  std::size_t n_;
};

void BM_BinarySweep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  OcaConfig cfg;
  cfg.eps2 = 0.0;
  for (auto _ : state) {
    HashScorer scorer(n);
    benchmark::DoNotOptimize(binary_sweep_phase(scorer, SelectionMask::ones(n), cfg));
  }
}
BENCHMARK(BM_BinarySweep)->Arg(64)->Arg(135)->Arg(512);

void BM_OcaOnTableOracle(benchmark::State& state) {
  const std::size_t n = 120;
  BlockSpec spec;
  for (std::size_t b = 0; b < 12; ++b) {
    Block block;
    block.name = "b" + std::to_string(b);
    for (std::size_t l = 0; l < 9; ++l) block.members.push_back(b * 9 + l);
    spec.blocks.push_back(std::move(block));
  }
  for (std::size_t s = 108; s < n; ++s) spec.singles.push_back(s);
  OcaConfig cfg;
  for (auto _ : state) {
    HashScorer scorer(n);
    benchmark::DoNotOptimize(run_oca(scorer, spec, cfg));
  }
}
BENCHMARK(BM_OcaOnTableOracle);

void BM_RcdSteps(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const QuadraticProblem problem = QuadraticProblem::random_spd(n, 3, 0.5, 20.0);
  Rng rng(4);
  Eigen::VectorXd x0(n);
  for (std::size_t i = 0; i < n; ++i) x0(static_cast<Eigen::Index>(i)) = rng.normal();
  for (auto _ : state) {
    benchmark::DoNotOptimize(rcd_minimize(problem, x0, 500, 10, 5));
  }
  state.SetItemsProcessed(state.iterations() * 500 * 10);
}
BENCHMARK(BM_RcdSteps)->Arg(10)->Arg(50);

}  // namespace

BENCHMARK_MAIN();
