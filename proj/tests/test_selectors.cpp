#include <algorithm>

#include "doctest.h"

#include "blockselect/datagen.hpp"
#include "blockselect/pipeline.hpp"
#include "blockselect/selector_baselines.hpp"
#include "blockselect/selector_oca.hpp"
#include "table_scorer.hpp"

using namespace blockselect;
using blockselect::testing::TableScorer;
using blockselect::testing::brute_force_optimum;
using blockselect::testing::is_one_flip_local_optimum;

namespace {

OcaConfig exact_config() {
  OcaConfig cfg;
  cfg.eps1 = 0.0;
  cfg.eps2 = 0.0;
  return cfg;
}

BlockSpec two_blocks_of_three() {
  BlockSpec spec;
  spec.blocks.push_back({"a", {0, 1, 2}});
  spec.blocks.push_back({"b", {3, 4, 5}});
  return spec;
}

SelectionMask mask_for_counts(const TableScorer& scorer, const BlockSpec& spec,
                              const BlockCountVector& counts) {
  ImportanceVector imp{scorer.raw_importance()};
  return counts_to_mask(counts, imp, spec);
}

void check_monotone_trace(const SelectionResult& result) {
  for (std::size_t i = 1; i < result.trace.size(); ++i) {
    REQUIRE(result.trace[i].inner_score.n_correct >=
            result.trace[i - 1].inner_score.n_correct);
    REQUIRE(result.trace[i].evaluation_index >= result.trace[i - 1].evaluation_index);
  }
}

}  // namespace

TEST_CASE("j_best: L_min = 1 forces k* = 1 with a single evaluation") {
  BlockSpec spec;
  spec.blocks.push_back({"a", {0}});
  spec.blocks.push_back({"b", {1, 2, 3}});
  spec.singles = {4};
  TableScorer scorer(5, 11);
  const ImportanceVector imp{scorer.raw_importance()};
  const JBestResult r = j_best_search(scorer, spec, imp, exact_config());
  CHECK(r.k_star == 1);
  CHECK(r.x0.counts == std::vector<std::size_t>{1, 1});
  CHECK(r.x0.singles_included);
  CHECK(scorer.evaluations() == 1);
}

TEST_CASE("j_best: tie at the maximum keeps the smallest k") {
  BlockSpec spec;
  spec.blocks.push_back({"a", {0, 1, 2}});
  TableScorer scorer(3, 12);
  scorer.set_importance({0.5, 0.3, 0.2});  // ranking = column order
  const ImportanceVector imp{scorer.raw_importance()};
  scorer.set(mask_for_counts(scorer, spec, {{1}, true}), 600);
  scorer.set(mask_for_counts(scorer, spec, {{2}, true}), 650);
  scorer.set(mask_for_counts(scorer, spec, {{3}, true}), 650);
  const JBestResult r = j_best_search(scorer, spec, imp, exact_config());
  CHECK(r.k_star == 2);
}

TEST_CASE("j_best on generated data matches an exhaustive k sweep") {
  SynthSpec synth;  // lag-0-only informative signal
  synth.seed = 13;
  synth.n_samples = 1200;
  const BlockDataset data = gen_block_dataset(synth);
  ScorerConfig sc;
  sc.params.n_trees = 40;
  sc.inner_split_seed = 99;

  GbtScorer scorer(data.X, data.y, sc);
  const ImportanceVector imp =
      scorer.importance(SelectionMask::ones(data.X.n_features()));
  const JBestResult r = j_best_search(scorer, data.blocks, imp, exact_config());

  // independent sweep with a fresh oracle
  GbtScorer fresh(data.X, data.y, sc);
  std::size_t best_k = 0;
  ScoreValue best_score;
  for (std::size_t k = 1; k <= data.blocks.min_block_len(); ++k) {
    BlockCountVector counts{std::vector<std::size_t>(data.blocks.n_blocks(), k), true};
    const ScoreValue s = fresh.score(counts_to_mask(counts, imp, data.blocks));
    if (best_k == 0 || s.n_correct > best_score.n_correct) {
      best_k = k;
      best_score = s;
    }
  }
  CHECK(r.k_star == best_k);
  CHECK(r.k_star == 1);  // calibrated: only lag 0 carries signal
}

TEST_CASE("block_phase: huge eps1 runs exactly one sweep") {
  const BlockSpec spec = two_blocks_of_three();
  TableScorer scorer(6, 14);
  const ImportanceVector imp{scorer.raw_importance()};
  OcaConfig cfg = exact_config();
  cfg.eps1 = 1.0;
  std::vector<TraceRow> trace;
  block_phase(scorer, spec, imp, {{1, 1}, true}, cfg, &trace);
  CHECK(trace.size() == spec.n_blocks());  // one adoption per block, one sweep
}

TEST_CASE("block_phase: single block is exhaustive on that axis") {
  BlockSpec spec;
  spec.blocks.push_back({"a", {0, 1, 2, 3}});
  spec.singles = {4};
  TableScorer scorer(5, 15);
  const ImportanceVector imp{scorer.raw_importance()};
  const BlockCountVector result =
      block_phase(scorer, spec, imp, {{2}, true}, exact_config());

  std::size_t best_j = 0;
  ScoreValue best{0, 0};
  for (std::size_t j = 0; j <= 4; ++j) {
    const ScoreValue s = scorer.value(mask_for_counts(scorer, spec, {{j}, true}));
    if (j == 0 || s.n_correct > best.n_correct) {
      best_j = j;
      best = s;
    }
  }
  CHECK(result.counts[0] == best_j);
}

TEST_CASE("block_phase: 2x3 blocks reach a coordinate-wise optimum") {
  const BlockSpec spec = two_blocks_of_three();
  for (std::uint64_t seed = 20; seed < 30; ++seed) {
    TableScorer scorer(6, seed);
    const ImportanceVector imp{scorer.raw_importance()};
    const BlockCountVector result =
        block_phase(scorer, spec, imp, {{1, 1}, true}, exact_config());
    const ScoreValue final_score =
        scorer.value(mask_for_counts(scorer, spec, result));

    // no single-axis count change improves the score
    for (std::size_t b = 0; b < 2; ++b) {
      for (std::size_t j = 0; j <= 3; ++j) {
        if (j == result.counts[b]) continue;
        BlockCountVector other = result;
        other.counts[b] = j;
        const ScoreValue s = scorer.value(mask_for_counts(scorer, spec, other));
        REQUIRE(s.n_correct <= final_score.n_correct);
      }
    }
  }
}

TEST_CASE("binary sweep: starting at the global optimum changes nothing") {
  TableScorer scorer(8, 31);
  // plant the optimum at a known mask
  SelectionMask opt = SelectionMask::zeros(8);
  opt.set(1, true);
  opt.set(4, true);
  scorer.set(opt, 1001);
  const BinarySweepResult r = binary_sweep_phase(scorer, opt, exact_config());
  CHECK(r.mask == opt);
  CHECK(r.score.n_correct == 1001);
  CHECK(scorer.evaluations() == 9);  // the start plus its 8 neighbors
}

TEST_CASE("binary sweep: N=10 table instances end 1-flip optimal, below the global optimum") {
  for (std::uint64_t seed = 40; seed < 50; ++seed) {
    TableScorer scorer(10, seed);
    const BinarySweepResult r =
        binary_sweep_phase(scorer, SelectionMask::ones(10), exact_config());
    CHECK(is_one_flip_local_optimum(scorer, r.mask));
    CHECK(r.score.n_correct <= brute_force_optimum(scorer).n_correct);
    CHECK(r.score.n_correct == scorer.value(r.mask).n_correct);
  }
}

TEST_CASE("binary sweep: equal-score flips are kept only when they clear a bit") {
  // constant table: every mask scores the same, so the sweep must strip the
  // mask down to a single bit and stop
  TableScorer scorer(6, 51);
  for (std::size_t idx = 0; idx < 64; ++idx) {
    SelectionMask m = SelectionMask::zeros(6);
    for (std::size_t i = 0; i < 6; ++i) {
      if (idx & (1u << i)) m.set(i, true);
    }
    scorer.set(m, 500);
  }
  const BinarySweepResult r =
      binary_sweep_phase(scorer, SelectionMask::ones(6), exact_config());
  CHECK(r.mask.popcount() == 1);
  CHECK(r.score.n_correct == 500);
}

TEST_CASE("run_bca from a local optimum returns it unchanged") {
  TableScorer probe(9, 60);
  const SelectionResult first = run_bca(probe, exact_config());
  TableScorer fresh(9, 60);
  const SelectionResult again = run_bca(fresh, exact_config(), first.mask);
  CHECK(again.mask == first.mask);
  CHECK(again.inner_score == first.inner_score);
}

TEST_CASE("run_oca with zero blocks equals run_bca from all-ones") {
  for (std::uint64_t seed = 70; seed < 90; ++seed) {
    const std::size_t n = 5 + seed % 4;
    BlockSpec spec;
    for (std::size_t i = 0; i < n; ++i) spec.singles.push_back(i);

    TableScorer oca_scorer(n, seed);
    TableScorer bca_scorer(n, seed);
    const SelectionResult oca = run_oca(oca_scorer, spec, exact_config());
    const SelectionResult bca = run_bca(bca_scorer, exact_config());
    REQUIRE(oca.mask == bca.mask);
    REQUIRE(oca.inner_score == bca.inner_score);
    REQUIRE(oca.evaluations == bca.evaluations);
  }
}

TEST_CASE("run_oca: trace is monotone, budget counts distinct masks") {
  BlockSpec spec = two_blocks_of_three();
  spec.blocks.push_back({"c", {6, 7}});
  spec.singles = {8, 9};
  for (std::uint64_t seed = 100; seed < 110; ++seed) {
    TableScorer scorer(10, seed);
    const SelectionResult result = run_oca(scorer, spec, exact_config());
    check_monotone_trace(result);
    CHECK(result.evaluations == scorer.evaluations());
    CHECK(result.mask.popcount() > 0);
    CHECK(is_one_flip_local_optimum(scorer, result.mask));
    CHECK(result.phase_boundaries.j_best_end <= result.phase_boundaries.block_end);
    CHECK(result.phase_boundaries.block_end <= result.phase_boundaries.binary_end);
    CHECK(result.phase_boundaries.binary_end == result.trace.size());
    // the final mask's score is the last accepted state's score
    CHECK(result.trace.back().inner_score == result.inner_score);
  }
}

TEST_CASE("run_oca is deterministic and thread-count independent") {
  const BlockSpec spec = two_blocks_of_three();
  OcaConfig serial = exact_config();
  OcaConfig parallel = exact_config();
  parallel.threads = 4;
  TableScorer a(6, 120);
  TableScorer b(6, 120);
  const SelectionResult ra = run_oca(a, spec, serial);
  const SelectionResult rb = run_oca(b, spec, parallel);
  CHECK(ra.mask == rb.mask);
  CHECK(ra.evaluations == rb.evaluations);
  REQUIRE(ra.trace.size() == rb.trace.size());
  for (std::size_t i = 0; i < ra.trace.size(); ++i) {
    CHECK(ra.trace[i].inner_score == rb.trace[i].inner_score);
    CHECK(ra.trace[i].popcount == rb.trace[i].popcount);
  }
}

TEST_CASE("run_rfe: target N returns all-ones; rounds nest; order follows importance") {
  SUBCASE("no elimination at target N") {
    TableScorer scorer(6, 130);
    RfeConfig cfg;
    cfg.target_count = 6;
    const SelectionResult r = run_rfe(scorer, cfg);
    CHECK(r.mask == SelectionMask::ones(6));
    CHECK(r.rfe_rounds.size() == 1);
  }
  SUBCASE("removal order is ascending importance") {
    TableScorer scorer(3, 131);
    scorer.set_importance({0.2, 0.5, 0.3});
    RfeConfig cfg;
    cfg.target_count = 1;
    const SelectionResult r = run_rfe(scorer, cfg);
    // eliminate f0 (0.2) then f2 (0.3), keeping f1
    REQUIRE(r.rfe_rounds.size() == 3);
    CHECK(r.rfe_rounds[0].n_selected == 3);
    CHECK(r.rfe_rounds[1].n_selected == 2);
    CHECK(r.rfe_rounds[2].n_selected == 1);
    CHECK(r.mask.bits == std::vector<std::uint8_t>{0, 1, 0});
  }
  SUBCASE("ties remove the higher column index first") {
    TableScorer scorer(3, 132);
    scorer.set_importance({0.4, 0.4, 0.2});
    RfeConfig cfg;
    cfg.target_count = 1;
    const SelectionResult r = run_rfe(scorer, cfg);
    // f2 (0.2) leaves first, then the 0.4 tie drops f1 before f0
    CHECK(r.mask.bits == std::vector<std::uint8_t>{1, 0, 0});
  }
  SUBCASE("masks nest across targets") {
    std::vector<SelectionMask> masks;
    for (std::size_t target : {2ul, 4ul, 7ul}) {
      TableScorer scorer(8, 133);
      RfeConfig cfg;
      cfg.target_count = target;
      masks.push_back(run_rfe(scorer, cfg).mask);
    }
    for (std::size_t small = 0; small + 1 < masks.size(); ++small) {
      for (std::size_t i = 0; i < 8; ++i) {
        if (masks[small].test(i)) REQUIRE(masks[small + 1].test(i));
      }
    }
  }
  SUBCASE("step lands exactly on the target") {
    TableScorer scorer(9, 134);
    RfeConfig cfg;
    cfg.target_count = 4;
    cfg.step = 3;
    const SelectionResult r = run_rfe(scorer, cfg);
    CHECK(r.mask.popcount() == 4);
  }
}

TEST_CASE("run_rfe aborts on a degenerate model") {
  SynthSpec synth;
  synth.n_samples = 120;
  synth.seed = 140;
  BlockDataset data = gen_block_dataset(synth);
  for (auto& label : data.y.labels) label = 1;  // single-class training data
  ScorerConfig sc;
  sc.params.n_trees = 5;
  GbtScorer scorer(data.X, data.y, sc);
  RfeConfig cfg;
  cfg.target_count = 2;
  CHECK_THROWS_WITH_AS(run_rfe(scorer, cfg), doctest::Contains("degenerate"),
                       std::runtime_error);
}

TEST_CASE("calibrated benchmark instance: oca comes out lean without losing score") {
  const std::uint64_t seed = benchmark_seeds().front();
  const BlockDataset data = gen_block_dataset(benchmark_synth_spec(seed));
  const Dataset ds{data.X, data.y, std::nullopt};
  const RunConfig cfg = benchmark_run_config(seed);
  const PreparedData prep = prepare_data(ds, cfg.outer_split);

  const SelectionResult oca = run_method_oca(prep, data.blocks, cfg);
  ScoreValue full_inner;
  {
    auto scorer = make_scorer(prep, cfg);
    full_inner = scorer->score(SelectionMask::ones(data.X.n_features()));
  }
  const double fraction = static_cast<double>(oca.mask.popcount()) /
                          static_cast<double>(oca.mask.size());
  CHECK(fraction <= 0.35);
  CHECK(oca.inner_score.accuracy() >= full_inner.accuracy() - 0.02);
  check_monotone_trace(oca);
}

TEST_CASE("selector configs validate") {
  OcaConfig bad;
  bad.iter_max1 = 0;
  TableScorer scorer(4, 150);
  BlockSpec spec;
  spec.singles = {0, 1, 2, 3};
  CHECK_THROWS_AS(run_oca(scorer, spec, bad), std::invalid_argument);
  RfeConfig rfe;
  rfe.target_count = 9;
  CHECK_THROWS_AS(run_rfe(scorer, rfe), std::invalid_argument);
  CHECK_THROWS_AS(run_bca(scorer, exact_config(), SelectionMask::zeros(4)),
                  std::invalid_argument);
}
