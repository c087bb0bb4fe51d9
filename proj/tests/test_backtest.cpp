#include <numeric>

#include "doctest.h"

#include "blockselect/backtest.hpp"
#include "blockselect/pipeline.hpp"
#include "blockselect/rng.hpp"

using namespace blockselect;

namespace {

struct TradeSplit {
  std::vector<TradeRecord> train;
  std::vector<TradeRecord> test;
  Dataset train_ds;
};

TradeSplit split_trades(const TradeGenSpec& spec, const SplitSpec& split) {
  const auto trades = gen_trades(spec);
  const Dataset ds = trades_to_dataset(trades);
  const SplitResult rows = split_rows(ds.X.n_samples(), split);
  TradeSplit out;
  out.train = select_trades(trades, rows.train_rows);
  out.test = select_trades(trades, rows.test_rows);
  out.train_ds = trades_to_dataset(out.train);
  return out;
}

}  // namespace

TEST_CASE("constant-1 model includes everything; the curves coincide") {
  TradeGenSpec spec;
  spec.n_trades = 200;
  spec.seed = 50;
  const auto trades = gen_trades(spec);
  const Dataset ds = trades_to_dataset(trades);
  LabelVector all_ones_labels;
  all_ones_labels.labels.assign(ds.y.size(), 1);  // degenerate constant-1 model
  const GbtModel model =
      fit_gbt(ds.X, all_ones_labels, SelectionMask::ones(ds.X.n_features()), GbtParams{});
  REQUIRE(model.degenerate());

  const auto included = filter_trades(model, trades);
  CHECK(std::accumulate(included.begin(), included.end(), std::size_t{0}) == trades.size());
  const EquityCurve filtered = equity_curve(trades, included);
  const EquityCurve unfiltered =
      equity_curve(trades, std::vector<std::uint8_t>(trades.size(), 1));
  REQUIRE(filtered.points.size() == unfiltered.points.size());
  for (std::size_t i = 0; i < filtered.points.size(); ++i) {
    REQUIRE(filtered.points[i].cum_pnl == unfiltered.points[i].cum_pnl);
  }
}

TEST_CASE("an oracle inclusion excludes every losing trade") {
  TradeGenSpec spec;
  spec.n_trades = 300;
  spec.seed = 51;
  const auto trades = gen_trades(spec);
  std::vector<std::uint8_t> oracle(trades.size());
  for (std::size_t i = 0; i < trades.size(); ++i) {
    oracle[i] = trades[i].label ? 1 : 0;
  }
  const EquityCurve curve = equity_curve(trades, oracle);
  double winners_only = 0.0;
  for (const auto& t : trades) {
    if (t.pnl > 0.0) winners_only += t.pnl;
  }
  CHECK(curve.terminal() == doctest::Approx(winners_only));
  // each step is nondecreasing since losers contribute nothing
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    REQUIRE(curve.points[i].cum_pnl >= curve.points[i - 1].cum_pnl);
  }
}

TEST_CASE("equity curve basics") {
  SUBCASE("empty inclusion set gives a flat zero curve") {
    TradeGenSpec spec;
    spec.n_trades = 20;
    spec.seed = 52;
    const auto trades = gen_trades(spec);
    const EquityCurve curve =
        equity_curve(trades, std::vector<std::uint8_t>(trades.size(), 0));
    for (const auto& p : curve.points) REQUIRE(p.cum_pnl == 0.0);
  }
  SUBCASE("all included on (+1,-1,+1) gives (1,0,1)") {
    std::vector<TradeRecord> trades(3);
    trades[0] = {0, 1.0, 1, {}};
    trades[1] = {1, -1.0, 0, {}};
    trades[2] = {2, 1.0, 1, {}};
    const EquityCurve curve = equity_curve(trades, std::vector<std::uint8_t>{1, 1, 1});
    REQUIRE(curve.points.size() == 3);
    CHECK(curve.points[0].cum_pnl == 1.0);
    CHECK(curve.points[1].cum_pnl == 0.0);
    CHECK(curve.points[2].cum_pnl == 1.0);
  }
  SUBCASE("terminal equals the sum of included pnls exactly") {
    TradeGenSpec spec;
    spec.n_trades = 500;
    spec.seed = 53;
    const auto trades = gen_trades(spec);
    Rng rng(54);
    std::vector<std::uint8_t> included(trades.size());
    double expected = 0.0;
    for (std::size_t i = 0; i < trades.size(); ++i) {
      included[i] = rng.bernoulli(0.6) ? 1 : 0;
      if (included[i]) expected += trades[i].pnl;
    }
    CHECK(equity_curve(trades, included).terminal() == expected);
  }
}

TEST_CASE("histogram: exactly two nonzero bins when timeouts are off") {
  TradeGenSpec spec;
  spec.timeout_fraction = 0.0;
  spec.n_trades = 400;
  spec.seed = 55;
  const auto trades = gen_trades(spec);
  const PnlHistogram hist = pnl_histogram(trades, 20);
  std::size_t nonzero = 0;
  std::size_t total = 0;
  for (std::size_t c : hist.counts) {
    if (c > 0) ++nonzero;
    total += c;
  }
  CHECK(nonzero == 2);
  CHECK(total == trades.size());
  CHECK(hist.counts.front() > 0);  // stop-loss spike
  CHECK(hist.counts.back() > 0);   // profit-target spike
}

TEST_CASE("histogram: 1500 trades show two dominant peaks with sparse interior") {
  TradeGenSpec spec;  // defaults: 1500 trades, 2% timeouts
  spec.seed = 56;
  const auto trades = gen_trades(spec);
  const PnlHistogram hist = pnl_histogram(trades, 30);
  std::size_t total = 0;
  for (std::size_t c : hist.counts) total += c;
  REQUIRE(total == trades.size());
  const std::size_t sl_peak = hist.counts.front();
  const std::size_t pt_peak = hist.counts.back();
  std::size_t interior_max = 0;
  std::size_t interior_total = 0;
  for (std::size_t i = 1; i + 1 < hist.counts.size(); ++i) {
    interior_max = std::max(interior_max, hist.counts[i]);
    interior_total += hist.counts[i];
  }
  CHECK(sl_peak > 10 * std::max<std::size_t>(interior_max, 1));
  CHECK(pt_peak > 10 * std::max<std::size_t>(interior_max, 1));
  CHECK(interior_total < trades.size() / 10);
}

TEST_CASE("histogram conservation and edge cases") {
  TradeGenSpec spec;
  spec.n_trades = 137;
  spec.seed = 57;
  const auto trades = gen_trades(spec);
  for (std::size_t bins : {2ul, 3ul, 7ul, 50ul}) {
    const PnlHistogram hist = pnl_histogram(trades, bins);
    REQUIRE(hist.counts.size() == bins);
    REQUIRE(std::accumulate(hist.counts.begin(), hist.counts.end(), std::size_t{0}) ==
            trades.size());
  }
  CHECK_THROWS_AS(pnl_histogram(trades, 1), std::invalid_argument);

  std::vector<TradeRecord> flat(5);
  for (std::size_t i = 0; i < flat.size(); ++i) flat[i] = {i, 42.0, 1, {}};
  const PnlHistogram degenerate = pnl_histogram(flat, 10);
  CHECK(degenerate.degenerate_single_bin);
  CHECK(degenerate.counts == std::vector<std::size_t>{5});
}

TEST_CASE("trained filter beats the unfiltered strategy on both split modes") {
  TradeGenSpec spec;  // calibrated defaults: signal_strength 0.6
  spec.seed = 58;
  for (const SplitMode mode : {SplitMode::randomized, SplitMode::temporal}) {
    SplitSpec split;
    split.mode = mode;
    split.test_fraction = 1.0 / 3.0;
    split.seed = 59;
    const TradeSplit ts = split_trades(spec, split);
    const GbtModel model =
        fit_gbt(ts.train_ds.X, ts.train_ds.y,
                SelectionMask::ones(ts.train_ds.X.n_features()), GbtParams{});
    const auto included = filter_trades(model, ts.test);
    const EquityCurve filtered = equity_curve(ts.test, included);
    const EquityCurve unfiltered =
        equity_curve(ts.test, std::vector<std::uint8_t>(ts.test.size(), 1));
    CHECK(filtered.terminal() > unfiltered.terminal());
  }
}

TEST_CASE("temporal split keeps every test trade after every training trade") {
  TradeGenSpec spec;
  spec.n_trades = 600;
  spec.seed = 60;
  SplitSpec split;
  split.mode = SplitMode::temporal;
  const TradeSplit ts = split_trades(spec, split);
  std::size_t max_train = 0;
  for (const auto& t : ts.train) max_train = std::max(max_train, t.row_index);
  for (const auto& t : ts.test) REQUIRE(t.row_index > max_train);
}

TEST_CASE("pareto flags reproduce the published comparison") {
  std::vector<ComparisonRow> rows(4);
  rows[0] = {"oca", 16.6, 62.8, 0, 0, false};
  rows[1] = {"rfe24", 16.6, 62.39, 0, 0, false};
  rows[2] = {"bca", 27.08, 62.19, 0, 0, false};
  rows[3] = {"rfe28", 19.4, 62.8, 0, 0, false};
  flag_pareto(rows);
  CHECK(rows[0].pareto);
  CHECK_FALSE(rows[1].pareto);
  CHECK_FALSE(rows[2].pareto);
  CHECK_FALSE(rows[3].pareto);
}

TEST_CASE("pareto tie semantics: identical rows are both flagged") {
  std::vector<ComparisonRow> rows(2);
  rows[0] = {"a", 20.0, 60.0, 0, 0, false};
  rows[1] = {"b", 20.0, 60.0, 0, 0, false};
  flag_pareto(rows);
  CHECK(rows[0].pareto);
  CHECK(rows[1].pareto);

  std::vector<ComparisonRow> single(1);
  single[0] = {"only", 50.0, 55.0, 0, 0, false};
  flag_pareto(single);
  CHECK(single[0].pareto);
}

TEST_CASE("pareto flags agree with a brute-force dominance check") {
  Rng rng(61);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<ComparisonRow> rows(1 + rng.uniform_u64(8));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      rows[i].method = "m" + std::to_string(i);
      rows[i].feature_fraction_pct = 10.0 * static_cast<double>(1 + rng.uniform_u64(10));
      rows[i].score_pct = 50.0 + static_cast<double>(rng.uniform_u64(20));
    }
    flag_pareto(rows);
    for (const auto& row : rows) {
      bool dominated = false;
      for (const auto& other : rows) {
        if (&other == &row) continue;
        if (other.feature_fraction_pct <= row.feature_fraction_pct &&
            other.score_pct >= row.score_pct &&
            (other.feature_fraction_pct < row.feature_fraction_pct ||
             other.score_pct > row.score_pct)) {
          dominated = true;
        }
      }
      REQUIRE(row.pareto == !dominated);
    }
  }
}

TEST_CASE("compare_methods sorts by fraction and uses result scores") {
  SelectionResult a;
  a.method = "oca";
  a.mask = SelectionMask{{1, 1, 0, 0, 0, 0, 0, 0, 0, 0}};
  a.inner_score = {80, 100};
  a.test_score = ScoreValue{75, 100};
  a.evaluations = 40;
  SelectionResult b;
  b.method = "bca";
  b.mask = SelectionMask{{1, 1, 1, 1, 1, 0, 0, 0, 0, 0}};
  b.inner_score = {78, 100};
  b.test_score = ScoreValue{74, 100};
  b.evaluations = 90;
  const std::vector<SelectionResult> results{b, a};
  const auto rows = compare_methods(results);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].method == "oca");
  CHECK(rows[0].feature_fraction_pct == doctest::Approx(20.0));
  CHECK(rows[0].score_pct == doctest::Approx(75.0));
  CHECK(rows[0].inner_score_pct == doctest::Approx(80.0));
  CHECK(rows[0].pareto);
  CHECK_FALSE(rows[1].pareto);
  const std::string table = comparison_table_text(rows);
  CHECK(table.find("oca") != std::string::npos);
  CHECK(table.find("pareto") != std::string::npos);
}
