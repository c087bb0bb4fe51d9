#include "blockselect/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace blockselect {

std::vector<std::uint8_t> filter_trades(const GbtModel& model,
                                        std::span<const TradeRecord> trades,
                                        double include_threshold) {
  std::vector<std::uint8_t> included(trades.size(), 0);
  for (std::size_t i = 0; i < trades.size(); ++i) {
    const auto& features = trades[i].features;
    if (features.size() != model.n_features()) {
      throw std::invalid_argument("filter_trades: feature width does not match the model");
    }
    included[i] = model.predict_proba(features) >= include_threshold ? 1 : 0;
  }
  return included;
}

EquityCurve equity_curve(std::span<const TradeRecord> trades,
                         std::span<const std::uint8_t> included) {
  if (included.size() != trades.size()) {
    throw std::invalid_argument("equity_curve: inclusion vector length mismatch");
  }
  EquityCurve curve;
  curve.points.reserve(trades.size());
  double cum = 0.0;
  for (std::size_t i = 0; i < trades.size(); ++i) {
    if (included[i]) cum += trades[i].pnl;
    curve.points.push_back({trades[i].row_index, cum});
  }
  return curve;
}

PnlHistogram pnl_histogram(std::span<const TradeRecord> trades, std::size_t n_bins) {
  if (n_bins < 2) throw std::invalid_argument("pnl_histogram: n_bins must be >= 2");
  if (trades.empty()) throw std::invalid_argument("pnl_histogram: no trades");
  double lo = trades.front().pnl;
  double hi = lo;
  for (const auto& t : trades) {
    lo = std::min(lo, t.pnl);
    hi = std::max(hi, t.pnl);
  }
  PnlHistogram hist;
  if (lo == hi) {
    hist.degenerate_single_bin = true;
    hist.edges = {lo, hi};
    hist.counts = {trades.size()};
    return hist;
  }
  const double width = (hi - lo) / static_cast<double>(n_bins);
  hist.edges.resize(n_bins + 1);
  for (std::size_t i = 0; i <= n_bins; ++i) {
    hist.edges[i] = lo + width * static_cast<double>(i);
  }
  hist.edges[n_bins] = hi;
  hist.counts.assign(n_bins, 0);
  for (const auto& t : trades) {
    auto bin = static_cast<std::size_t>((t.pnl - lo) / width);
    bin = std::min(bin, n_bins - 1);
    ++hist.counts[bin];
  }
  return hist;
}

void flag_pareto(std::vector<ComparisonRow>& rows) {
  for (auto& row : rows) {
    row.pareto = true;
    for (const auto& other : rows) {
      if (&other == &row) continue;
      const bool weakly_dominates = other.feature_fraction_pct <= row.feature_fraction_pct &&
                                    other.score_pct >= row.score_pct;
      const bool strict = other.feature_fraction_pct < row.feature_fraction_pct ||
                          other.score_pct > row.score_pct;
      if (weakly_dominates && strict) {
        row.pareto = false;
        break;
      }
    }
  }
}

std::vector<ComparisonRow> compare_methods(std::span<const SelectionResult> results) {
  std::vector<ComparisonRow> rows;
  rows.reserve(results.size());
  for (const auto& result : results) {
    if (result.mask.size() == 0) {
      throw std::invalid_argument("compare_methods: result without a mask");
    }
    ComparisonRow row;
    row.method = result.method;
    row.feature_fraction_pct = 100.0 * static_cast<double>(result.mask.popcount()) /
                               static_cast<double>(result.mask.size());
    row.score_pct =
        100.0 * (result.test_score ? result.test_score->accuracy()
                                   : result.inner_score.accuracy());
    row.inner_score_pct = 100.0 * result.inner_score.accuracy();
    row.evaluations = result.evaluations;
    rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const ComparisonRow& a, const ComparisonRow& b) {
    return a.feature_fraction_pct < b.feature_fraction_pct;
  });
  flag_pareto(rows);
  return rows;
}

std::string comparison_table_text(const std::vector<ComparisonRow>& rows) {
  std::ostringstream out;
  out << std::left << std::setw(10) << "method" << std::right << std::setw(12)
      << "% features" << std::setw(12) << "score %" << std::setw(12) << "inner %"
      << std::setw(12) << "evals" << std::setw(9) << "pareto" << '\n';
  out << std::string(67, '-') << '\n';
  out << std::fixed << std::setprecision(2);
  for (const auto& row : rows) {
    out << std::left << std::setw(10) << row.method << std::right << std::setw(12)
        << row.feature_fraction_pct << std::setw(12) << row.score_pct << std::setw(12)
        << row.inner_score_pct << std::setw(12) << row.evaluations << std::setw(9)
        << (row.pareto ? "*" : "") << '\n';
  }
  return out.str();
}

}  // namespace blockselect
