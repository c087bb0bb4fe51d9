#pragma once

#include <span>
#include <string>
#include <vector>

#include "blockselect/datagen.hpp"
#include "blockselect/gbt.hpp"
#include "blockselect/selector_oca.hpp"

namespace blockselect {

/// Inclusion decisions for a test-portion trade sequence: trade kept iff the
/// model (fit on the training portion over its mask) predicts label 1.
std::vector<std::uint8_t> filter_trades(const GbtModel& model,
                                        std::span<const TradeRecord> trades,
                                        double include_threshold = 0.5);

struct EquityPoint {
  std::size_t trade_index = 0;
  double cum_pnl = 0.0;
};

struct EquityCurve {
  std::vector<EquityPoint> points;
  std::string currency = "USD";

  double terminal() const { return points.empty() ? 0.0 : points.back().cum_pnl; }
};

/// Cumulative pnl over the trades in the given (temporal) order; excluded
/// trades contribute zero but keep their index on the curve.
EquityCurve equity_curve(std::span<const TradeRecord> trades,
                         std::span<const std::uint8_t> included);

struct PnlHistogram {
  std::vector<double> edges;        // n_bins + 1 edges
  std::vector<std::size_t> counts;  // n_bins counts, summing to n_trades
  bool degenerate_single_bin = false;
};

PnlHistogram pnl_histogram(std::span<const TradeRecord> trades, std::size_t n_bins);

struct ComparisonRow {
  std::string method;
  double feature_fraction_pct = 0.0;  // 100 * popcount / N
  double score_pct = 0.0;             // outer test accuracy, percent
  double inner_score_pct = 0.0;
  std::size_t evaluations = 0;
  bool pareto = false;
};

/// Flags every row not weakly dominated (<= fraction and >= score with at
/// least one strict) by another row; exact ties are all flagged.
void flag_pareto(std::vector<ComparisonRow>& rows);

/// Rows sorted by feature fraction, Pareto flags on (fraction, score_pct).
/// Callers are responsible for only comparing results from one config.
std::vector<ComparisonRow> compare_methods(std::span<const SelectionResult> results);

std::string comparison_table_text(const std::vector<ComparisonRow>& rows);

}  // namespace blockselect
