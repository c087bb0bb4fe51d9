#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "blockselect/data_model.hpp"

namespace blockselect {

/// Block-structured synthetic classification data. Block b occupies columns
/// [b*block_len, (b+1)*block_len) named "b<b>__<lag>"; singles follow, named
/// "s<i>". Lag-0 columns carry the block signal exactly; higher lags add
/// lag-scaled noise so lower lags are more informative.
struct SynthSpec {
  std::size_t n_blocks = 2;
  std::size_t block_len = 5;
  std::size_t p_singles = 2;
  std::size_t n_samples = 2000;
  std::vector<std::pair<std::size_t, std::size_t>> informative_block_lags = {{0, 0}};
  std::vector<std::size_t> informative_singles = {0};
  /// Label link temperature: labels ~ Bernoulli(sigmoid(score/noise_std));
  /// 0 makes labels the deterministic sign of the score.
  double noise_std = 0.4;
  std::uint64_t seed = 0;

  std::size_t n_features() const { return n_blocks * block_len + p_singles; }
  void validate() const;
};

struct BlockDataset {
  FeatureMatrix X;
  LabelVector y;
  BlockSpec blocks;
  SelectionMask ground_truth;
};

BlockDataset gen_block_dataset(const SynthSpec& spec);

struct TradeRecord {
  std::size_t row_index = 0;  // temporal order
  double pnl = 0.0;
  int label = 0;  // 1 iff pnl > threshold
  std::vector<double> features;
};

/// Fixed profit-target/stop-loss trade generator. Non-timeout trades pin pnl
/// to exactly profit_target or stop_loss; the timeout minority lands
/// uniformly between the two levels.
struct TradeGenSpec {
  std::size_t n_trades = 1500;
  double profit_target = 100.0;
  double stop_loss = -80.0;
  double hit_probability = 0.45;
  double timeout_fraction = 0.02;
  /// Mean shift of the informative features between winners and losers.
  double signal_strength = 0.6;
  std::size_t n_features = 8;
  std::size_t n_informative = 3;
  double label_threshold = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

std::vector<TradeRecord> gen_trades(const TradeGenSpec& spec);

/// Features + derived labels + pnl series, columns "x0".."x<k-1>".
Dataset trades_to_dataset(const std::vector<TradeRecord>& trades);

/// Rebuilds trade records from a dataset that carries a pnl series; row
/// order is the temporal order.
std::vector<TradeRecord> dataset_to_trades(const Dataset& ds);

/// The subset of trades at the given dataset rows, in the given order.
std::vector<TradeRecord> select_trades(const std::vector<TradeRecord>& trades,
                                       std::span<const std::size_t> rows);

}  // namespace blockselect
