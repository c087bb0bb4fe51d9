#include "blockselect/datagen.hpp"

#include <cmath>
#include <stdexcept>

#include "blockselect/rng.hpp"

namespace blockselect {

namespace {

constexpr double kLagNoiseScale = 0.35;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

void SynthSpec::validate() const {
  if (n_samples < 2) throw std::invalid_argument("SynthSpec: n_samples must be >= 2");
  if (n_blocks > 0 && block_len == 0) {
    throw std::invalid_argument("SynthSpec: block_len must be >= 1 when blocks exist");
  }
  if (noise_std < 0.0) throw std::invalid_argument("SynthSpec: noise_std must be >= 0");
  for (const auto& [b, lag] : informative_block_lags) {
    if (b >= n_blocks || lag >= block_len) {
      throw std::invalid_argument("SynthSpec: informative block/lag out of range");
    }
  }
  for (std::size_t s : informative_singles) {
    if (s >= p_singles) {
      throw std::invalid_argument("SynthSpec: informative single index out of range");
    }
  }
  if (informative_block_lags.empty() && informative_singles.empty() && noise_std == 0.0) {
    throw std::invalid_argument(
        "SynthSpec: no informative features with noise_std = 0 would produce constant labels");
  }
}

BlockDataset gen_block_dataset(const SynthSpec& spec) {
  spec.validate();
  const std::size_t n_features = spec.n_features();
  const std::size_t n = spec.n_samples;

  std::vector<std::string> names;
  names.reserve(n_features);
  for (std::size_t b = 0; b < spec.n_blocks; ++b) {
    for (std::size_t lag = 0; lag < spec.block_len; ++lag) {
      names.push_back("b" + std::to_string(b) + "__" + std::to_string(lag));
    }
  }
  for (std::size_t s = 0; s < spec.p_singles; ++s) {
    names.push_back("s" + std::to_string(s));
  }

  auto block_col = [&](std::size_t b, std::size_t lag) { return b * spec.block_len + lag; };
  auto single_col = [&](std::size_t s) { return spec.n_blocks * spec.block_len + s; };

  const std::size_t n_informative =
      spec.informative_block_lags.size() + spec.informative_singles.size();
  const double score_scale =
      n_informative > 0 ? 1.0 / std::sqrt(static_cast<double>(n_informative)) : 0.0;

  Rng rng(spec.seed);
  std::vector<double> values(n * n_features);
  LabelVector y;
  y.labels.resize(n);

  for (std::size_t i = 0; i < n; ++i) {
    double* row = values.data() + i * n_features;
    for (std::size_t b = 0; b < spec.n_blocks; ++b) {
      const double signal = rng.normal();
      for (std::size_t lag = 0; lag < spec.block_len; ++lag) {
        const double noise = lag == 0 ? 0.0
                                      : static_cast<double>(lag) * kLagNoiseScale * rng.normal();
        row[block_col(b, lag)] = signal + noise;
      }
    }
    for (std::size_t s = 0; s < spec.p_singles; ++s) {
      row[single_col(s)] = rng.normal();
    }

    double score = 0.0;
    for (const auto& [b, lag] : spec.informative_block_lags) {
      score += row[block_col(b, lag)];
    }
    for (std::size_t s : spec.informative_singles) {
      score += row[single_col(s)];
    }
    score *= score_scale;

    if (spec.noise_std == 0.0) {
      y.labels[i] = score > 0.0 ? 1 : 0;
    } else {
      y.labels[i] = rng.bernoulli(sigmoid(score / spec.noise_std)) ? 1 : 0;
    }
  }

  BlockDataset out;
  out.X = FeatureMatrix(std::move(names), std::move(values));
  out.y = std::move(y);
  out.blocks = infer_blocks(out.X.column_names());
  out.ground_truth = SelectionMask::zeros(n_features);
  for (const auto& [b, lag] : spec.informative_block_lags) {
    out.ground_truth.set(block_col(b, lag), true);
  }
  for (std::size_t s : spec.informative_singles) {
    out.ground_truth.set(single_col(s), true);
  }
  return out;
}

void TradeGenSpec::validate() const {
  if (!(stop_loss < 0.0 && 0.0 < profit_target)) {
    throw std::invalid_argument("TradeGenSpec: need stop_loss < 0 < profit_target");
  }
  if (hit_probability < 0.0 || hit_probability > 1.0) {
    throw std::invalid_argument("TradeGenSpec: hit_probability must be in [0,1]");
  }
  if (timeout_fraction < 0.0 || timeout_fraction > 1.0) {
    throw std::invalid_argument("TradeGenSpec: timeout_fraction must be in [0,1]");
  }
  if (n_informative > n_features) {
    throw std::invalid_argument("TradeGenSpec: n_informative exceeds n_features");
  }
}

std::vector<TradeRecord> gen_trades(const TradeGenSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  std::vector<TradeRecord> trades;
  trades.reserve(spec.n_trades);
  for (std::size_t i = 0; i < spec.n_trades; ++i) {
    TradeRecord trade;
    trade.row_index = i;
    const bool timeout = rng.uniform01() < spec.timeout_fraction;
    if (timeout) {
      trade.pnl = rng.uniform(spec.stop_loss, spec.profit_target);
    } else {
      const bool win = rng.uniform01() < spec.hit_probability;
      trade.pnl = win ? spec.profit_target : spec.stop_loss;
    }
    trade.label = trade.pnl > spec.label_threshold ? 1 : 0;

    trade.features.resize(spec.n_features);
    const double shift = spec.signal_strength * (trade.label == 1 ? 1.0 : -1.0);
    for (std::size_t f = 0; f < spec.n_features; ++f) {
      trade.features[f] = rng.normal() + (f < spec.n_informative ? shift : 0.0);
    }
    trades.push_back(std::move(trade));
  }
  return trades;
}

Dataset trades_to_dataset(const std::vector<TradeRecord>& trades) {
  if (trades.empty()) throw std::invalid_argument("trades_to_dataset: no trades");
  const std::size_t n_features = trades.front().features.size();
  std::vector<std::string> names;
  names.reserve(n_features);
  for (std::size_t f = 0; f < n_features; ++f) names.push_back("x" + std::to_string(f));

  Dataset ds;
  ds.pnl = PnlSeries{};
  std::vector<double> values;
  values.reserve(trades.size() * n_features);
  for (const auto& t : trades) {
    if (t.features.size() != n_features) {
      throw std::invalid_argument("trades_to_dataset: ragged feature rows");
    }
    values.insert(values.end(), t.features.begin(), t.features.end());
    ds.y.labels.push_back(t.label);
    ds.pnl->pnl.push_back(t.pnl);
  }
  ds.X = FeatureMatrix(std::move(names), std::move(values));
  return ds;
}

std::vector<TradeRecord> dataset_to_trades(const Dataset& ds) {
  if (!ds.pnl) {
    throw std::invalid_argument("dataset_to_trades: dataset has no pnl series");
  }
  std::vector<TradeRecord> trades;
  trades.reserve(ds.X.n_samples());
  for (std::size_t i = 0; i < ds.X.n_samples(); ++i) {
    TradeRecord t;
    t.row_index = i;
    t.pnl = ds.pnl->pnl[i];
    t.label = ds.y.labels[i];
    const auto row = ds.X.row(i);
    t.features.assign(row.begin(), row.end());
    trades.push_back(std::move(t));
  }
  return trades;
}

std::vector<TradeRecord> select_trades(const std::vector<TradeRecord>& trades,
                                       std::span<const std::size_t> rows) {
  std::vector<TradeRecord> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(trades.at(r));
  return out;
}

}  // namespace blockselect
