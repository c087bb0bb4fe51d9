#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace blockselect {

/// Dense samples x features table with named columns. Immutable once built.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::vector<std::string> column_names, std::vector<double> values);

  std::size_t n_samples() const { return n_samples_; }
  std::size_t n_features() const { return n_features_; }
  double at(std::size_t row, std::size_t col) const {
    return values_[row * n_features_ + col];
  }
  std::span<const double> row(std::size_t r) const {
    return {values_.data() + r * n_features_, n_features_};
  }
  const std::vector<std::string>& column_names() const { return column_names_; }
  const std::vector<double>& values() const { return values_; }

  /// Column index by name; throws if absent.
  std::size_t column_index(const std::string& name) const;

  FeatureMatrix select_rows(std::span<const std::size_t> rows) const;

  bool operator==(const FeatureMatrix& other) const = default;

 private:
  std::vector<double> values_;  // row-major
  std::vector<std::string> column_names_;
  std::size_t n_samples_ = 0;
  std::size_t n_features_ = 0;
};

/// Binary classification target, one {0,1} entry per sample.
struct LabelVector {
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  int operator[](std::size_t i) const { return labels[i]; }
  bool operator==(const LabelVector&) const = default;
};

struct PnlSeries {
  std::vector<double> pnl;
};

/// One family of columns observing the same quantity at different lags.
struct Block {
  std::string name;
  std::vector<std::size_t> members;  // column indices, lag order
};

/// Partition of all feature columns into ordered blocks plus singles.
struct BlockSpec {
  std::vector<Block> blocks;
  std::vector<std::size_t> singles;

  std::size_t n_blocks() const { return blocks.size(); }
  std::size_t n_singles() const { return singles.size(); }
  std::size_t n_block_features() const;
  std::size_t n_features() const { return n_block_features() + singles.size(); }
  std::size_t min_block_len() const;

  /// Checks the partition property against a column count; throws on violation.
  void validate(std::size_t n_features_total) const;
};

/// Per-block kept-feature counts; the state of the count-space phases.
struct BlockCountVector {
  std::vector<std::size_t> counts;
  bool singles_included = true;

  bool operator==(const BlockCountVector&) const = default;
};

/// Binary inclusion vector over all features.
struct SelectionMask {
  std::vector<std::uint8_t> bits;

  static SelectionMask ones(std::size_t n) { return {std::vector<std::uint8_t>(n, 1)}; }
  static SelectionMask zeros(std::size_t n) { return {std::vector<std::uint8_t>(n, 0)}; }

  std::size_t size() const { return bits.size(); }
  std::size_t popcount() const;
  bool any() const { return popcount() > 0; }
  bool test(std::size_t i) const { return bits[i] != 0; }
  void set(std::size_t i, bool v) { bits[i] = v ? 1 : 0; }
  void flip(std::size_t i) { bits[i] ^= 1; }

  bool operator==(const SelectionMask&) const = default;
};

struct SelectionMaskHash {
  std::size_t operator()(const SelectionMask& m) const;
};

enum class SplitMode { randomized, temporal };

struct SplitSpec {
  SplitMode mode = SplitMode::temporal;
  double test_fraction = 1.0 / 3.0;
  std::uint64_t seed = 0;  // randomized mode only
};

std::string to_string(SplitMode mode);
SplitMode split_mode_from_string(const std::string& s);

struct SplitResult {
  std::vector<std::size_t> train_rows;  // ascending, original row order
  std::vector<std::size_t> test_rows;   // ascending
};

/// Row assignment only; pair with FeatureMatrix::select_rows to materialize.
SplitResult split_rows(std::size_t n_samples, const SplitSpec& spec);

LabelVector select_labels(const LabelVector& y, std::span<const std::size_t> rows);
PnlSeries select_pnl(const PnlSeries& pnl, std::span<const std::size_t> rows);

struct LoadOptions {
  std::string label_column = "label";
  std::optional<std::string> pnl_column;
  /// Used when label_column is empty: label = 1 iff pnl > threshold.
  double pnl_label_threshold = 0.0;
};

struct Dataset {
  FeatureMatrix X;
  LabelVector y;
  std::optional<PnlSeries> pnl;
};

/// Reads a CSV with header row; label and pnl columns are excluded from the
/// features. Row order is preserved and treated as temporal order.
Dataset load_csv(const std::filesystem::path& path, const LoadOptions& opts);

/// Writes features plus label (and pnl when present) so that load_csv
/// round-trips bit-exactly.
void write_dataset_csv(const std::filesystem::path& path, const Dataset& ds,
                       const std::string& label_column = "label",
                       const std::string& pnl_column = "pnl");

/// Groups columns by the `<base>__<lag>` suffix convention; columns without
/// the suffix become singles. Blocks ordered by first appearance.
BlockSpec infer_blocks(const std::vector<std::string>& column_names);

/// Sidecar JSON: {"blocks": {"name": ["col", ...]}, "singles": ["col", ...]}.
/// Must partition the column set exactly.
BlockSpec load_block_map(const std::filesystem::path& path,
                         const std::vector<std::string>& column_names);
std::string block_map_to_json(const BlockSpec& spec,
                              const std::vector<std::string>& column_names);

/// Per-feature nonnegative weights; sums to 1 when any split occurred.
struct ImportanceVector {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
};

/// Expands block counts to a concrete mask: within each block the k_i
/// highest-importance members win (importance ties keep the lower column
/// index); singles follow singles_included.
SelectionMask counts_to_mask(const BlockCountVector& counts,
                             const ImportanceVector& importance,
                             const BlockSpec& spec);

std::string mask_to_json(const SelectionMask& mask,
                         const std::vector<std::string>& column_names,
                         std::uint64_t seed);
SelectionMask mask_from_json(const std::string& json_text);

}  // namespace blockselect
