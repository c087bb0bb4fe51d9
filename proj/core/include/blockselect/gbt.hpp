#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "blockselect/data_model.hpp"

namespace blockselect {

struct GbtParams {
  int n_trees = 100;
  int max_depth = 3;
  double learning_rate = 0.1;
  int min_samples_leaf = 5;
  double subsample_fraction = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct GbtNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;     // go left iff x[feature] < threshold
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;  // leaf value, learning rate already applied

  bool is_leaf() const { return feature < 0; }
};

struct GbtTree {
  std::vector<GbtNode> nodes;

  double predict(std::span<const double> row) const;
};

/// Presorted per-feature sample orders for one training set. Build once,
/// fit many masks against it. Holds references; the matrix must outlive it.
class GbtTrainContext {
 public:
  GbtTrainContext(const FeatureMatrix& X, const LabelVector& y);

  const FeatureMatrix& X() const { return *x_; }
  const LabelVector& y() const { return *y_; }
  std::span<const std::uint32_t> sorted_order(std::size_t feature) const {
    return sorted_idx_[feature];
  }

 private:
  const FeatureMatrix* x_;
  const LabelVector* y_;
  std::vector<std::vector<std::uint32_t>> sorted_idx_;
};

/// Boosted trees on logistic loss over the masked columns only.
class GbtModel {
 public:
  double predict_score(std::span<const double> row) const;  // log-odds
  double predict_proba(std::span<const double> row) const;
  int predict_label(std::span<const double> row, double threshold = 0.5) const;

  /// Split-gain totals per feature, normalized to sum 1; exact zeros outside
  /// the training mask and for degenerate models.
  ImportanceVector feature_importance() const;

  bool degenerate() const { return degenerate_; }
  int constant_label() const { return constant_label_; }
  std::size_t n_features() const { return n_features_; }
  const std::vector<GbtTree>& trees() const { return trees_; }

  /// Versioned audit dump; not a stable interchange format.
  std::string to_json() const;

  friend GbtModel fit_gbt(const GbtTrainContext& ctx, const SelectionMask& mask,
                          const GbtParams& params);

 private:
  GbtParams params_;
  std::size_t n_features_ = 0;
  double init_score_ = 0.0;
  bool degenerate_ = false;
  int constant_label_ = 0;
  std::vector<GbtTree> trees_;
  std::vector<double> importance_gain_;
};

GbtModel fit_gbt(const GbtTrainContext& ctx, const SelectionMask& mask,
                 const GbtParams& params);
GbtModel fit_gbt(const FeatureMatrix& X, const LabelVector& y,
                 const SelectionMask& mask, const GbtParams& params);

}  // namespace blockselect
