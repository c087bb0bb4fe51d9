#include "blockselect/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "json.hpp"

#include "blockselect/rng.hpp"

namespace blockselect {

namespace {

constexpr double kMinHessian = 1e-16;
constexpr double kMinSplitGain = 1e-12;
constexpr double kMaxLeafStep = 20.0;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct NodeStats {
  std::uint32_t count = 0;
  double sum_g = 0.0;
  double sum_h = 0.0;
};

struct SplitChoice {
  double gain = kMinSplitGain;
  std::int32_t feature = -1;
  double threshold = 0.0;

  bool valid() const { return feature >= 0; }
};

double newton_step(double g, double h) {
  const double w = g / std::max(h, kMinHessian);
  return std::clamp(w, -kMaxLeafStep, kMaxLeafStep);
}

double split_score(const NodeStats& s) {
  return s.sum_g * s.sum_g / std::max(s.sum_h, kMinHessian);
}

}  // namespace

void GbtParams::validate() const {
  if (n_trees < 1) throw std::invalid_argument("GbtParams: n_trees must be >= 1");
  if (max_depth < 1) throw std::invalid_argument("GbtParams: max_depth must be >= 1");
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
    throw std::invalid_argument("GbtParams: learning_rate must be in (0,1]");
  }
  if (min_samples_leaf < 1) {
    throw std::invalid_argument("GbtParams: min_samples_leaf must be >= 1");
  }
  if (!(subsample_fraction > 0.0 && subsample_fraction <= 1.0)) {
    throw std::invalid_argument("GbtParams: subsample_fraction must be in (0,1]");
  }
}

double GbtTree::predict(std::span<const double> row) const {
  std::int32_t node = 0;
  while (!nodes[node].is_leaf()) {
    const auto& n = nodes[node];
    node = row[n.feature] < n.threshold ? n.left : n.right;
  }
  return nodes[node].value;
}

GbtTrainContext::GbtTrainContext(const FeatureMatrix& X, const LabelVector& y)
    : x_(&X), y_(&y) {
  if (X.n_samples() != y.size()) {
    throw std::invalid_argument("GbtTrainContext: sample count mismatch");
  }
  const std::size_t n = X.n_samples();
  sorted_idx_.resize(X.n_features());
  for (std::size_t f = 0; f < X.n_features(); ++f) {
    auto& order = sorted_idx_[f];
    order.resize(n);
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
      return X.at(a, f) < X.at(b, f);
    });
  }
}

GbtModel fit_gbt(const GbtTrainContext& ctx, const SelectionMask& mask,
                 const GbtParams& params) {
  params.validate();
  const FeatureMatrix& X = ctx.X();
  const LabelVector& y = ctx.y();
  if (mask.size() != X.n_features()) {
    throw std::invalid_argument("fit_gbt: mask length does not match feature count");
  }
  if (!mask.any()) {
    throw std::invalid_argument("fit_gbt: empty selection mask");
  }
  const std::size_t n = X.n_samples();
  if (n == 0) throw std::invalid_argument("fit_gbt: empty training set");

  GbtModel model;
  model.params_ = params;
  model.n_features_ = X.n_features();
  model.importance_gain_.assign(X.n_features(), 0.0);

  std::size_t n_pos = 0;
  for (int label : y.labels) n_pos += static_cast<std::size_t>(label);
  if (n_pos == 0 || n_pos == n) {
    model.degenerate_ = true;
    model.constant_label_ = n_pos == 0 ? 0 : 1;
    model.init_score_ = n_pos == 0 ? -std::numeric_limits<double>::infinity()
                                   : std::numeric_limits<double>::infinity();
    return model;
  }
  model.init_score_ = std::log(static_cast<double>(n_pos) / static_cast<double>(n - n_pos));

  std::vector<std::size_t> masked_features;
  for (std::size_t f = 0; f < mask.size(); ++f) {
    if (mask.test(f)) masked_features.push_back(f);
  }

  std::vector<double> score(n, model.init_score_);
  std::vector<double> grad(n), hess(n);
  // node_of[i]: level-local node position, or -1 when settled / out of tree
  std::vector<std::int32_t> node_of(n);
  std::vector<std::uint32_t> subsample_pool(n);
  std::iota(subsample_pool.begin(), subsample_pool.end(), 0u);
  const auto n_subsample = static_cast<std::size_t>(
      std::ceil(params.subsample_fraction * static_cast<double>(n)));

  for (int t = 0; t < params.n_trees; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(score[i]);
      grad[i] = static_cast<double>(y.labels[i]) - p;
      hess[i] = p * (1.0 - p);
    }

    NodeStats root;
    if (params.subsample_fraction < 1.0) {
      Rng tree_rng(splitmix64(params.seed ^ (0x5851f42d4c957f2dull + t)));
      std::iota(subsample_pool.begin(), subsample_pool.end(), 0u);
      tree_rng.shuffle(subsample_pool);
      std::fill(node_of.begin(), node_of.end(), -1);
      for (std::size_t k = 0; k < n_subsample; ++k) node_of[subsample_pool[k]] = 0;
    } else {
      std::fill(node_of.begin(), node_of.end(), 0);
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (node_of[i] == 0) {
        ++root.count;
        root.sum_g += grad[i];
        root.sum_h += hess[i];
      }
    }

    GbtTree tree;
    tree.nodes.emplace_back();
    std::vector<std::int32_t> level_tree_node{0};  // level position -> tree node id
    std::vector<NodeStats> level_stats{root};

    for (int depth = 0; depth < params.max_depth && !level_stats.empty(); ++depth) {
      const std::size_t n_level = level_stats.size();
      std::vector<SplitChoice> best(n_level);
      std::vector<NodeStats> left_acc(n_level);
      std::vector<double> prev_value(n_level);
      std::vector<std::uint8_t> seen_any(n_level);

      for (std::size_t f : masked_features) {
        std::fill(left_acc.begin(), left_acc.end(), NodeStats{});
        std::fill(seen_any.begin(), seen_any.end(), 0);
        for (std::uint32_t idx : ctx.sorted_order(f)) {
          const std::int32_t pos = node_of[idx];
          if (pos < 0) continue;
          const double value = X.at(idx, f);
          NodeStats& left = left_acc[pos];
          if (seen_any[pos] && value > prev_value[pos]) {
            const NodeStats& total = level_stats[pos];
            const std::uint32_t right_count = total.count - left.count;
            if (left.count >= static_cast<std::uint32_t>(params.min_samples_leaf) &&
                right_count >= static_cast<std::uint32_t>(params.min_samples_leaf)) {
              NodeStats right{right_count, total.sum_g - left.sum_g,
                              total.sum_h - left.sum_h};
              const double gain =
                  split_score(left) + split_score(right) - split_score(total);
              if (gain > best[pos].gain) {
                best[pos].gain = gain;
                best[pos].feature = static_cast<std::int32_t>(f);
                best[pos].threshold = 0.5 * (prev_value[pos] + value);
              }
            }
          }
          ++left.count;
          left.sum_g += grad[idx];
          left.sum_h += hess[idx];
          prev_value[pos] = value;
          seen_any[pos] = 1;
        }
      }

      // Materialize splits and leaves, then reassign samples to the next level.
      std::vector<std::int32_t> next_pos_of(n_level, -1);
      std::vector<std::int32_t> next_tree_node;
      std::vector<NodeStats> next_stats;
      for (std::size_t pos = 0; pos < n_level; ++pos) {
        if (best[pos].valid()) {
          const auto left = static_cast<std::int32_t>(tree.nodes.size());
          const auto right = left + 1;
          tree.nodes.emplace_back();
          tree.nodes.emplace_back();
          // take the reference only after emplace_back may have reallocated
          GbtNode& tn = tree.nodes[level_tree_node[pos]];
          tn.feature = best[pos].feature;
          tn.threshold = best[pos].threshold;
          tn.left = left;
          tn.right = right;
          model.importance_gain_[best[pos].feature] += best[pos].gain;
          next_pos_of[pos] = static_cast<std::int32_t>(next_tree_node.size());
          next_tree_node.push_back(left);
          next_tree_node.push_back(right);
          next_stats.emplace_back();
          next_stats.emplace_back();
        } else {
          GbtNode& tn = tree.nodes[level_tree_node[pos]];
          tn.value = params.learning_rate *
                     newton_step(level_stats[pos].sum_g, level_stats[pos].sum_h);
        }
      }
      for (std::size_t i = 0; i < n; ++i) {
        const std::int32_t pos = node_of[i];
        if (pos < 0) continue;
        if (next_pos_of[pos] < 0) {
          node_of[i] = -1;
          continue;
        }
        const GbtNode& tn = tree.nodes[level_tree_node[pos]];
        const bool go_left = X.at(i, tn.feature) < tn.threshold;
        const std::int32_t child_pos = next_pos_of[pos] + (go_left ? 0 : 1);
        node_of[i] = child_pos;
        NodeStats& cs = next_stats[child_pos];
        ++cs.count;
        cs.sum_g += grad[i];
        cs.sum_h += hess[i];
      }
      level_tree_node = std::move(next_tree_node);
      level_stats = std::move(next_stats);
    }
    // Depth limit: everything still open becomes a leaf.
    for (std::size_t pos = 0; pos < level_stats.size(); ++pos) {
      GbtNode& tn = tree.nodes[level_tree_node[pos]];
      tn.value = params.learning_rate *
                 newton_step(level_stats[pos].sum_g, level_stats[pos].sum_h);
    }

    for (std::size_t i = 0; i < n; ++i) score[i] += tree.predict(X.row(i));
    model.trees_.push_back(std::move(tree));
  }
  return model;
}

GbtModel fit_gbt(const FeatureMatrix& X, const LabelVector& y,
                 const SelectionMask& mask, const GbtParams& params) {
  GbtTrainContext ctx(X, y);
  return fit_gbt(ctx, mask, params);
}

double GbtModel::predict_score(std::span<const double> row) const {
  double s = init_score_;
  for (const auto& tree : trees_) s += tree.predict(row);
  return s;
}

double GbtModel::predict_proba(std::span<const double> row) const {
  if (degenerate_) return constant_label_ == 1 ? 1.0 : 0.0;
  return sigmoid(predict_score(row));
}

int GbtModel::predict_label(std::span<const double> row, double threshold) const {
  return predict_proba(row) >= threshold ? 1 : 0;
}

ImportanceVector GbtModel::feature_importance() const {
  ImportanceVector out;
  out.values.assign(n_features_, 0.0);
  if (degenerate_) return out;
  const double total =
      std::accumulate(importance_gain_.begin(), importance_gain_.end(), 0.0);
  if (total <= 0.0) return out;
  for (std::size_t f = 0; f < n_features_; ++f) {
    out.values[f] = importance_gain_[f] / total;
  }
  return out;
}

std::string GbtModel::to_json() const {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["model"] = "gbt_logistic";
  j["degenerate"] = degenerate_;
  j["constant_label"] = constant_label_;
  j["n_features"] = n_features_;
  j["init_score"] = degenerate_ ? 0.0 : init_score_;
  j["leaf_values_include_learning_rate"] = true;
  nlohmann::ordered_json params;
  params["n_trees"] = params_.n_trees;
  params["max_depth"] = params_.max_depth;
  params["learning_rate"] = params_.learning_rate;
  params["min_samples_leaf"] = params_.min_samples_leaf;
  params["subsample_fraction"] = params_.subsample_fraction;
  params["seed"] = params_.seed;
  j["params"] = std::move(params);
  nlohmann::ordered_json trees = nlohmann::ordered_json::array();
  for (const auto& tree : trees_) {
    nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
    for (const auto& n : tree.nodes) {
      nlohmann::ordered_json node;
      node["feature"] = n.feature;
      node["threshold"] = n.threshold;
      node["left"] = n.left;
      node["right"] = n.right;
      node["value"] = n.value;
      nodes.push_back(std::move(node));
    }
    trees.push_back(std::move(nodes));
  }
  j["trees"] = std::move(trees);
  return j.dump();
}

}  // namespace blockselect
