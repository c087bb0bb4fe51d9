#pragma once

#include <stdexcept>
#include <vector>

#include "blockselect/rng.hpp"
#include "blockselect/scorer.hpp"

namespace blockselect::testing {

/// Deterministic lookup-table oracle over all 2^N masks. Importance is a
/// fixed per-instance vector, zeroed outside the queried mask.
class TableScorer final : public Scorer {
 public:
  TableScorer(std::size_t n_features, std::uint64_t seed, std::size_t denominator = 1000)
      : n_(n_features), denom_(denominator) {
    if (n_features > 20) throw std::invalid_argument("TableScorer: table too large");
    table_.resize(std::size_t{1} << n_features);
    Rng rng(seed);
    for (auto& v : table_) v = rng.uniform_u64(denom_ + 1);
    importance_.resize(n_features);
    double total = 0.0;
    for (auto& v : importance_) {
      v = 0.05 + rng.uniform01();
      total += v;
    }
    for (auto& v : importance_) v /= total;
  }

  static std::size_t index(const SelectionMask& mask) {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < mask.size(); ++i) {
      if (mask.test(i)) idx |= std::size_t{1} << i;
    }
    return idx;
  }

  /// Uncounted direct lookup, for brute-force oracles.
  ScoreValue value(const SelectionMask& mask) const { return {table_[index(mask)], denom_}; }

  void set(const SelectionMask& mask, std::size_t n_correct) {
    table_[index(mask)] = n_correct;
  }
  void set_importance(std::vector<double> importance) {
    importance_ = std::move(importance);
  }
  const std::vector<double>& raw_importance() const { return importance_; }

  std::size_t n_features() const override { return n_; }

 protected:
  Evaluation evaluate(const SelectionMask& mask) override {
    Evaluation out;
    out.score = value(mask);
    out.importance.values.assign(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      if (mask.test(i)) out.importance.values[i] = importance_[i];
    }
    return out;
  }

 private:
  std::size_t n_;
  std::size_t denom_;
  std::vector<std::size_t> table_;
  std::vector<double> importance_;
};

/// Best nonempty mask value by full enumeration.
inline ScoreValue brute_force_optimum(const TableScorer& scorer) {
  const std::size_t n = scorer.n_features();
  ScoreValue best{0, 0};
  for (std::size_t idx = 1; idx < (std::size_t{1} << n); ++idx) {
    SelectionMask mask = SelectionMask::zeros(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (idx & (std::size_t{1} << i)) mask.set(i, true);
    }
    const ScoreValue v = scorer.value(mask);
    if (best.n_eval_samples == 0 || v.n_correct > best.n_correct) best = v;
  }
  return best;
}

/// True when no single-bit flip (to a nonempty mask) strictly improves.
inline bool is_one_flip_local_optimum(const TableScorer& scorer, const SelectionMask& mask) {
  const ScoreValue base = scorer.value(mask);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    SelectionMask flipped = mask;
    flipped.flip(i);
    if (!flipped.any()) continue;
    if (scorer.value(flipped).n_correct > base.n_correct) return false;
  }
  return true;
}

}  // namespace blockselect::testing
