#pragma once

#include <atomic>
#include <cstdint>
#include <future>
#include <mutex>
#include <optional>
#include <unordered_map>

#include "blockselect/data_model.hpp"
#include "blockselect/gbt.hpp"

namespace blockselect {

/// Exact accuracy as an integer ratio; comparable without float noise when
/// the evaluation set is shared.
struct ScoreValue {
  std::size_t n_correct = 0;
  std::size_t n_eval_samples = 0;

  double accuracy() const {
    return n_eval_samples == 0
               ? 0.0
               : static_cast<double>(n_correct) / static_cast<double>(n_eval_samples);
  }
  bool operator==(const ScoreValue&) const = default;
};

/// Subset-scoring oracle. Results are memoized on the mask bits and the
/// evaluation counter advances once per distinct mask, so it measures
/// distinct subsets visited. Thread-safe; concurrent calls on the same mask
/// evaluate once.
///
/// Implementations provide evaluate(); they must be deterministic in the
/// mask and must report zero importance outside it.
class Scorer {
 public:
  virtual ~Scorer() = default;

  ScoreValue score(const SelectionMask& mask);
  ImportanceVector importance(const SelectionMask& mask);
  std::size_t evaluations() const { return evaluations_.load(); }
  virtual std::size_t n_features() const = 0;

 protected:
  struct Evaluation {
    ScoreValue score;
    ImportanceVector importance;
  };
  virtual Evaluation evaluate(const SelectionMask& mask) = 0;

 private:
  const Evaluation& cached_evaluate(const SelectionMask& mask);

  std::mutex mu_;
  std::unordered_map<SelectionMask, std::shared_future<Evaluation>, SelectionMaskHash> memo_;
  std::atomic<std::size_t> evaluations_{0};
};

struct ScorerConfig {
  GbtParams params;
  /// The training portion is split once into inner-train/inner-validation;
  /// every selector score call evaluates on inner-validation.
  double inner_validation_fraction = 0.25;
  std::uint64_t inner_split_seed = 0;
};

/// Score(.) backed by the boosted-tree classifier: fit on inner-train over
/// the masked columns, accuracy on inner-validation.
class GbtScorer final : public Scorer {
 public:
  GbtScorer(const FeatureMatrix& train_X, const LabelVector& train_y, ScorerConfig cfg);

  std::size_t n_features() const override { return inner_train_X_.n_features(); }
  std::size_t n_inner_train() const { return inner_train_X_.n_samples(); }
  std::size_t n_inner_val() const { return inner_val_X_.n_samples(); }
  const ScorerConfig& config() const { return cfg_; }

 protected:
  Evaluation evaluate(const SelectionMask& mask) override;

 private:
  ScorerConfig cfg_;
  FeatureMatrix inner_train_X_;
  LabelVector inner_train_y_;
  FeatureMatrix inner_val_X_;
  LabelVector inner_val_y_;
  std::optional<GbtTrainContext> ctx_;
};

/// Accuracy of a fitted model on a labeled set.
ScoreValue evaluate_accuracy(const GbtModel& model, const FeatureMatrix& X,
                             const LabelVector& y);

/// Final-report path: fit on the whole outer-training portion, score on the
/// untouched outer test set. Not part of any selector budget.
ScoreValue evaluate_holdout(const FeatureMatrix& train_X, const LabelVector& train_y,
                            const FeatureMatrix& test_X, const LabelVector& test_y,
                            const SelectionMask& mask, const GbtParams& params);

}  // namespace blockselect
