#include "blockselect/scorer.hpp"

#include <stdexcept>

namespace blockselect {

const Scorer::Evaluation& Scorer::cached_evaluate(const SelectionMask& mask) {
  if (mask.size() != n_features()) {
    throw std::invalid_argument("Scorer: mask length does not match feature count");
  }
  if (!mask.any()) {
    throw std::invalid_argument("Scorer: cannot score an empty mask");
  }
  std::shared_future<Evaluation> fut;
  std::optional<std::promise<Evaluation>> owned;
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = memo_.find(mask);
    if (it != memo_.end()) {
      fut = it->second;
    } else {
      owned.emplace();
      fut = owned->get_future().share();
      memo_.emplace(mask, fut);
      evaluations_.fetch_add(1);
    }
  }
  if (owned) {
    try {
      owned->set_value(evaluate(mask));
    } catch (...) {
      owned->set_exception(std::current_exception());
    }
  }
  return fut.get();
}

ScoreValue Scorer::score(const SelectionMask& mask) { return cached_evaluate(mask).score; }

ImportanceVector Scorer::importance(const SelectionMask& mask) {
  return cached_evaluate(mask).importance;
}

GbtScorer::GbtScorer(const FeatureMatrix& train_X, const LabelVector& train_y,
                     ScorerConfig cfg)
    : cfg_(cfg) {
  if (train_X.n_samples() != train_y.size()) {
    throw std::invalid_argument("GbtScorer: sample count mismatch");
  }
  SplitSpec inner;
  inner.mode = SplitMode::randomized;
  inner.test_fraction = cfg.inner_validation_fraction;
  inner.seed = cfg.inner_split_seed;
  const SplitResult rows = split_rows(train_X.n_samples(), inner);
  inner_train_X_ = train_X.select_rows(rows.train_rows);
  inner_train_y_ = select_labels(train_y, rows.train_rows);
  inner_val_X_ = train_X.select_rows(rows.test_rows);
  inner_val_y_ = select_labels(train_y, rows.test_rows);
  ctx_.emplace(inner_train_X_, inner_train_y_);
}

Scorer::Evaluation GbtScorer::evaluate(const SelectionMask& mask) {
  const GbtModel model = fit_gbt(*ctx_, mask, cfg_.params);
  Evaluation out;
  out.score = evaluate_accuracy(model, inner_val_X_, inner_val_y_);
  out.importance = model.feature_importance();
  return out;
}

ScoreValue evaluate_accuracy(const GbtModel& model, const FeatureMatrix& X,
                             const LabelVector& y) {
  ScoreValue v;
  v.n_eval_samples = X.n_samples();
  for (std::size_t i = 0; i < X.n_samples(); ++i) {
    if (model.predict_label(X.row(i)) == y.labels[i]) ++v.n_correct;
  }
  return v;
}

ScoreValue evaluate_holdout(const FeatureMatrix& train_X, const LabelVector& train_y,
                            const FeatureMatrix& test_X, const LabelVector& test_y,
                            const SelectionMask& mask, const GbtParams& params) {
  const GbtModel model = fit_gbt(train_X, train_y, mask, params);
  return evaluate_accuracy(model, test_X, test_y);
}

}  // namespace blockselect
