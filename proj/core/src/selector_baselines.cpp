#include "blockselect/selector_baselines.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace blockselect {

void RfeConfig::validate(std::size_t n_features) const {
  if (target_count < 1) throw std::invalid_argument("RfeConfig: target_count must be >= 1");
  if (target_count > n_features) {
    throw std::invalid_argument("RfeConfig: target_count exceeds feature count");
  }
  if (step < 1) throw std::invalid_argument("RfeConfig: step must be >= 1");
}

SelectionResult run_bca(Scorer& scorer, const OcaConfig& cfg, const SelectionMask& start) {
  cfg.validate();
  if (start.size() != scorer.n_features()) {
    throw std::invalid_argument("run_bca: start mask length mismatch");
  }
  if (!start.any()) {
    throw std::invalid_argument("run_bca: start mask is empty");
  }
  SelectionResult result;
  result.method = "bca";
  BinarySweepResult sweep = binary_sweep_phase(scorer, start, cfg, &result.trace);
  result.phase_boundaries.binary_end = result.trace.size();
  result.mask = std::move(sweep.mask);
  result.inner_score = sweep.score;
  result.evaluations = scorer.evaluations();
  return result;
}

SelectionResult run_bca(Scorer& scorer, const OcaConfig& cfg) {
  return run_bca(scorer, cfg, SelectionMask::ones(scorer.n_features()));
}

SelectionResult run_rfe(Scorer& scorer, const RfeConfig& cfg) {
  const std::size_t n = scorer.n_features();
  cfg.validate(n);

  SelectionResult result;
  result.method = "rfe";
  SelectionMask mask = SelectionMask::ones(n);
  ScoreValue score = scorer.score(mask);
  ImportanceVector importance = scorer.importance(mask);
  result.rfe_rounds.push_back({mask.popcount(), score, scorer.evaluations()});

  while (mask.popcount() > cfg.target_count) {
    const double total = std::accumulate(importance.values.begin(),
                                         importance.values.end(), 0.0);
    if (total <= 0.0) {
      throw std::runtime_error(
          "run_rfe: model produced no usable feature importances "
          "(degenerate fit); cannot rank features for elimination");
    }
    std::vector<std::size_t> selected;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask.test(i)) selected.push_back(i);
    }
    // Ascending importance; ties put the higher column index first so it is
    // removed first.
    std::sort(selected.begin(), selected.end(), [&](std::size_t a, std::size_t b) {
      if (importance[a] != importance[b]) return importance[a] < importance[b];
      return a > b;
    });
    const std::size_t n_remove = std::min(cfg.step, mask.popcount() - cfg.target_count);
    for (std::size_t i = 0; i < n_remove; ++i) mask.set(selected[i], false);

    score = scorer.score(mask);
    importance = scorer.importance(mask);
    result.rfe_rounds.push_back({mask.popcount(), score, scorer.evaluations()});
  }

  result.mask = std::move(mask);
  result.inner_score = score;
  result.evaluations = scorer.evaluations();
  result.trace.push_back(
      {scorer.evaluations(), score, result.mask.popcount(), "rfe"});
  return result;
}

}  // namespace blockselect
