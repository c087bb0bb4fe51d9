#pragma once

#include "blockselect/selector_oca.hpp"

namespace blockselect {

struct RfeConfig {
  std::size_t target_count = 1;
  std::size_t step = 1;  // features removed per round

  void validate(std::size_t n_features) const;
};

/// Binary coordinate ascent over all features, no block structure: the
/// binary sweep applied from `start` with the same acceptance rule and
/// budget accounting as OCA's final phase.
SelectionResult run_bca(Scorer& scorer, const OcaConfig& cfg, const SelectionMask& start);
SelectionResult run_bca(Scorer& scorer, const OcaConfig& cfg);  // all-ones start

/// Recursive feature elimination: refit, drop the `step` lowest-importance
/// selected features (importance ties drop the higher column index first),
/// repeat until exactly target_count remain.
SelectionResult run_rfe(Scorer& scorer, const RfeConfig& cfg);

}  // namespace blockselect
