#pragma once

#include <optional>
#include <string>
#include <vector>

#include "blockselect/data_model.hpp"
#include "blockselect/scorer.hpp"

namespace blockselect {

struct OcaConfig {
  double eps1 = 1e-6;  // block-phase between-sweep score tolerance
  double eps2 = 1e-6;  // binary-phase pass-over-pass score tolerance
  int iter_max1 = 20;  // block-phase sweep cap
  int iter_max2 = 50;  // binary-phase pass cap
  int threads = 1;     // candidate evaluations per argmax may run in parallel

  void validate() const;
};

struct TraceRow {
  std::size_t evaluation_index = 0;  // oracle budget when the state was adopted
  ScoreValue inner_score;
  std::size_t popcount = 0;
  std::string phase;  // j_best | block | binary | rfe
};

/// Trace indices at which each phase's rows end.
struct PhaseBoundaries {
  std::size_t j_best_end = 0;
  std::size_t block_end = 0;
  std::size_t binary_end = 0;
};

struct RfeRound {
  std::size_t n_selected = 0;
  ScoreValue inner_score;
  std::size_t evaluation_index = 0;
};

struct SelectionResult {
  std::string method;
  SelectionMask mask;
  ScoreValue inner_score;
  std::optional<ScoreValue> test_score;  // outer holdout, filled by the pipeline
  std::vector<TraceRow> trace;           // accepted states, nondecreasing score
  std::size_t evaluations = 0;           // distinct masks scored
  PhaseBoundaries phase_boundaries;
  std::vector<RfeRound> rfe_rounds;  // RFE only: per-round elimination history
};

struct JBestResult {
  std::size_t k_star = 0;
  BlockCountVector x0;
};

/// Scans uniform block counts k = 1..L_min with all singles kept and returns
/// the smallest k attaining the best score.
JBestResult j_best_search(Scorer& scorer, const BlockSpec& spec,
                          const ImportanceVector& importance, const OcaConfig& cfg);

/// Cyclic coordinate ascent over per-block counts, singles always included.
/// Each block step takes the smallest argmax over j = 0..L_i.
BlockCountVector block_phase(Scorer& scorer, const BlockSpec& spec,
                             const ImportanceVector& importance,
                             const BlockCountVector& x0, const OcaConfig& cfg,
                             std::vector<TraceRow>* trace = nullptr);

struct BinarySweepResult {
  SelectionMask mask;
  ScoreValue score;
};

/// Full bit-flip coordinate ascent in fixed index order. A flip is kept when
/// it improves the score, or keeps it equal while clearing a bit; candidates
/// that would empty the mask are skipped unscored.
BinarySweepResult binary_sweep_phase(Scorer& scorer, const SelectionMask& start,
                                     const OcaConfig& cfg,
                                     std::vector<TraceRow>* trace = nullptr);

/// The complete three-stage selection: full-feature importance, J-best
/// initial guess, block count ascent, binary sweep.
SelectionResult run_oca(Scorer& scorer, const BlockSpec& spec, const OcaConfig& cfg);

}  // namespace blockselect
