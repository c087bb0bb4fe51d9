#include "blockselect/selector_oca.hpp"

#include <cmath>
#include <stdexcept>

#include "blockselect/parallel.hpp"

namespace blockselect {

namespace {

// Scores from one oracle share the evaluation set, so exact correct-count
// comparison replaces float comparison.
bool score_gt(const ScoreValue& a, const ScoreValue& b) { return a.n_correct > b.n_correct; }
bool score_eq(const ScoreValue& a, const ScoreValue& b) { return a.n_correct == b.n_correct; }

void push_trace(std::vector<TraceRow>* trace, const Scorer& scorer,
                const ScoreValue& score, std::size_t popcount, const char* phase) {
  if (!trace) return;
  trace->push_back({scorer.evaluations(), score, popcount, phase});
}

}  // namespace

void OcaConfig::validate() const {
  if (eps1 < 0.0 || eps2 < 0.0) {
    throw std::invalid_argument("OcaConfig: tolerances must be nonnegative");
  }
  if (iter_max1 < 1 || iter_max2 < 1) {
    throw std::invalid_argument("OcaConfig: iteration maxima must be >= 1");
  }
}

JBestResult j_best_search(Scorer& scorer, const BlockSpec& spec,
                          const ImportanceVector& importance, const OcaConfig& cfg) {
  cfg.validate();
  if (spec.n_blocks() == 0) {
    // No blocks: phase is skipped, start from the singles-only vector.
    return {0, BlockCountVector{{}, true}};
  }
  const std::size_t l_min = spec.min_block_len();
  std::vector<ScoreValue> scores(l_min);
  parallel_for(l_min, cfg.threads, [&](std::size_t i) {
    const std::size_t k = i + 1;
    BlockCountVector counts{std::vector<std::size_t>(spec.n_blocks(), k), true};
    scores[i] = scorer.score(counts_to_mask(counts, importance, spec));
  });
  std::size_t best = 0;
  for (std::size_t i = 1; i < l_min; ++i) {
    if (score_gt(scores[i], scores[best])) best = i;
  }
  const std::size_t k_star = best + 1;
  return {k_star, BlockCountVector{std::vector<std::size_t>(spec.n_blocks(), k_star), true}};
}

BlockCountVector block_phase(Scorer& scorer, const BlockSpec& spec,
                             const ImportanceVector& importance,
                             const BlockCountVector& x0, const OcaConfig& cfg,
                             std::vector<TraceRow>* trace) {
  cfg.validate();
  if (x0.counts.size() != spec.n_blocks()) {
    throw std::invalid_argument("block_phase: x0 does not match the block spec");
  }
  BlockCountVector x = x0;
  ScoreValue current = scorer.score(counts_to_mask(x, importance, spec));

  for (int sweep = 0; sweep < cfg.iter_max1; ++sweep) {
    const ScoreValue sweep_start = current;
    for (std::size_t b = 0; b < spec.n_blocks(); ++b) {
      const std::size_t len = spec.blocks[b].members.size();
      std::vector<std::optional<ScoreValue>> scores(len + 1);
      parallel_for(len + 1, cfg.threads, [&](std::size_t j) {
        BlockCountVector candidate = x;
        candidate.counts[b] = j;
        const SelectionMask mask = counts_to_mask(candidate, importance, spec);
        if (mask.popcount() == 0) return;  // rejected without scoring
        scores[j] = scorer.score(mask);
      });
      std::size_t best_j = len + 1;
      for (std::size_t j = 0; j <= len; ++j) {
        if (!scores[j]) continue;
        if (best_j > len || score_gt(*scores[j], *scores[best_j])) best_j = j;
      }
      if (best_j > len) continue;  // every candidate was empty; keep x
      x.counts[b] = best_j;
      current = *scores[best_j];
      std::size_t popcount = x.singles_included ? spec.n_singles() : 0;
      for (std::size_t c : x.counts) popcount += c;
      push_trace(trace, scorer, current, popcount, "block");
    }
    if (std::abs(current.accuracy() - sweep_start.accuracy()) < cfg.eps1) break;
  }
  return x;
}

BinarySweepResult binary_sweep_phase(Scorer& scorer, const SelectionMask& start,
                                     const OcaConfig& cfg,
                                     std::vector<TraceRow>* trace) {
  cfg.validate();
  if (!start.any()) {
    throw std::invalid_argument("binary_sweep_phase: start mask is empty");
  }
  SelectionMask best = start;
  ScoreValue best_score = scorer.score(best);
  push_trace(trace, scorer, best_score, best.popcount(), "binary");

  const std::size_t n = best.size();
  for (int pass = 0; pass < cfg.iter_max2; ++pass) {
    const ScoreValue pass_start = best_score;
    std::size_t accepted = 0;
    for (std::size_t i = 0; i < n; ++i) {
      SelectionMask candidate = best;
      candidate.flip(i);
      if (!candidate.any()) continue;  // empty-mask guard, never scored
      const ScoreValue s = scorer.score(candidate);
      const bool cleared_bit = !candidate.test(i);
      // The >= acceptance admits equal-score flips only when they shrink the
      // set, so (score, -popcount) strictly increases on every acceptance.
      if (score_gt(s, best_score) || (score_eq(s, best_score) && cleared_bit)) {
        best = std::move(candidate);
        best_score = s;
        ++accepted;
        push_trace(trace, scorer, best_score, best.popcount(), "binary");
      }
    }
    if (accepted == 0) break;
    if (std::abs(best_score.accuracy() - pass_start.accuracy()) < cfg.eps2) break;
  }
  return {std::move(best), best_score};
}

SelectionResult run_oca(Scorer& scorer, const BlockSpec& spec, const OcaConfig& cfg) {
  cfg.validate();
  spec.validate(scorer.n_features());

  SelectionResult result;
  result.method = "oca";

  const SelectionMask all_ones = SelectionMask::ones(scorer.n_features());
  const ImportanceVector importance = scorer.importance(all_ones);

  const JBestResult jbest = j_best_search(scorer, spec, importance, cfg);
  const SelectionMask x0_mask = counts_to_mask(jbest.x0, importance, spec);
  push_trace(&result.trace, scorer, scorer.score(x0_mask), x0_mask.popcount(), "j_best");
  result.phase_boundaries.j_best_end = result.trace.size();

  BlockCountVector counts = jbest.x0;
  if (spec.n_blocks() > 0) {
    counts = block_phase(scorer, spec, importance, jbest.x0, cfg, &result.trace);
  }
  result.phase_boundaries.block_end = result.trace.size();

  const SelectionMask start_mask = counts_to_mask(counts, importance, spec);
  BinarySweepResult binary = binary_sweep_phase(scorer, start_mask, cfg, &result.trace);
  result.phase_boundaries.binary_end = result.trace.size();

  result.mask = std::move(binary.mask);
  result.inner_score = binary.score;
  result.evaluations = scorer.evaluations();
  return result;
}

}  // namespace blockselect
