#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <string>

#include "blockselect/data_model.hpp"
#include "blockselect/datagen.hpp"
#include "blockselect/selector_baselines.hpp"
#include "blockselect/selector_oca.hpp"

namespace blockselect {

/// One selection run's knobs. A single global seed reproduces everything:
/// each component's seed is derive_seed(global_seed, component_name).
struct RunConfig {
  SplitSpec outer_split;
  GbtParams gbt;
  double inner_validation_fraction = 0.25;
  OcaConfig oca;
  std::uint64_t global_seed = 42;
};

/// Fills the derived sub-seeds (outer split, gbt) from the global seed.
RunConfig with_derived_seeds(RunConfig cfg);

struct PreparedData {
  FeatureMatrix train_X;
  LabelVector train_y;
  FeatureMatrix test_X;
  LabelVector test_y;
  SplitResult rows;
};

PreparedData prepare_data(const Dataset& ds, const SplitSpec& outer_split);

std::unique_ptr<GbtScorer> make_scorer(const PreparedData& data, const RunConfig& cfg);

/// Run a selector end to end: inner-validation selection plus the final
/// outer-test score of the returned mask.
SelectionResult run_method_oca(const PreparedData& data, const BlockSpec& spec,
                               const RunConfig& cfg);
SelectionResult run_method_bca(const PreparedData& data, const RunConfig& cfg);
SelectionResult run_method_rfe(const PreparedData& data, const RunConfig& cfg,
                               const RfeConfig& rfe);

/// Fingerprint of (data shape, column names, split, scorer config, seed);
/// comparisons refuse to mix results with different digests.
std::string config_digest(const PreparedData& data, const RunConfig& cfg);

std::string selection_result_to_json(const SelectionResult& result,
                                     const std::vector<std::string>& column_names,
                                     std::uint64_t global_seed,
                                     const std::string& digest);

struct StoredResult {
  SelectionResult result;
  std::vector<std::string> column_names;
  std::uint64_t global_seed = 0;
  std::string config_digest;
};

StoredResult selection_result_from_json(const std::string& text);

void write_trace_csv(const std::filesystem::path& path, const SelectionResult& result,
                     const std::string& comment_line = "");

/// The frozen comparison benchmark: a block-structured dataset at the scale
/// where a full-feature fit is visibly hurt by noise columns (110 features,
/// 1500 rows, lag-0 signal in 4 of 12 blocks plus 4 of 14 singles).
SynthSpec benchmark_synth_spec(std::uint64_t global_seed);

/// Benchmark run settings: temporal 1/3 outer split, 60/40 inner split, one
/// block sweep (eps1 = 1), default scorer parameters.
RunConfig benchmark_run_config(std::uint64_t global_seed);

/// Seeds the benchmark is pinned to; calibrated once, then frozen.
std::array<std::uint64_t, 5> benchmark_seeds();

}  // namespace blockselect
