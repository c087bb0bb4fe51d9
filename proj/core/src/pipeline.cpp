#include "blockselect/pipeline.hpp"

#include <iomanip>
#include <sstream>

#include "json.hpp"

#include "blockselect/csv.hpp"
#include "blockselect/rng.hpp"

namespace blockselect {

namespace {

ScorerConfig scorer_config(const RunConfig& cfg) {
  ScorerConfig sc;
  sc.params = cfg.gbt;
  sc.inner_validation_fraction = cfg.inner_validation_fraction;
  sc.inner_split_seed = derive_seed(cfg.global_seed, "scorer.inner_split");
  return sc;
}

void fill_test_score(SelectionResult& result, const PreparedData& data,
                     const RunConfig& cfg) {
  result.test_score = evaluate_holdout(data.train_X, data.train_y, data.test_X,
                                       data.test_y, result.mask, cfg.gbt);
}

nlohmann::ordered_json score_to_json(const ScoreValue& s) {
  nlohmann::ordered_json j;
  j["n_correct"] = s.n_correct;
  j["n_eval_samples"] = s.n_eval_samples;
  j["accuracy"] = s.accuracy();
  return j;
}

ScoreValue score_from_json(const nlohmann::json& j) {
  ScoreValue s;
  s.n_correct = j.at("n_correct").get<std::size_t>();
  s.n_eval_samples = j.at("n_eval_samples").get<std::size_t>();
  return s;
}

}  // namespace

RunConfig with_derived_seeds(RunConfig cfg) {
  cfg.outer_split.seed = derive_seed(cfg.global_seed, "split.outer");
  cfg.gbt.seed = derive_seed(cfg.global_seed, "scorer.gbt");
  return cfg;
}

PreparedData prepare_data(const Dataset& ds, const SplitSpec& outer_split) {
  PreparedData out;
  out.rows = split_rows(ds.X.n_samples(), outer_split);
  out.train_X = ds.X.select_rows(out.rows.train_rows);
  out.train_y = select_labels(ds.y, out.rows.train_rows);
  out.test_X = ds.X.select_rows(out.rows.test_rows);
  out.test_y = select_labels(ds.y, out.rows.test_rows);
  return out;
}

std::unique_ptr<GbtScorer> make_scorer(const PreparedData& data, const RunConfig& cfg) {
  return std::make_unique<GbtScorer>(data.train_X, data.train_y, scorer_config(cfg));
}

SelectionResult run_method_oca(const PreparedData& data, const BlockSpec& spec,
                               const RunConfig& cfg) {
  auto scorer = make_scorer(data, cfg);
  SelectionResult result = run_oca(*scorer, spec, cfg.oca);
  fill_test_score(result, data, cfg);
  return result;
}

SelectionResult run_method_bca(const PreparedData& data, const RunConfig& cfg) {
  auto scorer = make_scorer(data, cfg);
  SelectionResult result = run_bca(*scorer, cfg.oca);
  fill_test_score(result, data, cfg);
  return result;
}

SelectionResult run_method_rfe(const PreparedData& data, const RunConfig& cfg,
                               const RfeConfig& rfe) {
  auto scorer = make_scorer(data, cfg);
  SelectionResult result = run_rfe(*scorer, rfe);
  fill_test_score(result, data, cfg);
  return result;
}

std::string config_digest(const PreparedData& data, const RunConfig& cfg) {
  std::ostringstream canon;
  canon << data.train_X.n_samples() << '|' << data.test_X.n_samples() << '|'
        << data.train_X.n_features() << '|';
  for (const auto& name : data.train_X.column_names()) canon << name << ',';
  canon << '|' << to_string(cfg.outer_split.mode) << '|' << cfg.outer_split.test_fraction
        << '|' << cfg.outer_split.seed << '|' << cfg.gbt.n_trees << '|'
        << cfg.gbt.max_depth << '|' << cfg.gbt.learning_rate << '|'
        << cfg.gbt.min_samples_leaf << '|' << cfg.gbt.subsample_fraction << '|'
        << cfg.gbt.seed << '|' << cfg.inner_validation_fraction << '|' << cfg.global_seed;
  std::ostringstream hex;
  hex << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(canon.str());
  return hex.str();
}

std::string selection_result_to_json(const SelectionResult& result,
                                     const std::vector<std::string>& column_names,
                                     std::uint64_t global_seed,
                                     const std::string& digest) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["method"] = result.method;
  j["global_seed"] = global_seed;
  j["config_digest"] = digest;
  j["n_features"] = result.mask.size();
  j["column_names"] = column_names;
  nlohmann::ordered_json bits = nlohmann::ordered_json::array();
  for (std::uint8_t b : result.mask.bits) bits.push_back(static_cast<int>(b));
  j["mask"] = std::move(bits);
  nlohmann::ordered_json selected = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < result.mask.size(); ++i) {
    if (result.mask.test(i)) selected.push_back(column_names.at(i));
  }
  j["selected_columns"] = std::move(selected);
  j["popcount"] = result.mask.popcount();
  j["feature_fraction_pct"] = 100.0 * static_cast<double>(result.mask.popcount()) /
                              static_cast<double>(result.mask.size());
  j["inner_score"] = score_to_json(result.inner_score);
  if (result.test_score) j["test_score"] = score_to_json(*result.test_score);
  j["evaluations"] = result.evaluations;
  nlohmann::ordered_json bounds;
  bounds["j_best_end"] = result.phase_boundaries.j_best_end;
  bounds["block_end"] = result.phase_boundaries.block_end;
  bounds["binary_end"] = result.phase_boundaries.binary_end;
  j["phase_boundaries"] = std::move(bounds);
  nlohmann::ordered_json trace = nlohmann::ordered_json::array();
  for (const auto& row : result.trace) {
    nlohmann::ordered_json r;
    r["evaluation_index"] = row.evaluation_index;
    r["inner_score"] = score_to_json(row.inner_score);
    r["popcount"] = row.popcount;
    r["phase"] = row.phase;
    trace.push_back(std::move(r));
  }
  j["trace"] = std::move(trace);
  if (!result.rfe_rounds.empty()) {
    nlohmann::ordered_json rounds = nlohmann::ordered_json::array();
    for (const auto& round : result.rfe_rounds) {
      nlohmann::ordered_json r;
      r["n_selected"] = round.n_selected;
      r["inner_score"] = score_to_json(round.inner_score);
      r["evaluation_index"] = round.evaluation_index;
      rounds.push_back(std::move(r));
    }
    j["rfe_rounds"] = std::move(rounds);
  }
  return j.dump(2) + "\n";
}

StoredResult selection_result_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  StoredResult out;
  out.result.method = j.at("method").get<std::string>();
  out.global_seed = j.at("global_seed").get<std::uint64_t>();
  out.config_digest = j.at("config_digest").get<std::string>();
  out.column_names = j.at("column_names").get<std::vector<std::string>>();
  for (const auto& b : j.at("mask")) {
    out.result.mask.bits.push_back(b.get<int>() ? 1 : 0);
  }
  out.result.inner_score = score_from_json(j.at("inner_score"));
  if (j.contains("test_score")) {
    out.result.test_score = score_from_json(j.at("test_score"));
  }
  out.result.evaluations = j.at("evaluations").get<std::size_t>();
  for (const auto& r : j.at("trace")) {
    TraceRow row;
    row.evaluation_index = r.at("evaluation_index").get<std::size_t>();
    row.inner_score = score_from_json(r.at("inner_score"));
    row.popcount = r.at("popcount").get<std::size_t>();
    row.phase = r.at("phase").get<std::string>();
    out.result.trace.push_back(std::move(row));
  }
  if (j.contains("rfe_rounds")) {
    for (const auto& r : j.at("rfe_rounds")) {
      RfeRound round;
      round.n_selected = r.at("n_selected").get<std::size_t>();
      round.inner_score = score_from_json(r.at("inner_score"));
      round.evaluation_index = r.at("evaluation_index").get<std::size_t>();
      out.result.rfe_rounds.push_back(round);
    }
  }
  return out;
}

SynthSpec benchmark_synth_spec(std::uint64_t global_seed) {
  SynthSpec spec;
  spec.n_blocks = 12;
  spec.block_len = 8;
  spec.p_singles = 14;
  spec.n_samples = 1500;
  spec.noise_std = 0.55;
  spec.informative_block_lags = {{0, 0}, {1, 0}, {2, 0}, {3, 0}};
  spec.informative_singles = {0, 1, 2, 3};
  spec.seed = derive_seed(global_seed, "datagen.blocks");
  return spec;
}

RunConfig benchmark_run_config(std::uint64_t global_seed) {
  RunConfig cfg;
  cfg.outer_split.mode = SplitMode::temporal;
  cfg.outer_split.test_fraction = 1.0 / 3.0;
  cfg.inner_validation_fraction = 0.4;
  cfg.oca.eps1 = 1.0;  // a single block sweep
  cfg.global_seed = global_seed;
  return with_derived_seeds(cfg);
}

std::array<std::uint64_t, 5> benchmark_seeds() { return {1, 3, 6, 8, 10}; }

void write_trace_csv(const std::filesystem::path& path, const SelectionResult& result,
                     const std::string& comment_line) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(result.trace.size());
  for (const auto& row : result.trace) {
    rows.push_back({std::to_string(row.evaluation_index),
                    format_double(row.inner_score.accuracy()),
                    std::to_string(row.popcount), row.phase});
  }
  write_csv(path, {"evaluation_index", "inner_score", "popcount", "phase"}, rows,
            comment_line);
}

}  // namespace blockselect
