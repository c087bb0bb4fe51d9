#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "blockselect/backtest.hpp"
#include "blockselect/convergence_lab.hpp"
#include "blockselect/csv.hpp"
#include "blockselect/datagen.hpp"
#include "blockselect/parallel.hpp"
#include "blockselect/pipeline.hpp"
#include "blockselect/rng.hpp"

namespace fs = std::filesystem;
using namespace blockselect;

namespace {

struct CliOptions {
  std::uint64_t seed = 42;
  int threads = 0;  // 0 = BLOCKSELECT_THREADS env or hardware
  fs::path out_dir = ".";

  // gen
  std::string preset = "blocks";
  std::size_t n_samples = 0;  // 0 = preset default

  // select / backtest
  fs::path data_path;
  fs::path blocks_path;
  std::string label_column = "label";
  std::string pnl_column;
  std::string method = "oca";
  std::string split_mode = "temporal";
  double test_fraction = 1.0 / 3.0;
  double target_fraction = 0.0;
  std::size_t target_count = 0;
  std::size_t rfe_step = 1;
  fs::path result_out;
  fs::path trace_out;

  // scorer / selector knobs
  GbtParams gbt;
  double inner_validation_fraction = 0.25;
  OcaConfig oca;

  // compare
  std::vector<fs::path> result_paths;

  // backtest
  fs::path mask_path;
  std::size_t histogram_bins = 30;
  double include_threshold = 0.5;

  // ratecheck
  std::size_t rate_dim = 10;
  std::size_t rate_seeds = 50;
  std::size_t rate_kmax = 500;
  std::size_t rate_instances = 1;
  double lambda_min = 1.0;
  double lambda_max = 20.0;
};

void apply_config_file(CliOptions& opt, const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  nlohmann::json j;
  in >> j;
  if (j.contains("seed")) opt.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("threads")) opt.threads = j["threads"].get<int>();
  if (j.contains("out_dir")) opt.out_dir = j["out_dir"].get<std::string>();
  if (j.contains("split")) {
    const auto& s = j["split"];
    if (s.contains("mode")) opt.split_mode = s["mode"].get<std::string>();
    if (s.contains("test_fraction")) opt.test_fraction = s["test_fraction"].get<double>();
  }
  if (j.contains("gbt")) {
    const auto& g = j["gbt"];
    if (g.contains("n_trees")) opt.gbt.n_trees = g["n_trees"].get<int>();
    if (g.contains("max_depth")) opt.gbt.max_depth = g["max_depth"].get<int>();
    if (g.contains("learning_rate")) opt.gbt.learning_rate = g["learning_rate"].get<double>();
    if (g.contains("min_samples_leaf")) {
      opt.gbt.min_samples_leaf = g["min_samples_leaf"].get<int>();
    }
    if (g.contains("subsample_fraction")) {
      opt.gbt.subsample_fraction = g["subsample_fraction"].get<double>();
    }
  }
  if (j.contains("oca")) {
    const auto& o = j["oca"];
    if (o.contains("eps1")) opt.oca.eps1 = o["eps1"].get<double>();
    if (o.contains("eps2")) opt.oca.eps2 = o["eps2"].get<double>();
    if (o.contains("iter_max1")) opt.oca.iter_max1 = o["iter_max1"].get<int>();
    if (o.contains("iter_max2")) opt.oca.iter_max2 = o["iter_max2"].get<int>();
  }
  if (j.contains("inner_validation_fraction")) {
    opt.inner_validation_fraction = j["inner_validation_fraction"].get<double>();
  }
  if (j.contains("rfe")) {
    const auto& r = j["rfe"];
    if (r.contains("target_fraction")) opt.target_fraction = r["target_fraction"].get<double>();
    if (r.contains("target_count")) opt.target_count = r["target_count"].get<std::size_t>();
    if (r.contains("step")) opt.rfe_step = r["step"].get<std::size_t>();
  }
}

void require_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw std::runtime_error("output directory does not exist: " + dir.string());
  }
}

void write_text_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

std::string seed_comment(const CliOptions& opt, const std::string& component) {
  return "seed=" + std::to_string(opt.seed) + " component=" + component +
         " sub_seed=" + std::to_string(derive_seed(opt.seed, component));
}

RunConfig make_run_config(const CliOptions& opt) {
  RunConfig cfg;
  cfg.outer_split.mode = split_mode_from_string(opt.split_mode);
  cfg.outer_split.test_fraction = opt.test_fraction;
  cfg.gbt = opt.gbt;
  cfg.inner_validation_fraction = opt.inner_validation_fraction;
  cfg.oca = opt.oca;
  cfg.oca.threads = resolve_thread_count(opt.threads);
  cfg.global_seed = opt.seed;
  return with_derived_seeds(cfg);
}

Dataset load_dataset(const CliOptions& opt) {
  if (!fs::exists(opt.data_path)) {
    throw std::runtime_error("data file does not exist: " + opt.data_path.string());
  }
  LoadOptions load;
  load.label_column = opt.label_column;
  if (!opt.pnl_column.empty()) load.pnl_column = opt.pnl_column;
  return load_csv(opt.data_path, load);
}

int cmd_gen(const CliOptions& opt) {
  require_dir(opt.out_dir);
  if (opt.preset == "blocks" || opt.preset == "bench") {
    SynthSpec spec;
    if (opt.preset == "bench") {
      spec = benchmark_synth_spec(opt.seed);
    } else {
      spec.seed = derive_seed(opt.seed, "datagen.blocks");
    }
    if (opt.n_samples > 0) spec.n_samples = opt.n_samples;
    const BlockDataset data = gen_block_dataset(spec);
    const Dataset ds{data.X, data.y, std::nullopt};

    const fs::path tmp = opt.out_dir / "data.csv.tmp";
    write_dataset_csv(tmp, ds);
    fs::rename(tmp, opt.out_dir / "data.csv");
    write_text_atomic(opt.out_dir / "blocks.json",
                      block_map_to_json(data.blocks, data.X.column_names()));
    write_text_atomic(opt.out_dir / "ground_truth.json",
                      mask_to_json(data.ground_truth, data.X.column_names(), opt.seed));
    std::cout << "wrote " << (opt.out_dir / "data.csv").string() << " ("
              << data.X.n_samples() << " rows, " << data.X.n_features()
              << " features), blocks.json, ground_truth.json\n";
    return 0;
  }
  if (opt.preset == "trades") {
    TradeGenSpec spec;
    if (opt.n_samples > 0) spec.n_trades = opt.n_samples;
    spec.seed = derive_seed(opt.seed, "datagen.trades");
    const auto trades = gen_trades(spec);
    const Dataset ds = trades_to_dataset(trades);
    const fs::path tmp = opt.out_dir / "trades.csv.tmp";
    write_dataset_csv(tmp, ds);
    fs::rename(tmp, opt.out_dir / "trades.csv");
    std::cout << "wrote " << (opt.out_dir / "trades.csv").string() << " ("
              << trades.size() << " trades)\n";
    return 0;
  }
  throw std::runtime_error("unknown preset '" + opt.preset + "' (use blocks|bench|trades)");
}

int cmd_select(const CliOptions& opt) {
  const Dataset ds = load_dataset(opt);
  BlockSpec blocks;
  if (!opt.blocks_path.empty()) {
    blocks = load_block_map(opt.blocks_path, ds.X.column_names());
  } else {
    blocks = infer_blocks(ds.X.column_names());
  }

  const RunConfig cfg = make_run_config(opt);
  const PreparedData data = prepare_data(ds, cfg.outer_split);

  SelectionResult result;
  if (opt.method == "oca") {
    result = run_method_oca(data, blocks, cfg);
  } else if (opt.method == "bca") {
    result = run_method_bca(data, cfg);
  } else if (opt.method == "rfe") {
    RfeConfig rfe;
    rfe.step = opt.rfe_step;
    if (opt.target_count > 0) {
      rfe.target_count = opt.target_count;
    } else if (opt.target_fraction > 0.0) {
      rfe.target_count = static_cast<std::size_t>(std::max<long long>(
          1, std::llround(opt.target_fraction * static_cast<double>(ds.X.n_features()))));
    } else {
      throw std::runtime_error("rfe needs --target-count or --target-fraction");
    }
    result = run_method_rfe(data, cfg, rfe);
  } else {
    throw std::runtime_error("unknown method '" + opt.method + "' (use oca|bca|rfe)");
  }

  const std::string digest = config_digest(data, cfg);
  fs::path out = opt.result_out;
  if (out.empty()) out = opt.out_dir / ("result_" + opt.method + ".json");
  if (out.has_parent_path()) require_dir(out.parent_path());
  write_text_atomic(out, selection_result_to_json(result, ds.X.column_names(),
                                                  cfg.global_seed, digest));
  if (!opt.trace_out.empty()) {
    if (opt.trace_out.has_parent_path()) require_dir(opt.trace_out.parent_path());
    write_trace_csv(opt.trace_out, result, seed_comment(opt, "select." + opt.method));
  }
  std::cout << opt.method << ": " << result.mask.popcount() << "/" << result.mask.size()
            << " features, inner " << result.inner_score.accuracy() << ", test "
            << (result.test_score ? result.test_score->accuracy() : 0.0) << ", "
            << result.evaluations << " evaluations\n"
            << "wrote " << out.string() << "\n";
  return 0;
}

int cmd_compare(const CliOptions& opt) {
  if (opt.result_paths.empty()) {
    throw std::runtime_error("compare needs at least one --results file");
  }
  require_dir(opt.out_dir);
  std::vector<StoredResult> stored;
  for (const auto& path : opt.result_paths) {
    stored.push_back(selection_result_from_json(read_text(path)));
  }
  for (std::size_t i = 1; i < stored.size(); ++i) {
    if (stored[i].config_digest != stored[0].config_digest) {
      throw std::runtime_error(
          "results were not computed under one config: digest mismatch between " +
          opt.result_paths[0].string() + " (" + stored[0].config_digest + ") and " +
          opt.result_paths[i].string() + " (" + stored[i].config_digest + ")");
    }
  }
  std::vector<SelectionResult> results;
  results.reserve(stored.size());
  for (auto& s : stored) results.push_back(std::move(s.result));
  const auto rows = compare_methods(results);

  std::vector<std::vector<std::string>> csv_rows;
  for (const auto& row : rows) {
    csv_rows.push_back({row.method, format_double(row.feature_fraction_pct),
                        format_double(row.score_pct), format_double(row.inner_score_pct),
                        std::to_string(row.evaluations), row.pareto ? "1" : "0"});
  }
  const fs::path csv_path = opt.out_dir / "comparison.csv";
  const fs::path tmp = opt.out_dir / "comparison.csv.tmp";
  write_csv(tmp, {"method", "pct_features", "score_pct", "inner_score_pct",
                  "evaluations", "pareto"},
            csv_rows, "config_digest=" + stored[0].config_digest);
  fs::rename(tmp, csv_path);

  const std::string table = comparison_table_text(rows);
  write_text_atomic(opt.out_dir / "comparison.txt", table);
  std::cout << table << "wrote " << csv_path.string() << "\n";
  return 0;
}

int cmd_backtest(const CliOptions& opt) {
  require_dir(opt.out_dir);
  CliOptions load_opt = opt;
  if (load_opt.pnl_column.empty()) load_opt.pnl_column = "pnl";
  const Dataset ds = load_dataset(load_opt);
  if (!ds.pnl) throw std::runtime_error("backtest needs a pnl column");

  SelectionMask mask = SelectionMask::ones(ds.X.n_features());
  if (!opt.mask_path.empty()) {
    const std::string text = read_text(opt.mask_path);
    const auto j = nlohmann::json::parse(text);
    mask = j.contains("bits") ? mask_from_json(text)
                              : selection_result_from_json(text).result.mask;
    if (mask.size() != ds.X.n_features()) {
      throw std::runtime_error("mask length does not match the dataset");
    }
  }

  SplitSpec split;
  split.mode = split_mode_from_string(opt.split_mode);
  split.test_fraction = opt.test_fraction;
  split.seed = derive_seed(opt.seed, "split.outer");
  const SplitResult rows = split_rows(ds.X.n_samples(), split);

  const auto trades = dataset_to_trades(ds);
  const auto train_trades = select_trades(trades, rows.train_rows);
  const auto test_trades = select_trades(trades, rows.test_rows);
  const Dataset train_ds = trades_to_dataset(train_trades);

  GbtParams params = opt.gbt;
  params.seed = derive_seed(opt.seed, "scorer.gbt");
  const GbtModel model = fit_gbt(train_ds.X, train_ds.y, mask, params);
  const auto included = filter_trades(model, test_trades, opt.include_threshold);
  const EquityCurve filtered = equity_curve(test_trades, included);
  const EquityCurve unfiltered =
      equity_curve(test_trades, std::vector<std::uint8_t>(test_trades.size(), 1));
  const PnlHistogram hist = pnl_histogram(trades, opt.histogram_bins);

  auto write_curve = [&](const std::string& name, const EquityCurve& curve,
                         const std::string& variant) {
    std::vector<std::vector<std::string>> out_rows;
    for (const auto& p : curve.points) {
      out_rows.push_back({std::to_string(p.trade_index), format_double(p.cum_pnl), variant});
    }
    const fs::path tmp = opt.out_dir / (name + ".tmp");
    write_csv(tmp, {"trade_index", "cum_pnl", "variant"}, out_rows,
              seed_comment(opt, "backtest." + variant));
    fs::rename(tmp, opt.out_dir / name);
  };
  write_curve("equity_filtered.csv", filtered, "filtered");
  write_curve("equity_unfiltered.csv", unfiltered, "unfiltered");

  std::vector<std::vector<std::string>> hist_rows;
  for (std::size_t i = 0; i < hist.counts.size(); ++i) {
    hist_rows.push_back({format_double(hist.edges[i]), format_double(hist.edges[i + 1]),
                         std::to_string(hist.counts[i])});
  }
  const fs::path hist_tmp = opt.out_dir / "histogram.csv.tmp";
  write_csv(hist_tmp, {"bin_lo", "bin_hi", "count"}, hist_rows,
            seed_comment(opt, "backtest.histogram"));
  fs::rename(hist_tmp, opt.out_dir / "histogram.csv");

  std::size_t n_included = 0;
  for (auto b : included) n_included += b;
  std::cout << "split=" << opt.split_mode << " test_trades=" << test_trades.size()
            << " included=" << n_included << "\n"
            << "terminal filtered=" << filtered.terminal()
            << " unfiltered=" << unfiltered.terminal() << "\n"
            << "wrote equity_filtered.csv equity_unfiltered.csv histogram.csv in "
            << opt.out_dir.string() << "\n";
  return 0;
}

int cmd_ratecheck(const CliOptions& opt) {
  require_dir(opt.out_dir);
  const int threads = resolve_thread_count(opt.threads);
  std::size_t total_violations = 0;
  for (std::size_t inst = 0; inst < opt.rate_instances; ++inst) {
    const std::string component = "ratecheck.instance." + std::to_string(inst);
    const std::uint64_t inst_seed = derive_seed(opt.seed, component);
    const QuadraticProblem problem =
        QuadraticProblem::random_spd(opt.rate_dim, inst_seed, opt.lambda_min, opt.lambda_max);
    Rng x0_rng(derive_seed(opt.seed, component + ".x0"));
    Eigen::VectorXd x0 = problem.x_star();
    for (Eigen::Index i = 0; i < x0.size(); ++i) x0(i) += 2.0 * x0_rng.normal();

    const auto trajectories = rcd_minimize(problem, x0, opt.rate_kmax, opt.rate_seeds,
                                           derive_seed(opt.seed, component + ".rcd"),
                                           threads);
    const RateReport report = check_rate_bounds(trajectories, problem, x0);
    total_violations += report.violations;

    const fs::path out = opt.out_dir / ("rate_" + std::to_string(inst) + ".csv");
    const fs::path tmp = opt.out_dir / ("rate_" + std::to_string(inst) + ".csv.tmp");
    write_rate_report_csv(tmp, report, seed_comment(opt, component));
    fs::rename(tmp, out);
    std::cout << "instance " << inst << ": n=" << opt.rate_dim << " R0=" << report.r0
              << " violations=" << report.violations << " -> " << out.string() << "\n";
  }
  std::cout << "total bound violations: " << total_violations << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Block-variable feature selection toolkit (OCA, BCA, RFE)"};
  app.require_subcommand(1);
  app.fallthrough(true);

  CliOptions opt;
  std::string config_path;

  // first pass: honor --config before flag overrides
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") config_path = argv[i + 1];
  }
  try {
    if (!config_path.empty()) apply_config_file(opt, config_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  app.add_option("--config", config_path, "JSON config file; flags override its values");
  app.add_option("--seed", opt.seed, "global seed; sub-seeds derive from it by component name");
  app.add_option("--threads", opt.threads,
                 "worker cap (0 = BLOCKSELECT_THREADS env or hardware)");
  app.add_option("--out-dir", opt.out_dir, "output directory (must exist)");

  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset");
  gen->add_option("--preset", opt.preset, "blocks|bench|trades")
      ->check(CLI::IsMember({"blocks", "bench", "trades"}));
  gen->add_option("--n", opt.n_samples, "rows (0 = preset default)");

  auto* select = app.add_subcommand("select", "run a feature selector");
  select->add_option("--data", opt.data_path, "input CSV")->required();
  select->add_option("--method", opt.method, "oca|bca|rfe")
      ->check(CLI::IsMember({"oca", "bca", "rfe"}));
  select->add_option("--blocks", opt.blocks_path,
                     "block-map sidecar JSON (default: infer from column names)");
  select->add_option("--label-column", opt.label_column, "label column name");
  select->add_option("--pnl-column", opt.pnl_column, "pnl column to exclude from features");
  select->add_option("--split", opt.split_mode, "temporal|randomized");
  select->add_option("--test-fraction", opt.test_fraction, "outer test fraction");
  select->add_option("--target-count", opt.target_count, "rfe: features to keep");
  select->add_option("--target-fraction", opt.target_fraction,
                     "rfe: fraction of features to keep");
  select->add_option("--rfe-step", opt.rfe_step, "rfe: features removed per round");
  select->add_option("--out", opt.result_out, "result JSON path");
  select->add_option("--trace-out", opt.trace_out, "trace CSV path");
  select->add_option("--trees", opt.gbt.n_trees, "scorer trees");
  select->add_option("--max-depth", opt.gbt.max_depth, "scorer tree depth");
  select->add_option("--learning-rate", opt.gbt.learning_rate, "scorer learning rate");
  select->add_option("--eps1", opt.oca.eps1, "block-phase tolerance");
  select->add_option("--eps2", opt.oca.eps2, "binary-phase tolerance");
  select->add_option("--iter-max1", opt.oca.iter_max1, "block-phase sweep cap");
  select->add_option("--iter-max2", opt.oca.iter_max2, "binary-phase pass cap");

  auto* compare = app.add_subcommand("compare", "tabulate selection results");
  compare->add_option("--results", opt.result_paths, "result JSON files")->required();

  auto* backtest = app.add_subcommand("backtest", "equity curves with/without filtering");
  backtest->add_option("--data", opt.data_path, "trades CSV with a pnl column")->required();
  backtest->add_option("--split", opt.split_mode, "temporal|randomized");
  backtest->add_option("--test-fraction", opt.test_fraction, "test fraction");
  backtest->add_option("--mask", opt.mask_path, "mask or result JSON for the filter model");
  backtest->add_option("--label-column", opt.label_column, "label column name");
  backtest->add_option("--pnl-column", opt.pnl_column, "pnl column name (default pnl)");
  backtest->add_option("--bins", opt.histogram_bins, "histogram bins");
  backtest->add_option("--threshold", opt.include_threshold, "inclusion probability cutoff");

  auto* ratecheck = app.add_subcommand("ratecheck", "verify coordinate-descent rate bounds");
  ratecheck->add_option("--n", opt.rate_dim, "problem dimension");
  ratecheck->add_option("--seeds", opt.rate_seeds, "trajectories per instance");
  ratecheck->add_option("--kmax", opt.rate_kmax, "steps per trajectory");
  ratecheck->add_option("--instances", opt.rate_instances, "number of random instances");
  ratecheck->add_option("--lambda-min", opt.lambda_min, "smallest eigenvalue");
  ratecheck->add_option("--lambda-max", opt.lambda_max, "largest eigenvalue");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen(opt);
    if (select->parsed()) return cmd_select(opt);
    if (compare->parsed()) return cmd_compare(opt);
    if (backtest->parsed()) return cmd_backtest(opt);
    if (ratecheck->parsed()) return cmd_ratecheck(opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
