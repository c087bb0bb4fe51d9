#define DOCTEST_CONFIG_IMPLEMENT
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

std::string g_cli;

int run_cli(const std::string& args) {
  const std::string cmd = g_cli + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  if (status < 0) return -1;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "blockselect_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::size_t count_lines(const std::string& text) {
  std::size_t n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("gen is byte-identical across reruns with one seed") {
  const fs::path a = fresh_dir("gen_a");
  const fs::path b = fresh_dir("gen_b");
  REQUIRE(run_cli("gen --preset blocks --seed 7 --out-dir " + a.string()) == 0);
  REQUIRE(run_cli("gen --preset blocks --seed 7 --out-dir " + b.string()) == 0);
  for (const char* name : {"data.csv", "blocks.json", "ground_truth.json"}) {
    CHECK(slurp(a / name) == slurp(b / name));
  }
  const fs::path c = fresh_dir("gen_c");
  REQUIRE(run_cli("gen --preset blocks --seed 8 --out-dir " + c.string()) == 0);
  CHECK(slurp(a / "data.csv") != slurp(c / "data.csv"));
}

TEST_CASE("gen trades writes the requested number of rows") {
  const fs::path dir = fresh_dir("gen_trades");
  REQUIRE(run_cli("gen --preset trades --n 1500 --seed 5 --out-dir " + dir.string()) == 0);
  const std::string csv = slurp(dir / "trades.csv");
  CHECK(count_lines(csv) == 1501);  // header + 1500 data rows
}

TEST_CASE("gen into a missing directory fails without partial files") {
  const fs::path dir = fs::temp_directory_path() / "blockselect_cli" / "missing_gen";
  fs::remove_all(dir);
  CHECK(run_cli("gen --preset blocks --seed 7 --out-dir " + dir.string()) != 0);
  CHECK_FALSE(fs::exists(dir));
}

TEST_CASE("select writes a schema-complete result and is deterministic") {
  const fs::path dir = fresh_dir("select");
  REQUIRE(run_cli("gen --preset blocks --seed 7 --out-dir " + dir.string()) == 0);
  const std::string base = "select --data " + (dir / "data.csv").string() + " --blocks " +
                           (dir / "blocks.json").string() + " --method oca --seed 7";
  REQUIRE(run_cli(base + " --out " + (dir / "r1.json").string() + " --trace-out " +
                  (dir / "t1.csv").string()) == 0);
  REQUIRE(run_cli(base + " --out " + (dir / "r2.json").string() + " --trace-out " +
                  (dir / "t2.csv").string()) == 0);
  const std::string r1 = slurp(dir / "r1.json");
  CHECK(r1 == slurp(dir / "r2.json"));
  CHECK(slurp(dir / "t1.csv") == slurp(dir / "t2.csv"));
  for (const char* field :
       {"\"method\"", "\"mask\"", "\"inner_score\"", "\"test_score\"", "\"evaluations\"",
        "\"trace\"", "\"config_digest\"", "\"phase_boundaries\"", "\"selected_columns\""}) {
    CHECK(r1.find(field) != std::string::npos);
  }
}

TEST_CASE("select rejects unknown methods with a nonzero exit") {
  const fs::path dir = fresh_dir("select_bad");
  REQUIRE(run_cli("gen --preset blocks --seed 7 --out-dir " + dir.string()) == 0);
  CHECK(run_cli("select --data " + (dir / "data.csv").string() +
                " --method lasso --out-dir " + dir.string()) != 0);
}

TEST_CASE("rfe target fraction rounds to the nearest feature count") {
  const fs::path dir = fresh_dir("select_rfe");
  REQUIRE(run_cli("gen --preset blocks --seed 7 --out-dir " + dir.string()) == 0);
  REQUIRE(run_cli("select --data " + (dir / "data.csv").string() +
                  " --method rfe --target-fraction 0.166 --seed 7 --out " +
                  (dir / "rfe.json").string()) == 0);
  const std::string json = slurp(dir / "rfe.json");
  // 0.166 * 12 features rounds to 2
  CHECK(json.find("\"popcount\": 2") != std::string::npos);
  CHECK(json.find("\"rfe_rounds\"") != std::string::npos);
}

TEST_CASE("compare joins results and refuses mismatched configs") {
  const fs::path dir = fresh_dir("compare");
  REQUIRE(run_cli("gen --preset blocks --seed 7 --out-dir " + dir.string()) == 0);
  const std::string data = (dir / "data.csv").string();
  REQUIRE(run_cli("select --data " + data + " --method oca --seed 7 --out " +
                  (dir / "oca.json").string()) == 0);
  REQUIRE(run_cli("select --data " + data + " --method bca --seed 7 --out " +
                  (dir / "bca.json").string()) == 0);
  REQUIRE(run_cli("select --data " + data + " --method rfe --target-fraction 0.25"
                  " --seed 7 --out " + (dir / "rfe.json").string()) == 0);
  REQUIRE(run_cli("compare --results " + (dir / "oca.json").string() + " " +
                  (dir / "bca.json").string() + " " + (dir / "rfe.json").string() +
                  " --out-dir " + dir.string()) == 0);
  const std::string csv = slurp(dir / "comparison.csv");
  CHECK(count_lines(csv) == 5);  // comment + header + 3 rows
  CHECK(csv.find("oca") != std::string::npos);
  CHECK(fs::exists(dir / "comparison.txt"));

  // a result computed under a different seed must be refused
  REQUIRE(run_cli("select --data " + data + " --method oca --seed 8 --out " +
                  (dir / "other.json").string()) == 0);
  CHECK(run_cli("compare --results " + (dir / "oca.json").string() + " " +
                (dir / "other.json").string() + " --out-dir " + dir.string()) != 0);
}

TEST_CASE("backtest writes both curves and the histogram") {
  const fs::path dir = fresh_dir("backtest");
  REQUIRE(run_cli("gen --preset trades --n 600 --seed 9 --out-dir " + dir.string()) == 0);
  REQUIRE(run_cli("backtest --data " + (dir / "trades.csv").string() +
                  " --split temporal --seed 9 --out-dir " + dir.string()) == 0);
  for (const char* name : {"equity_filtered.csv", "equity_unfiltered.csv", "histogram.csv"}) {
    REQUIRE(fs::exists(dir / name));
  }
  const std::string filtered = slurp(dir / "equity_filtered.csv");
  const std::string unfiltered = slurp(dir / "equity_unfiltered.csv");
  CHECK(count_lines(filtered) == count_lines(unfiltered));
  CHECK(count_lines(filtered) == 202);  // comment + header + 200 test trades

  REQUIRE(run_cli("backtest --data " + (dir / "trades.csv").string() +
                  " --split randomized --seed 9 --out-dir " + dir.string()) == 0);
}

TEST_CASE("ratecheck reports zero violations on a small instance") {
  const fs::path dir = fresh_dir("ratecheck");
  const std::string cmd = "ratecheck --n 6 --seeds 20 --kmax 200 --seed 11 --out-dir " +
                          dir.string();
  REQUIRE(run_cli(cmd) == 0);
  const std::string csv = slurp(dir / "rate_0.csv");
  CHECK(count_lines(csv) == 202);  // comment + header + 200 rows
  CHECK(csv.find("mean_gap") != std::string::npos);
  const std::string again = slurp(dir / "rate_0.csv");
  REQUIRE(run_cli(cmd) == 0);
  CHECK(slurp(dir / "rate_0.csv") == again);
}

TEST_CASE("config file values apply and flags override them") {
  const fs::path dir = fresh_dir("config");
  {
    std::ofstream cfg(dir / "cfg.json");
    cfg << R"({"seed": 21, "out_dir": ")" << dir.string() << R"("})";
  }
  REQUIRE(run_cli("gen --preset blocks --config " + (dir / "cfg.json").string()) == 0);
  const fs::path flag_dir = fresh_dir("config_flag");
  REQUIRE(run_cli("gen --preset blocks --config " + (dir / "cfg.json").string() +
                  " --out-dir " + flag_dir.string()) == 0);
  REQUIRE(fs::exists(flag_dir / "data.csv"));

  const fs::path direct = fresh_dir("config_direct");
  REQUIRE(run_cli("gen --preset blocks --seed 21 --out-dir " + direct.string()) == 0);
  CHECK(slurp(dir / "data.csv") == slurp(direct / "data.csv"));
}

int main(int argc, char** argv) {
  if (const char* env = std::getenv("BLOCKSELECT_CLI")) g_cli = env;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg.rfind("--cli=", 0) == 0) g_cli = arg.substr(6);
  }
  if (g_cli.empty()) {
    std::fprintf(stderr, "set BLOCKSELECT_CLI or pass --cli=<path>\n");
    return 1;
  }
  doctest::Context context;
  context.applyCommandLine(1, argv);  // strip our custom flag
  return context.run();
}
