#include "blockselect/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

#include "blockselect/csv.hpp"
#include "blockselect/rng.hpp"

namespace blockselect {

FeatureMatrix::FeatureMatrix(std::vector<std::string> column_names,
                             std::vector<double> values)
    : values_(std::move(values)), column_names_(std::move(column_names)) {
  n_features_ = column_names_.size();
  if (n_features_ == 0) {
    if (!values_.empty()) {
      throw std::invalid_argument("FeatureMatrix: values without columns");
    }
    n_samples_ = 0;
  } else {
    if (values_.size() % n_features_ != 0) {
      throw std::invalid_argument("FeatureMatrix: values size not a multiple of column count");
    }
    n_samples_ = values_.size() / n_features_;
  }
  std::unordered_set<std::string> seen;
  for (const auto& name : column_names_) {
    if (!seen.insert(name).second) {
      throw std::invalid_argument("FeatureMatrix: duplicate column name '" + name + "'");
    }
  }
  for (double v : values_) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("FeatureMatrix: non-finite value");
    }
  }
}

std::size_t FeatureMatrix::column_index(const std::string& name) const {
  auto it = std::find(column_names_.begin(), column_names_.end(), name);
  if (it == column_names_.end()) {
    throw std::runtime_error("FeatureMatrix: no column named '" + name + "'");
  }
  return static_cast<std::size_t>(it - column_names_.begin());
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> rows) const {
  std::vector<double> values;
  values.reserve(rows.size() * n_features_);
  for (std::size_t r : rows) {
    auto rv = row(r);
    values.insert(values.end(), rv.begin(), rv.end());
  }
  return FeatureMatrix(column_names_, std::move(values));
}

std::size_t BlockSpec::n_block_features() const {
  std::size_t total = 0;
  for (const auto& b : blocks) total += b.members.size();
  return total;
}

std::size_t BlockSpec::min_block_len() const {
  std::size_t m = 0;
  for (const auto& b : blocks) {
    m = (m == 0) ? b.members.size() : std::min(m, b.members.size());
  }
  return m;
}

void BlockSpec::validate(std::size_t n_features_total) const {
  std::vector<std::uint8_t> seen(n_features_total, 0);
  auto mark = [&](std::size_t idx, const std::string& where) {
    if (idx >= n_features_total) {
      throw std::invalid_argument("BlockSpec: index " + std::to_string(idx) +
                                  " out of range in " + where);
    }
    if (seen[idx]) {
      throw std::invalid_argument("BlockSpec: index " + std::to_string(idx) +
                                  " appears twice (" + where + ")");
    }
    seen[idx] = 1;
  };
  for (const auto& b : blocks) {
    if (b.members.empty()) {
      throw std::invalid_argument("BlockSpec: empty block '" + b.name + "'");
    }
    for (std::size_t idx : b.members) mark(idx, "block '" + b.name + "'");
  }
  for (std::size_t idx : singles) mark(idx, "singles");
  for (std::size_t i = 0; i < n_features_total; ++i) {
    if (!seen[i]) {
      throw std::invalid_argument("BlockSpec: column index " + std::to_string(i) +
                                  " not covered by any block or single");
    }
  }
}

std::size_t SelectionMask::popcount() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), 1));
}

std::size_t SelectionMaskHash::operator()(const SelectionMask& m) const {
  std::uint64_t h = 1469598103934665603ull;
  for (std::uint8_t b : m.bits) {
    h ^= b;
    h *= 1099511628211ull;
  }
  return static_cast<std::size_t>(h);
}

std::string to_string(SplitMode mode) {
  return mode == SplitMode::randomized ? "randomized" : "temporal";
}

SplitMode split_mode_from_string(const std::string& s) {
  if (s == "randomized") return SplitMode::randomized;
  if (s == "temporal") return SplitMode::temporal;
  throw std::invalid_argument("unknown split mode '" + s + "' (use randomized|temporal)");
}

SplitResult split_rows(std::size_t n_samples, const SplitSpec& spec) {
  if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0)) {
    throw std::invalid_argument("split: test_fraction must be in (0,1)");
  }
  const auto n_test = static_cast<std::size_t>(
      std::ceil(spec.test_fraction * static_cast<double>(n_samples)));
  if (n_test == 0 || n_test >= n_samples) {
    throw std::invalid_argument("split: empty train or test part (n=" +
                                std::to_string(n_samples) + ", test_fraction=" +
                                std::to_string(spec.test_fraction) + ")");
  }
  SplitResult result;
  if (spec.mode == SplitMode::temporal) {
    const std::size_t n_train = n_samples - n_test;
    result.train_rows.resize(n_train);
    result.test_rows.resize(n_test);
    std::iota(result.train_rows.begin(), result.train_rows.end(), std::size_t{0});
    std::iota(result.test_rows.begin(), result.test_rows.end(), n_train);
  } else {
    std::vector<std::size_t> perm(n_samples);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng(spec.seed);
    rng.shuffle(perm);
    result.test_rows.assign(perm.begin(), perm.begin() + n_test);
    result.train_rows.assign(perm.begin() + n_test, perm.end());
    std::sort(result.test_rows.begin(), result.test_rows.end());
    std::sort(result.train_rows.begin(), result.train_rows.end());
  }
  return result;
}

LabelVector select_labels(const LabelVector& y, std::span<const std::size_t> rows) {
  LabelVector out;
  out.labels.reserve(rows.size());
  for (std::size_t r : rows) out.labels.push_back(y.labels[r]);
  return out;
}

PnlSeries select_pnl(const PnlSeries& pnl, std::span<const std::size_t> rows) {
  PnlSeries out;
  out.pnl.reserve(rows.size());
  for (std::size_t r : rows) out.pnl.push_back(pnl.pnl[r]);
  return out;
}

Dataset load_csv(const std::filesystem::path& path, const LoadOptions& opts) {
  if (!std::filesystem::exists(path)) {
    throw std::runtime_error("load_csv: file does not exist: " + path.string());
  }
  CsvTable table = read_csv(path);

  std::unordered_map<std::string, std::size_t> col_index;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (!col_index.emplace(table.header[i], i).second) {
      throw std::runtime_error("load_csv: duplicate column name '" + table.header[i] +
                               "' in " + path.string());
    }
  }

  std::optional<std::size_t> label_idx;
  if (!opts.label_column.empty()) {
    auto it = col_index.find(opts.label_column);
    if (it == col_index.end()) {
      throw std::runtime_error("load_csv: missing label column '" + opts.label_column +
                               "' in " + path.string());
    }
    label_idx = it->second;
  }
  std::optional<std::size_t> pnl_idx;
  if (opts.pnl_column) {
    auto it = col_index.find(*opts.pnl_column);
    if (it == col_index.end()) {
      throw std::runtime_error("load_csv: missing pnl column '" + *opts.pnl_column +
                               "' in " + path.string());
    }
    pnl_idx = it->second;
  }
  if (!label_idx && !pnl_idx) {
    throw std::runtime_error("load_csv: need a label column or a pnl column to derive labels");
  }

  std::vector<std::string> feature_names;
  std::vector<std::size_t> feature_cols;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if ((label_idx && i == *label_idx) || (pnl_idx && i == *pnl_idx)) continue;
    feature_names.push_back(table.header[i]);
    feature_cols.push_back(i);
  }
  if (feature_cols.empty()) {
    throw std::runtime_error("load_csv: no feature columns left in " + path.string());
  }

  auto parse_cell = [&](std::size_t row, std::size_t col) {
    double v = 0.0;
    const std::string& cell = table.rows[row][col];
    if (!parse_double(cell, v) || !std::isfinite(v)) {
      throw std::runtime_error("load_csv: non-numeric cell at row " + std::to_string(row + 1) +
                               ", column '" + table.header[col] + "' in " + path.string() +
                               " (value '" + cell + "')");
    }
    return v;
  };

  const std::size_t n = table.rows.size();
  std::vector<double> values;
  values.reserve(n * feature_cols.size());
  Dataset ds;
  if (pnl_idx) ds.pnl = PnlSeries{};
  ds.y.labels.reserve(n);

  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c : feature_cols) values.push_back(parse_cell(r, c));
    double pnl_value = 0.0;
    if (pnl_idx) {
      pnl_value = parse_cell(r, *pnl_idx);
      ds.pnl->pnl.push_back(pnl_value);
    }
    if (label_idx) {
      const double lv = parse_cell(r, *label_idx);
      if (lv != 0.0 && lv != 1.0) {
        throw std::runtime_error("load_csv: label at row " + std::to_string(r + 1) +
                                 ", column '" + table.header[*label_idx] +
                                 "' is not 0 or 1 in " + path.string());
      }
      ds.y.labels.push_back(lv == 1.0 ? 1 : 0);
    } else {
      ds.y.labels.push_back(pnl_value > opts.pnl_label_threshold ? 1 : 0);
    }
  }
  ds.X = FeatureMatrix(std::move(feature_names), std::move(values));
  return ds;
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& ds,
                       const std::string& label_column, const std::string& pnl_column) {
  std::vector<std::string> header = ds.X.column_names();
  if (ds.pnl) header.push_back(pnl_column);
  header.push_back(label_column);

  std::vector<std::vector<std::string>> rows;
  rows.reserve(ds.X.n_samples());
  for (std::size_t r = 0; r < ds.X.n_samples(); ++r) {
    std::vector<std::string> row;
    row.reserve(header.size());
    for (double v : ds.X.row(r)) row.push_back(format_double(v));
    if (ds.pnl) row.push_back(format_double(ds.pnl->pnl[r]));
    row.push_back(std::to_string(ds.y.labels[r]));
    rows.push_back(std::move(row));
  }
  write_csv(path, header, rows);
}

BlockSpec infer_blocks(const std::vector<std::string>& column_names) {
  BlockSpec spec;
  struct Member {
    long lag;
    std::size_t col;
  };
  std::vector<std::string> block_order;
  std::unordered_map<std::string, std::vector<Member>> by_base;

  auto parse_suffix = [](const std::string& name, std::string& base, long& lag) {
    const auto pos = name.rfind("__");
    if (pos == std::string::npos || pos == 0 || pos + 2 >= name.size()) return false;
    const std::string tail = name.substr(pos + 2);
    for (char c : tail) {
      if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    }
    base = name.substr(0, pos);
    lag = std::stol(tail);
    return true;
  };

  for (std::size_t i = 0; i < column_names.size(); ++i) {
    std::string base;
    long lag = 0;
    if (parse_suffix(column_names[i], base, lag)) {
      auto& members = by_base[base];
      for (const auto& m : members) {
        if (m.lag == lag) {
          throw std::runtime_error("infer_blocks: duplicate (base, lag) pair for '" +
                                   column_names[i] + "'");
        }
      }
      if (members.empty()) block_order.push_back(base);
      members.push_back({lag, i});
    } else {
      spec.singles.push_back(i);
    }
  }
  for (const auto& base : block_order) {
    auto members = by_base[base];
    std::sort(members.begin(), members.end(),
              [](const Member& a, const Member& b) { return a.lag < b.lag; });
    Block block;
    block.name = base;
    for (const auto& m : members) block.members.push_back(m.col);
    spec.blocks.push_back(std::move(block));
  }
  spec.validate(column_names.size());
  return spec;
}

BlockSpec load_block_map(const std::filesystem::path& path,
                         const std::vector<std::string>& column_names) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("load_block_map: cannot open " + path.string());
  }
  nlohmann::ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw std::runtime_error("load_block_map: invalid JSON in " + path.string() + ": " + e.what());
  }

  std::unordered_map<std::string, std::size_t> col_index;
  for (std::size_t i = 0; i < column_names.size(); ++i) col_index.emplace(column_names[i], i);
  auto resolve = [&](const std::string& name) {
    auto it = col_index.find(name);
    if (it == col_index.end()) {
      throw std::runtime_error("load_block_map: unknown column '" + name + "' in " +
                               path.string());
    }
    return it->second;
  };

  BlockSpec spec;
  if (j.contains("blocks")) {
    for (const auto& [name, cols] : j.at("blocks").items()) {
      Block block;
      block.name = name;
      for (const auto& col : cols) block.members.push_back(resolve(col.get<std::string>()));
      spec.blocks.push_back(std::move(block));
    }
  }
  if (j.contains("singles")) {
    for (const auto& col : j.at("singles")) spec.singles.push_back(resolve(col.get<std::string>()));
  }
  spec.validate(column_names.size());
  return spec;
}

std::string block_map_to_json(const BlockSpec& spec,
                              const std::vector<std::string>& column_names) {
  nlohmann::ordered_json blocks = nlohmann::ordered_json::object();
  for (const auto& b : spec.blocks) {
    nlohmann::ordered_json cols = nlohmann::ordered_json::array();
    for (std::size_t idx : b.members) cols.push_back(column_names.at(idx));
    blocks[b.name] = std::move(cols);
  }
  nlohmann::ordered_json singles = nlohmann::ordered_json::array();
  for (std::size_t idx : spec.singles) singles.push_back(column_names.at(idx));
  nlohmann::ordered_json j;
  j["blocks"] = std::move(blocks);
  j["singles"] = std::move(singles);
  return j.dump(2) + "\n";
}

SelectionMask counts_to_mask(const BlockCountVector& counts,
                             const ImportanceVector& importance,
                             const BlockSpec& spec) {
  if (counts.counts.size() != spec.blocks.size()) {
    throw std::invalid_argument("counts_to_mask: counts length does not match block count");
  }
  if (importance.size() != spec.n_features()) {
    throw std::invalid_argument("counts_to_mask: importance length does not match feature count");
  }
  SelectionMask mask = SelectionMask::zeros(spec.n_features());
  for (std::size_t b = 0; b < spec.blocks.size(); ++b) {
    const auto& members = spec.blocks[b].members;
    const std::size_t k = counts.counts[b];
    if (k > members.size()) {
      throw std::invalid_argument("counts_to_mask: count " + std::to_string(k) +
                                  " exceeds block length " + std::to_string(members.size()));
    }
    std::vector<std::size_t> ranked = members;
    std::stable_sort(ranked.begin(), ranked.end(), [&](std::size_t a, std::size_t c) {
      if (importance[a] != importance[c]) return importance[a] > importance[c];
      return a < c;
    });
    for (std::size_t i = 0; i < k; ++i) mask.set(ranked[i], true);
  }
  if (counts.singles_included) {
    for (std::size_t idx : spec.singles) mask.set(idx, true);
  }
  return mask;
}

std::string mask_to_json(const SelectionMask& mask,
                         const std::vector<std::string>& column_names,
                         std::uint64_t seed) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["seed"] = seed;
  j["column_names"] = column_names;
  nlohmann::ordered_json bits = nlohmann::ordered_json::array();
  for (std::uint8_t b : mask.bits) bits.push_back(static_cast<int>(b));
  j["bits"] = std::move(bits);
  nlohmann::ordered_json selected = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask.test(i)) selected.push_back(column_names.at(i));
  }
  j["selected_columns"] = std::move(selected);
  return j.dump(2) + "\n";
}

SelectionMask mask_from_json(const std::string& json_text) {
  auto j = nlohmann::json::parse(json_text);
  SelectionMask mask;
  for (const auto& b : j.at("bits")) {
    const int v = b.get<int>();
    if (v != 0 && v != 1) {
      throw std::runtime_error("mask_from_json: bits must be 0 or 1");
    }
    mask.bits.push_back(static_cast<std::uint8_t>(v));
  }
  return mask;
}

}  // namespace blockselect
