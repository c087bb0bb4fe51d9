#include "blockselect/csv.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>

namespace blockselect {

namespace {

// Splits raw file content into records honoring quoted fields, which may
// contain commas, doubled quotes and embedded newlines.
std::vector<std::vector<std::string>> parse_records(const std::string& content,
                                                    const std::filesystem::path& path) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(record));
    record.clear();
  };

  for (std::size_t i = 0; i < content.size(); ++i) {
    const char c = content[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < content.size() && content[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field_started && field.empty()) {
          in_quotes = true;
          field_started = true;
        } else {
          field.push_back(c);
        }
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (i + 1 < content.size() && content[i + 1] == '\n') ++i;
        end_record();
        break;
      case '\n':
        end_record();
        break;
      default:
        field.push_back(c);
        field_started = true;
        break;
    }
  }
  if (in_quotes) {
    throw std::runtime_error("csv: unterminated quoted field in " + path.string());
  }
  if (field_started || !field.empty() || !record.empty()) {
    end_record();
  }
  return records;
}

bool needs_quoting(std::string_view s) {
  // '#' starts our comment lines, so a leading '#' must be quoted away
  return s.find_first_of(",\"\r\n") != std::string_view::npos ||
         (!s.empty() && s.front() == '#');
}

std::string escape_field(const std::string& s) {
  if (!needs_quoting(s)) return s;
  std::string out;
  out.reserve(s.size() + 2);
  out.push_back('"');
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("csv: cannot open file " + path.string());
  }
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  // leading '# ...' lines are our own metadata headers
  while (!content.empty() && content.front() == '#') {
    const auto eol = content.find('\n');
    if (eol == std::string::npos) {
      content.clear();
    } else {
      content.erase(0, eol + 1);
    }
  }
  auto records = parse_records(content, path);
  if (records.empty()) {
    throw std::runtime_error("csv: empty file " + path.string());
  }
  CsvTable table;
  table.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size()) {
      throw std::runtime_error("csv: row " + std::to_string(r) + " of " + path.string() +
                               " has " + std::to_string(records[r].size()) +
                               " fields, expected " + std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(records[r]));
  }
  return table;
}

void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows,
               const std::string& comment_line) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("csv: cannot open file for writing: " + path.string());
  }
  if (!comment_line.empty()) {
    out << "# " << comment_line << '\n';
  }
  auto write_row = [&out](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << escape_field(row[i]);
    }
    out << '\n';
  };
  write_row(header);
  for (const auto& row : rows) write_row(row);
  if (!out) {
    throw std::runtime_error("csv: write failed for " + path.string());
  }
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto res = std::from_chars(first, last, out);
  return res.ec == std::errc() && res.ptr == last;
}

}  // namespace blockselect
