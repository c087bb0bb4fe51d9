#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace blockselect {

/// Raw CSV table: header row plus string cells, RFC 4180 quoting.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::filesystem::path& path);

/// Escapes and quotes per RFC 4180; '\n' line endings.
void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows,
               const std::string& comment_line = "");

/// Shortest representation that round-trips bit-exactly (std::to_chars).
std::string format_double(double v);

/// Strict full-string parse; returns false on any trailing garbage.
bool parse_double(std::string_view s, double& out);

}  // namespace blockselect
