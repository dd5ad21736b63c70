#pragma once

#include "jtvsp/common.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>
#include <system_error>
#include <vector>

// Minimal CSV layer: comma-separated, first line is a header, no quoting.
// All numeric IO goes through std::to_chars / std::from_chars so output is
// locale-independent and round-trips exactly.

namespace jtvsp::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline std::string trim(const std::string& s) {
  const char* ws = " \t\r\n";
  const auto begin = s.find_first_not_of(ws);
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(ws);
  return s.substr(begin, end - begin + 1);
}

inline std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      cells.push_back(trim(line.substr(start)));
      break;
    }
    cells.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return cells;
}

inline Table read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open " + path);
  Table table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto cells = split_line(line);
    if (first) {
      table.header = std::move(cells);
      first = false;
    } else {
      if (cells.size() != table.header.size())
        throw input_error(path + ": row " + std::to_string(table.rows.size() + 2) + " has " +
                          std::to_string(cells.size()) + " cells, header has " +
                          std::to_string(table.header.size()));
      table.rows.push_back(std::move(cells));
    }
  }
  if (first) throw input_error(path + ": empty file");
  return table;
}

// Strict numeric parse: the whole cell must be a number.
inline double parse_number(const std::string& cell, const std::string& context) {
  const std::string s = trim(cell);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw input_error(context + ": non-numeric cell '" + cell + "'");
  return value;
}

// Like parse_number, but an empty cell (or literal nan) marks a missing datum.
inline double parse_number_or_missing(const std::string& cell, const std::string& context) {
  const std::string s = trim(cell);
  if (s.empty() || s == "nan" || s == "NaN" || s == "NAN")
    return std::numeric_limits<double>::quiet_NaN();
  return parse_number(cell, context);
}

// Shortest representation that round-trips the exact double.
inline std::string format_number(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  (void)ec;
  return std::string(buf, ptr);
}

inline std::string join(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += cells[i];
  }
  return line;
}

inline void write_file(const std::string& path, const std::vector<std::string>& header,
                       const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path);
  if (!out) throw input_error("cannot write " + path);
  out << join(header) << '\n';
  for (const auto& row : rows) out << join(row) << '\n';
  if (!out) throw input_error("write failed: " + path);
}

}  // namespace jtvsp::csv
