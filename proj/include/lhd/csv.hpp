#pragma once

#include <charconv>
#include <string>
#include <string_view>
#include <vector>

#include "lhd/design.hpp"
#include "lhd/error.hpp"

namespace lhd {

/// Parses headerless comma-separated integers, one row per line. Blank lines
/// are skipped; a trailing CR is tolerated.
inline IntMatrix parse_int_csv(std::string_view text) {
  std::vector<level_t> cells;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    std::size_t count = 0;
    for (;;) {
      const auto comma = line.find(',');
      std::string_view field = line.substr(0, comma);
      while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
      while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.remove_suffix(1);
      level_t v = 0;
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size()) {
        fail(ErrorCode::io, "line " + std::to_string(line_no) + ": '" + std::string(field) +
                                "' is not an integer");
      }
      cells.push_back(v);
      ++count;
      if (comma == std::string_view::npos) break;
      line = line.substr(comma + 1);
    }
    if (rows == 0) cols = count;
    if (count != cols) {
      fail(ErrorCode::io, "line " + std::to_string(line_no) + ": expected " + std::to_string(cols) +
                              " fields, found " + std::to_string(count));
    }
    ++rows;
  }
  IntMatrix out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out(r, c) = cells[r * cols + c];
  }
  return out;
}

inline std::string to_csv(const IntMatrix& m) {
  std::string out;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c) out += ',';
      out += std::to_string(m(r, c));
    }
    out += '\n';
  }
  return out;
}

}  // namespace lhd
