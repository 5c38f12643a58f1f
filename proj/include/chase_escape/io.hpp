// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <charconv>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace chase {

/// One table cell: empty, integer, real, or a bare identifier. Identifiers
/// must stay free of commas and newlines so the CSV needs no quoting.
using Cell = std::variant<std::monostate, std::int64_t, double, std::string>;

struct OutputTable {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

/// Shortest round-trip decimal form (17 significant digits never needed
/// unless required to reproduce the exact double).
inline std::string format_double(double value) {
  char buffer[32];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc())
    throw std::runtime_error("failed to format a double");
  return std::string(buffer, ptr);
}

inline std::string format_cell(const Cell& cell) {
  if (std::holds_alternative<std::monostate>(cell)) return "";
  if (const auto* i = std::get_if<std::int64_t>(&cell))
    return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&cell)) return format_double(*d);
  return std::get<std::string>(cell);
}

inline void write_csv(std::ostream& out, const OutputTable& table) {
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c > 0) out << ',';
    out << table.columns[c];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) out << ',';
      out << format_cell(row[c]);
    }
    out << '\n';
  }
}

inline nlohmann::json cell_to_json(const Cell& cell) {
  if (std::holds_alternative<std::monostate>(cell)) return nullptr;
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return *i;
  if (const auto* d = std::get_if<double>(&cell)) return *d;
  return std::get<std::string>(cell);
}

/// JSON layout: one top-level object with `rows` (array of column->value
/// objects) and `summary` (free-form object, possibly empty).
inline nlohmann::json table_to_json(const OutputTable& table,
                                    nlohmann::json summary = nlohmann::json::object()) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : table.rows) {
    nlohmann::json object = nlohmann::json::object();
    for (std::size_t c = 0; c < row.size() && c < table.columns.size(); ++c)
      object[table.columns[c]] = cell_to_json(row[c]);
    rows.push_back(std::move(object));
  }
  return nlohmann::json{{"rows", std::move(rows)}, {"summary", std::move(summary)}};
}

/// Raw CSV parse: header plus rows of unconverted fields. Rows may be ragged
/// (the exact-law output ends with a two-field trailer line).
struct ParsedCsv {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

inline ParsedCsv parse_csv(std::istream& in) {
  ParsedCsv parsed;
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument("empty CSV input");
  parsed.columns = split_csv_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    parsed.rows.push_back(split_csv_line(line));
  }
  return parsed;
}

inline double parse_double_field(const std::string& field) {
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw std::invalid_argument("not a numeric CSV field: " + field);
  return value;
}

}  // namespace chase
