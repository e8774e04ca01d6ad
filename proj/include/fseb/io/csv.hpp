#ifndef FSEB_IO_CSV_HPP
#define FSEB_IO_CSV_HPP

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "fseb/error.hpp"

namespace fseb::io {

// Header or column layout does not match what the command expects.
class SchemaError : public Error {
public:
  using Error::Error;
};

// A row is well-formed CSV but its values are invalid (bad number, m = 0, ...).
class DataError : public Error {
public:
  using Error::Error;
};

/// Header plus string cells. Line numbers are 1-based file lines, so the
/// first data row is line 2.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;
  std::string source = "<input>";

  [[nodiscard]] std::optional<std::size_t> column(std::string_view name) const {
    for (std::size_t c = 0; c < header.size(); ++c)
      if (header[c] == name)
        return c;
    return std::nullopt;
  }
};

namespace detail {

inline void strip_cr(std::string& s) {
  if (!s.empty() && s.back() == '\r')
    s.pop_back();
}

// Splits one record; double-quoted fields may contain commas and "" escapes.
inline std::vector<std::string> split_record(const std::string& line, const std::string& where) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell += c;
      }
    } else if (c == '"' && cell.empty()) {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cell));
      cell.clear();
    } else {
      cell += c;
    }
  }
  if (quoted)
    throw SchemaError(where + ": unterminated quoted field");
  out.push_back(std::move(cell));
  return out;
}

inline bool needs_quotes(std::string_view s) {
  return s.find_first_of(",\"\n\r") != std::string_view::npos;
}

} // namespace detail

inline CsvTable read_csv(std::istream& in, const std::string& source = "<input>") {
  CsvTable t;
  t.source = source;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    detail::strip_cr(line);
    if (!have_header) {
      if (lineno == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0)
        line.erase(0, 3);   // UTF-8 byte order mark
      if (line.empty())
        throw SchemaError(source + ":1: missing header row");
      t.header = detail::split_record(line, source + ":" + std::to_string(lineno));
      have_header = true;
      continue;
    }
    if (line.empty())
      continue;
    auto cells = detail::split_record(line, source + ":" + std::to_string(lineno));
    if (cells.size() != t.header.size())
      throw SchemaError(source + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(t.header.size()) + " fields, found " +
                        std::to_string(cells.size()));
    t.rows.push_back(std::move(cells));
    t.lines.push_back(lineno);
  }
  if (!have_header)
    throw SchemaError(source + ": empty file, expected a header row");
  return t;
}

/// Requires the header to be exactly `expected` (extra columns are a schema
/// error too, so a wrong file is never half-read).
inline void require_header(const CsvTable& t, const std::vector<std::string>& expected) {
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i)
      s += (i ? "," : "") + v[i];
    return s;
  };
  if (t.header != expected)
    throw SchemaError(t.source + ":1: expected columns '" + join(expected) + "', found '" +
                      join(t.header) + "'");
}

inline std::string cell_where(const CsvTable& t, std::size_t row, std::size_t col) {
  return t.source + ":" + std::to_string(t.lines.at(row)) + ": column '" + t.header.at(col) + "'";
}

inline std::int64_t parse_int(const CsvTable& t, std::size_t row, std::size_t col) {
  const std::string& s = t.rows.at(row).at(col);
  std::int64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw DataError(cell_where(t, row, col) + ": '" + s + "' is not an integer");
  return v;
}

inline std::uint64_t parse_uint(const CsvTable& t, std::size_t row, std::size_t col) {
  const std::string& s = t.rows.at(row).at(col);
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw DataError(cell_where(t, row, col) + ": '" + s + "' is not a non-negative integer");
  return v;
}

inline double parse_double(const CsvTable& t, std::size_t row, std::size_t col) {
  const std::string& s = t.rows.at(row).at(col);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v))
    throw DataError(cell_where(t, row, col) + ": '" + s + "' is not a finite number");
  return v;
}

/// Fixed six-decimal rendering used in every numeric output column.
inline std::string fmt(double v) {
  if (std::isnan(v))
    return "nan";
  if (std::isinf(v))
    return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  // avoid "-0.000000", which would not survive a parse/emit round trip
  if (std::string_view(buf).find_first_not_of("-0.") == std::string_view::npos)
    return "0.000000";
  return buf;
}

inline std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

/// Short label for an alpha in column names, e.g. 0.05 -> "0.05".
inline std::string alpha_label(double a) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", a);
  return buf;
}

inline void write_record(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i)
      out << ',';
    if (detail::needs_quotes(cells[i])) {
      out << '"';
      for (char c : cells[i])
        out << (c == '"' ? "\"\"" : std::string(1, c));
      out << '"';
    } else {
      out << cells[i];
    }
  }
  out << '\n';
}

inline void write_csv(std::ostream& out, const CsvTable& t) {
  write_record(out, t.header);
  for (const auto& r : t.rows)
    write_record(out, r);
}

} // namespace fseb::io

#endif
