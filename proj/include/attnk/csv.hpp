#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace attnk::csv {

inline std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Reads a CSV file, checks the exact header, and returns data rows split
/// into fields together with their 1-based line numbers. Malformed rows are
/// reported with their line number.
inline std::vector<std::pair<std::size_t, std::vector<std::string>>> read_rows(const std::string& path,
                                                                               const std::string& expected_header) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty file, expected header '" + expected_header + "'");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected_header)
    throw ParseError(path + ": line 1: expected header '" + expected_header + "', got '" + line + "'");
  const std::size_t ncols = split_line(expected_header).size();
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_line(line);
    if (fields.size() != ncols)
      throw ParseError(path + ": line " + std::to_string(lineno) + ": expected " + std::to_string(ncols) +
                       " fields, got " + std::to_string(fields.size()));
    rows.emplace_back(lineno, std::move(fields));
  }
  return rows;
}

inline double to_double(const std::string& s, const std::string& context) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(context + ": not a number: '" + s + "'");
  }
}

inline long to_long(const std::string& s, const std::string& context) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(context + ": not an integer: '" + s + "'");
  }
}

}  // namespace attnk::csv
