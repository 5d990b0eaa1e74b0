#pragma once

// CSV reading/writing. Comma delimiter, period decimal separator, one header
// row on output; readers tolerate a header and blank lines.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mechharmonic/planar.hpp"

namespace mechharmonic {

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header)
      : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot open for writing: " + path);
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i) out_ << ',';
      out_ << header[i];
    }
    out_ << '\n';
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    // trim surrounding whitespace
    const auto first = cell.find_first_not_of(" \t\r");
    const auto last = cell.find_last_not_of(" \t\r");
    cells.push_back(first == std::string::npos ? std::string()
                                               : cell.substr(first, last - first + 1));
  }
  return cells;
}

inline bool parse_double(const std::string& text, double& out) {
  try {
    std::size_t used = 0;
    out = std::stod(text, &used);
    return used == text.size();
  } catch (...) {
    return false;
  }
}

}  // namespace detail

/// One value per row; an optional non-numeric header row is skipped.
inline std::vector<double> read_signal_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open signal file: " + path);
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto cells = detail::split_csv_line(line);
    if (cells.empty() || (cells.size() == 1 && cells[0].empty())) continue;
    double v = 0.0;
    if (!detail::parse_double(cells[0], v)) {
      if (line_no == 1) continue;  // header
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected a numeric value");
    }
    values.push_back(v);
  }
  return values;
}

/// Two columns x,y per row; an optional non-numeric header row is skipped.
inline std::vector<Point2> read_path_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open path file: " + path);
  std::vector<Point2> points;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto cells = detail::split_csv_line(line);
    if (cells.empty() || (cells.size() == 1 && cells[0].empty())) continue;
    Point2 pt;
    if (cells.size() < 2 || !detail::parse_double(cells[0], pt.x) ||
        !detail::parse_double(cells[1], pt.y)) {
      if (line_no == 1) continue;  // header
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected two numeric columns");
    }
    points.push_back(pt);
  }
  return points;
}

}  // namespace mechharmonic
