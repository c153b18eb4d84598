#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "triclust/error.hpp"
#include "triclust/kernel.hpp"
#include "triclust/matrix.hpp"

namespace triclust {

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline double parse_cell(std::string_view cell, std::size_t row, std::size_t col) {
  const std::string_view t = trim(cell);
  double value = 0.0;
  const auto* end = t.data() + t.size();
  const auto [ptr, ec] = std::from_chars(t.data(), end, value);
  if (ec != std::errc{} || ptr != end || t.empty())
    throw DataError("non-numeric cell at row " + std::to_string(row) + ", column " +
                    std::to_string(col) + ": '" + std::string(t) + "'");
  if (!std::isfinite(value))
    throw DataError("non-finite value at row " + std::to_string(row) + ", column " +
                    std::to_string(col));
  return value;
}

// Comma-separated numeric rows; blank lines are skipped. Row/column numbers in
// error messages are 1-based and count the header row if present.
inline std::vector<std::vector<double>> read_csv_rows(const std::string& path, bool has_header) {
  std::ifstream in(path);
  if (!in) throw DataError("missing file: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  bool skipped_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (has_header && !skipped_header) {
      skipped_header = true;
      continue;
    }
    std::vector<double> row;
    std::size_t start = 0;
    std::size_t col = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      const std::size_t len = (comma == std::string::npos ? line.size() : comma) - start;
      ++col;
      row.push_back(parse_cell(std::string_view(line).substr(start, len), line_no, col));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw DataError("ragged row " + std::to_string(line_no) + ": expected " +
                      std::to_string(rows.front().size()) + " columns, got " +
                      std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("no data rows in file: " + path);
  return rows;
}

}  // namespace detail

// Loads an n x L feature matrix, one observation per row.
inline Matrix load_matrix(const std::string& path, bool has_header = false) {
  const auto rows = detail::read_csv_rows(path, has_header);
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  return m;
}

// Loads a precomputed kernel/distance matrix. The file must be square and
// symmetric to 1e-9; asymmetry is reported, never silently repaired.
inline KernelMatrix load_kernel_matrix(const std::string& path) {
  const auto rows = detail::read_csv_rows(path, /*has_header=*/false);
  const std::size_t n = rows.size();
  if (rows.front().size() != n)
    throw DataError("non-square kernel matrix: " + std::to_string(n) + " rows x " +
                    std::to_string(rows.front().size()) + " columns");
  constexpr double kTol = 1e-9;
  KernelMatrix k(static_cast<int>(n), KernelKind::kPrecomputed);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      if (std::abs(rows[i][j] - rows[j][i]) > kTol)
        throw DataError("asymmetric at (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                        "): " + std::to_string(rows[i][j]) + " vs " + std::to_string(rows[j][i]));
      k.set(static_cast<int>(i), static_cast<int>(j), rows[i][j]);
    }
  }
  return k;
}

// One integer group label (1/2/3) per line, aligned with the data rows.
inline std::vector<int> load_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("missing file: " + path);
  std::vector<int> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = detail::trim(line);
    if (t.empty()) continue;
    int value = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc{} || ptr != t.data() + t.size())
      throw DataError("non-integer label at line " + std::to_string(line_no) + ": '" +
                      std::string(t) + "'");
    labels.push_back(value);
  }
  if (labels.empty()) throw DataError("no labels in file: " + path);
  return labels;
}

inline void write_matrix_csv(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  out.precision(17);
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = 0; j < m.cols; ++j) {
      if (j) out << ',';
      out << m(i, j);
    }
    out << '\n';
  }
  if (!out.good()) throw DataError("failed writing file: " + path);
}

}  // namespace triclust
