#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "srpelm/error.hpp"
#include "srpelm/keyvalue.hpp"
#include "srpelm/sparse_matrix.hpp"

namespace srpelm {

/// Comma-separated rows, no header, shortest round-trip number formatting.
inline void write_dense_csv(std::ostream& out, const DenseMatrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

inline void write_dense_csv(const std::string& path, const DenseMatrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_dense_csv(out, m);
  if (!out) throw IoError("write failed for '" + path + "'");
}

inline DenseMatrix parse_dense_csv(std::istream& in, const std::string& source) {
  std::vector<double> values;
  std::size_t cols = 0, rows = 0, lineno = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::size_t count = 0;
    std::size_t start = 0;
    for (;;) {
      const auto comma = line.find(',', start);
      const std::string cell = trim(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
      try {
        values.push_back(parse_double(cell, "csv cell"));
      } catch (const ParameterError& e) {
        throw IngestionError(source, lineno, e.what());
      }
      ++count;
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (rows == 0) cols = count;
    if (count != cols) throw IngestionError(source, lineno, "ragged row");
    ++rows;
  }
  DenseMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t k = 0; k < values.size(); ++k)
    m(static_cast<Eigen::Index>(k / cols), static_cast<Eigen::Index>(k % cols)) = values[k];
  return m;
}

inline DenseMatrix read_dense_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return parse_dense_csv(in, path);
}

/// Sparse rows as text: a "rows cols" header, then one line of
/// space-separated column indices per row.
inline void write_sparse_rows(const std::string& path, const SparseBinaryMatrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << m.rows() << ' ' << m.cols() << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    bool first = true;
    for (auto c : m.row(i)) {
      if (!first) out << ' ';
      out << c;
      first = false;
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

inline SparseBinaryMatrix read_sparse_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::size_t rows = 0, cols = 0;
  std::string line;
  if (!std::getline(in, line)) throw IngestionError(path, 1, "missing header");
  std::istringstream head(line);
  if (!(head >> rows >> cols)) throw IngestionError(path, 1, "bad header");
  std::vector<std::vector<SparseBinaryMatrix::index_type>> data(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!std::getline(in, line)) throw IngestionError(path, i + 2, "missing row");
    std::istringstream r(line);
    std::uint64_t c;
    while (r >> c) data[i].push_back(static_cast<SparseBinaryMatrix::index_type>(c));
  }
  return SparseBinaryMatrix(cols, data);
}

inline std::string join_doubles(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += format_double(v[i]);
  }
  return s;
}

inline std::vector<double> split_doubles(const std::string& s, const std::string& context) {
  std::vector<double> out;
  if (trim(s).empty()) return out;
  for (const auto& part : split(s, ',')) out.push_back(parse_double(part, context));
  return out;
}

}  // namespace srpelm
