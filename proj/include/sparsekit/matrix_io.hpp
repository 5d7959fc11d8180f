#pragma once

#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "sparsekit/linalg.hpp"

namespace sparsekit {

// Text format shared by all tools: a header line "rows cols" followed by
// `rows` lines of space-separated decimal entries.

inline Matrix read_matrix(std::istream& in, const std::string& name = "<stream>") {
  Index rows = 0, cols = 0;
  if (!(in >> rows >> cols))
    throw Error("read_matrix: missing 'rows cols' header in " + name);
  if (rows < 0 || cols < 0)
    throw InvalidDims("read_matrix: negative dimensions in " + name);
  Matrix M(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      double v;
      if (!(in >> v))
        throw Error("read_matrix: truncated data in " + name);
      if (!std::isfinite(v))
        throw Error("read_matrix: non-finite entry in " + name);
      M(i, j) = v;
    }
  }
  return M;
}

inline Matrix load_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("load_matrix: cannot open " + path);
  return read_matrix(in, path);
}

inline void write_matrix(std::ostream& out, const Matrix& M) {
  out << M.rows() << " " << M.cols() << "\n";
  out.precision(std::numeric_limits<double>::max_digits10);
  for (Index i = 0; i < M.rows(); ++i) {
    for (Index j = 0; j < M.cols(); ++j) {
      if (j) out << " ";
      out << M(i, j);
    }
    out << "\n";
  }
}

inline void save_matrix(const std::string& path, const Matrix& M) {
  std::ofstream out(path);
  if (!out) throw Error("save_matrix: cannot open " + path);
  write_matrix(out, M);
}

// Vectors travel as single-column (or single-row) matrices.
inline Vector load_vector(const std::string& path) {
  Matrix M = load_matrix(path);
  if (M.cols() == 1) return M.col(0);
  if (M.rows() == 1) return M.row(0).transpose();
  throw InvalidDims("load_vector: " + path + " is not a vector");
}

inline void save_vector(const std::string& path, const Vector& v) {
  Matrix M(v.size(), 1);
  M.col(0) = v;
  save_matrix(path, M);
}

}  // namespace sparsekit
