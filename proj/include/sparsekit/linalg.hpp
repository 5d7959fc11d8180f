#pragma once

#include <Eigen/Dense>
#include <vector>

#include "sparsekit/errors.hpp"

namespace sparsekit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
using SupportSet = std::vector<Index>;

inline constexpr char kVersion[] = "0.1.0";

// Relative singular-value threshold used by every rank check / pseudo-inverse.
inline constexpr double kRankTol = 1e-10;

namespace detail {

inline Eigen::JacobiSVD<Matrix> svd_thin(const Matrix& A) {
  return Eigen::JacobiSVD<Matrix>(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
}

inline void require_full_column_rank(const Eigen::JacobiSVD<Matrix>& svd,
                                     Index cols, const char* who) {
  if (cols == 0) return;
  const auto& s = svd.singularValues();
  if (s.size() < cols || s(s.size() - 1) < kRankTol * s(0)) {
    throw RankDeficient(std::string(who) + ": matrix is column-rank deficient");
  }
}

}  // namespace detail

// Least-squares coefficients (A^T A)^{-1} A^T y for a full-column-rank A.
inline Vector least_squares(const Matrix& A, const Vector& y) {
  if (A.rows() != y.size())
    throw InvalidDims("least_squares: row count does not match vector length");
  if (A.cols() == 0) return Vector(0);
  auto svd = detail::svd_thin(A);
  detail::require_full_column_rank(svd, A.cols(), "least_squares");
  return svd.solve(y);
}

// Residual after projecting v onto col(A): v - A (A^T A)^{-1} A^T v.
inline Vector residual_projection(const Matrix& A, const Vector& v) {
  if (A.cols() == 0) return v;
  return v - A * least_squares(A, v);
}

// Moore-Penrose pseudo-inverse with the relative threshold above.
inline Matrix pseudo_inverse(const Matrix& A) {
  if (A.size() == 0) return Matrix(A.cols(), A.rows());
  auto svd = detail::svd_thin(A);
  const auto& s = svd.singularValues();
  const double cutoff = kRankTol * s(0);
  Vector inv = Vector::Zero(s.size());
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > cutoff) inv(i) = 1.0 / s(i);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

// Orthonormal basis of the kernel of A (may be empty). No rank requirement.
inline Matrix kernel_basis(const Matrix& A) {
  if (A.cols() == 0) return Matrix(0, 0);
  if (A.rows() == 0) return Matrix::Identity(A.cols(), A.cols());
  Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double cutoff = s.size() > 0 ? kRankTol * s(0) : 0.0;
  Index rank = 0;
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > cutoff) ++rank;
  return svd.matrixV().rightCols(A.cols() - rank);
}

// Orthonormal basis of the null space of a full-row-rank wide matrix M
// (m x n, m < n). Columns span the orthogonal complement of row(M).
inline Matrix null_space_basis(const Matrix& M) {
  const Index m = M.rows(), n = M.cols();
  if (m >= n)
    throw InvalidDims("null_space_basis: requires strictly wide matrix");
  Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  if (s.size() < m || s(m - 1) < kRankTol * s(0))
    throw RankDeficient("null_space_basis: matrix is row-rank deficient");
  return svd.matrixV().rightCols(n - m);
}

// Gathers the columns of M indexed by T, in T's order.
inline Matrix columns(const Matrix& M, const SupportSet& T) {
  Matrix A(M.rows(), static_cast<Index>(T.size()));
  for (Index j = 0; j < static_cast<Index>(T.size()); ++j) A.col(j) = M.col(T[j]);
  return A;
}

// Gathers the rows of M indexed by T, in T's order.
inline Matrix rows(const Matrix& M, const SupportSet& T) {
  Matrix A(static_cast<Index>(T.size()), M.cols());
  for (Index j = 0; j < static_cast<Index>(T.size()); ++j) A.row(j) = M.row(T[j]);
  return A;
}

inline Vector gather(const Vector& v, const SupportSet& T) {
  Vector out(static_cast<Index>(T.size()));
  for (Index j = 0; j < static_cast<Index>(T.size()); ++j) out(j) = v(T[j]);
  return out;
}

inline void validate_support(const SupportSet& T, Index bound, const char* who) {
  std::vector<char> seen(static_cast<std::size_t>(bound), 0);
  for (Index idx : T) {
    if (idx < 0 || idx >= bound)
      throw InvalidIndex(std::string(who) + ": index out of range");
    if (seen[static_cast<std::size_t>(idx)])
      throw InvalidIndex(std::string(who) + ": duplicate index");
    seen[static_cast<std::size_t>(idx)] = 1;
  }
}

}  // namespace sparsekit
