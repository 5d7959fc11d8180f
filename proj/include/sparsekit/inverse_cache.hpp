#pragma once

#include <utility>

#include "sparsekit/linalg.hpp"

namespace sparsekit {

// Threshold below which a new column counts as already spanned.
inline constexpr double kDegenerateColumnTol = 1e-10;

// Number of rank-one updates between full recomputations of the inverse,
// bounding floating-point drift of the update recurrences.
inline constexpr int kRefreshInterval = 64;

// Tracks B = (A^T A)^{-1} for a matrix A under column appends and removals,
// using rank-one update formulas instead of refactorizing.
class InverseCache {
 public:
  InverseCache() : A_(0, 0), B_(0, 0) {}

  explicit InverseCache(const Matrix& A) : A_(A), B_(gram_inverse_of(A)) {}

  Index order() const { return B_.rows(); }
  Index ambient_rows() const { return A_.rows(); }
  const Matrix& gram_inverse() const { return B_; }
  const Matrix& tracked() const { return A_; }

  struct AddResult {
    Vector e_hat;  // A^+ a, the coefficients of a on the previous columns
    double r;      // squared norm of the residual of a against col(A)
  };

  // Appends column a. Throws DegenerateColumn when a is numerically in
  // span(A), i.e. the residual energy r falls below threshold.
  AddResult add_column(const Vector& a) {
    if (order() > 0 && a.size() != A_.rows())
      throw InvalidDims("InverseCache::add_column: length mismatch");
    const Index k = order();
    AddResult out;
    if (k == 0) {
      out.e_hat = Vector(0);
      out.r = a.squaredNorm();
      if (out.r < kDegenerateColumnTol)
        throw DegenerateColumn("InverseCache::add_column: zero column");
      A_ = a;
      B_ = Matrix::Constant(1, 1, 1.0 / out.r);
      return out;
    }
    Vector Ata = A_.transpose() * a;
    out.e_hat = B_ * Ata;
    Vector resid = a - A_ * out.e_hat;
    out.r = resid.squaredNorm();
    if (out.r < kDegenerateColumnTol)
      throw DegenerateColumn("InverseCache::add_column: column in span");

    Matrix Bn(k + 1, k + 1);
    Bn.topLeftCorner(k, k) = B_ + out.e_hat * out.e_hat.transpose() / out.r;
    Bn.block(0, k, k, 1) = -out.e_hat / out.r;
    Bn.block(k, 0, 1, k) = (-out.e_hat / out.r).transpose();
    Bn(k, k) = 1.0 / out.r;
    B_ = std::move(Bn);

    A_.conservativeResize(Eigen::NoChange, k + 1);
    A_.col(k) = a;
    symmetrize();
    maybe_refresh();
    return out;
  }

  struct RemoveResult {
    Vector e_hat;
    double r;
  };

  // Deletes the column at position i of the tracked matrix.
  RemoveResult remove_column(Index i) {
    const Index k = order();
    if (i < 0 || i >= k)
      throw InvalidIndex("InverseCache::remove_column: bad position");
    RemoveResult out;
    out.r = 1.0 / B_(i, i);
    out.e_hat = Vector(k - 1);
    for (Index t = 0, w = 0; t < k; ++t)
      if (t != i) out.e_hat(w++) = -B_(t, i);

    Matrix Bn(k - 1, k - 1);
    for (Index r0 = 0, w0 = 0; r0 < k; ++r0) {
      if (r0 == i) continue;
      for (Index c0 = 0, w1 = 0; c0 < k; ++c0) {
        if (c0 == i) continue;
        Bn(w0, w1++) = B_(r0, c0);
      }
      ++w0;
    }
    Bn -= out.r * out.e_hat * out.e_hat.transpose();
    B_ = std::move(Bn);

    Matrix An(A_.rows(), k - 1);
    for (Index c0 = 0, w = 0; c0 < k; ++c0)
      if (c0 != i) An.col(w++) = A_.col(c0);
    A_ = std::move(An);
    symmetrize();
    maybe_refresh();
    return out;
  }

  // Rebuilds B from the tracked matrix.
  void refresh() {
    B_ = gram_inverse_of(A_);
    updates_ = 0;
  }

 private:
  static Matrix gram_inverse_of(const Matrix& A) {
    if (A.cols() == 0) return Matrix(0, 0);
    auto svd = detail::svd_thin(A);
    detail::require_full_column_rank(svd, A.cols(), "InverseCache");
    Vector inv_sq = svd.singularValues().array().square().inverse();
    return svd.matrixV() * inv_sq.asDiagonal() * svd.matrixV().transpose();
  }

  void symmetrize() { B_ = ((B_ + B_.transpose()) * 0.5).eval(); }

  void maybe_refresh() {
    if (++updates_ >= kRefreshInterval) refresh();
  }

  Matrix A_;
  Matrix B_;
  int updates_ = 0;
};

// Position of the column whose removal raises the residual the least:
// argmin xh(i)^2 / B(i,i). Ties break to the smallest index.
inline Index least_contributing_index(const Vector& xh, const InverseCache& cache) {
  if (xh.size() != cache.order() || xh.size() == 0)
    throw InvalidDims("least_contributing_index: size mismatch");
  const Matrix& B = cache.gram_inverse();
  Index best = 0;
  double best_val = xh(0) * xh(0) / B(0, 0);
  for (Index i = 1; i < xh.size(); ++i) {
    double v = xh(i) * xh(i) / B(i, i);
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }
  return best;
}

}  // namespace sparsekit
