#pragma once

#include <cstdint>

#include "sparsekit/analysis.hpp"
#include "sparsekit/guarantees.hpp"
#include "sparsekit/linalg.hpp"

namespace sparsekit {

struct ExhaustiveResult {
  SupportSet best_support;
  double best_residual_sq = 0.0;
  std::uint64_t evaluated = 0;
  std::uint64_t skipped = 0;  // subsets dropped for singular subsystems
};

// Exact minimizer of the fit residual over every size-k column subset,
// enumerated lexicographically; ties keep the first subset found.
inline ExhaustiveResult exhaustive_sparse(const Matrix& M, const Vector& y,
                                          Index k) {
  if (k < 0 || k > M.cols())
    throw InvalidDims("exhaustive_sparse: k out of range");
  if (binomial(M.cols(), k) > static_cast<double>(kRipBudget))
    throw BudgetExceeded("exhaustive_sparse: enumeration over budget");
  ExhaustiveResult out;
  out.best_residual_sq = std::numeric_limits<double>::infinity();
  for_each_subset(M.cols(), k, [&](const SupportSet& T) {
    ++out.evaluated;
    double resid;
    if (T.empty()) {
      resid = y.squaredNorm();
    } else {
      Matrix A = columns(M, T);
      // Rank-revealing solve keeps degenerate subsets comparable.
      Eigen::CompleteOrthogonalDecomposition<Matrix> cod(A);
      resid = (y - A * cod.solve(y)).squaredNorm();
    }
    if (resid < out.best_residual_sq) {
      out.best_residual_sq = resid;
      out.best_support = T;
    }
  });
  return out;
}

// Exact minimizer of the constrained analysis objective over every size-l
// row subset. Subsets whose constrained system is singular are skipped and
// counted.
inline ExhaustiveResult exhaustive_cosparse(const Matrix& M, const Matrix& Omega,
                                            const Vector& y, Index l) {
  if (l < 0 || l > Omega.rows())
    throw InvalidDims("exhaustive_cosparse: l out of range");
  if (binomial(Omega.rows(), l) > static_cast<double>(kOmegaRipBudget))
    throw BudgetExceeded("exhaustive_cosparse: enumeration over budget");
  ExhaustiveResult out;
  out.best_residual_sq = std::numeric_limits<double>::infinity();
  for_each_subset(Omega.rows(), l, [&](const SupportSet& Lambda) {
    ++out.evaluated;
    double obj;
    try {
      obj = cosparse_objective(M, Omega, y, Lambda);
    } catch (const SingularSystem&) {
      ++out.skipped;
      return;
    }
    if (obj < out.best_residual_sq) {
      out.best_residual_sq = obj;
      out.best_support = Lambda;
    }
  });
  if (out.best_support.empty() && out.evaluated == out.skipped)
    throw SingularSystem("exhaustive_cosparse: every subset was singular");
  return out;
}

}  // namespace sparsekit
