#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "sparsekit/linalg.hpp"

namespace sparsekit {

inline constexpr std::uint64_t kRipBudget = 1000000;       // supports
inline constexpr std::uint64_t kOmegaRipBudget = 100000;   // cosupports

// C(n,k), saturating at +inf on overflow.
inline double binomial(Index n, Index k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double out = 1.0;
  for (Index i = 1; i <= k; ++i) {
    out *= static_cast<double>(n - k + i) / static_cast<double>(i);
    if (out > 1e18) return std::numeric_limits<double>::infinity();
  }
  return out;
}

// Visits all size-k subsets of {0..n-1} in lexicographic order.
template <typename F>
void for_each_subset(Index n, Index k, F&& visit) {
  if (k == 0 || k > n) {
    if (k == 0) {
      SupportSet empty;
      visit(empty);
    }
    return;
  }
  SupportSet idx(static_cast<std::size_t>(k));
  for (Index i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
  while (true) {
    visit(idx);
    Index pos = k - 1;
    while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == n - k + pos) --pos;
    if (pos < 0) break;
    ++idx[static_cast<std::size_t>(pos)];
    for (Index j = pos + 1; j < k; ++j)
      idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
}

struct RipReport {
  Index order = 0;
  double delta = 0.0;
  SupportSet witness_support;
  // Set when every enumerated cosupport had a trivial null space, so the
  // constant is 0 only by vacuity.
  bool vacuous = false;
};

// Brute-force restricted-isometry constant of order k: the worst deviation of
// the per-support Gram spectrum from 1 over all size-k column subsets.
inline RipReport rip_constant(const Matrix& M, Index k) {
  if (k < 1 || k > M.cols())
    throw InvalidDims("rip_constant: order out of range");
  if (binomial(M.cols(), k) > static_cast<double>(kRipBudget))
    throw BudgetExceeded("rip_constant: support enumeration over budget");
  RipReport report;
  report.order = k;
  report.delta = -1.0;
  for_each_subset(M.cols(), k, [&](const SupportSet& T) {
    Matrix A = columns(M, T);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(A.transpose() * A,
                                              Eigen::EigenvaluesOnly);
    const auto& ev = eig.eigenvalues();
    double dev = std::max(std::abs(ev(0) - 1.0), std::abs(ev(ev.size() - 1) - 1.0));
    if (dev > report.delta) {
      report.delta = dev;
      report.witness_support = T;
    }
  });
  return report;
}

// Brute-force analysis-operator variant: worst deviation of ||M v||^2 from
// ||v||^2 over unit v orthogonal to each size-s row subset of Omega.
inline RipReport omega_rip_constant(const Matrix& M, const Matrix& Omega, Index s) {
  if (M.cols() != Omega.cols())
    throw InvalidDims("omega_rip_constant: column mismatch");
  if (s < 0 || s > Omega.rows())
    throw InvalidDims("omega_rip_constant: cosupport size out of range");
  if (binomial(Omega.rows(), s) > static_cast<double>(kOmegaRipBudget))
    throw BudgetExceeded("omega_rip_constant: cosupport enumeration over budget");
  RipReport report;
  report.order = s;
  report.delta = 0.0;
  bool any_nontrivial = false;
  for_each_subset(Omega.rows(), s, [&](const SupportSet& Lambda) {
    Matrix V = kernel_basis(rows(Omega, Lambda));
    if (V.cols() == 0) return;
    any_nontrivial = true;
    Matrix MV = M * V;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(MV.transpose() * MV,
                                              Eigen::EigenvaluesOnly);
    const auto& ev = eig.eigenvalues();
    double dev = std::max(std::abs(ev(0) - 1.0), std::abs(ev(ev.size() - 1) - 1.0));
    if (dev > report.delta || report.witness_support.empty()) {
      report.delta = std::max(report.delta, dev);
      report.witness_support = Lambda;
    }
  });
  report.vacuous = !any_nontrivial;
  return report;
}

inline double c_delta_of(double delta) {
  return (1.0 - delta * delta) * (1.0 - delta);
}

inline double gamma_of(double delta) {
  double c = c_delta_of(delta);
  return c - delta * delta / c;
}

// Worst-case iteration count for the replacement solver to push the residual
// below eps_t, as a function of the isometry constant.
inline double convergence_bound(double delta, double y_norm_sq, double eps_t,
                                Index k) {
  if (eps_t <= 0.0)
    throw InvalidDims("convergence_bound: eps_t must be positive");
  double gamma = gamma_of(delta);
  if (!(gamma > 0.0))
    throw InvalidDelta("convergence_bound: rate constant not positive");
  double c = c_delta_of(delta);
  return static_cast<double>(k) *
         (1.0 + std::log(y_norm_sq / (eps_t * std::exp(c))) / gamma);
}

struct AwgnCheck {
  bool holds = false;
  double lhs = 0.0;
  double rhs = 0.0;
};

// Signal-to-noise condition under which replacement solvers recover the exact
// support with high probability in white Gaussian noise.
inline AwgnCheck awgn_condition(double delta, double sigma, Index k, Index n,
                                double a, double y0_norm_sq) {
  if (delta < 0.0 || delta >= 1.0)
    throw InvalidDelta("awgn_condition: delta out of [0,1)");
  double denom = (1.0 - delta) * (1.0 - delta * delta) - delta;
  if (denom <= 0.0)
    throw InvalidDelta("awgn_condition: condition is vacuous at this delta");
  AwgnCheck out;
  double root = 1.0 + std::sqrt(1.0 - delta);
  out.rhs = root * root * 2.0 * (1.0 + a) * std::log(static_cast<double>(n)) /
            (denom * denom);
  double scale = sigma * sigma * static_cast<double>(k);
  out.lhs = scale > 0.0 ? y0_norm_sq / scale
                        : std::numeric_limits<double>::infinity();
  out.holds = out.lhs >= out.rhs;
  return out;
}

// Probability mass the high-probability statements are allowed to lose.
inline double failure_probability(Index n, double a) {
  return 1.0 / (std::sqrt(M_PI * (1.0 + a) * std::log(static_cast<double>(n))) *
                std::pow(static_cast<double>(n), a));
}

struct OracleEstimate {
  Vector xh;                    // least squares on the given support
  double error_bound_cor1 = 0;  // error bound under exact support recovery
  double error_bound_cor2 = 0;  // worst-case error bound
};

inline double worstcase_coefficient(double delta) {
  double denom = (1.0 - delta) * (1.0 - delta * delta) - delta;
  if (denom <= 0.0)
    throw InvalidDelta("worstcase_coefficient: vacuous at this delta");
  return (1.0 + delta * delta) * (1.0 + std::sqrt(1.0 - delta)) / denom +
         1.0 / (1.0 - delta);
}

// Least-squares fit on a known support plus the two error bounds it obeys
// with probability 1 - failure_probability(n, a). A delta at which the
// worst-case statement is vacuous yields an infinite second bound.
inline OracleEstimate oracle_estimate(const Matrix& M, const SupportSet& L,
                                      const Vector& y, double sigma,
                                      double delta, double a) {
  validate_support(L, M.cols(), "oracle_estimate");
  OracleEstimate out;
  out.xh = least_squares(columns(M, L), y);
  const double k = static_cast<double>(L.size());
  const double n = static_cast<double>(M.cols());
  const double tail = std::sqrt(2.0 * (1.0 + a) * std::log(n));
  out.error_bound_cor1 = tail / (1.0 - delta) * std::sqrt(k) * sigma;
  double denom = (1.0 - delta) * (1.0 - delta * delta) - delta;
  out.error_bound_cor2 =
      denom > 0.0 ? worstcase_coefficient(delta) *
                        std::sqrt(2.0 * k * sigma * sigma * (1.0 + a) *
                                  std::log(n))
                  : std::numeric_limits<double>::infinity();
  return out;
}

struct BoundReport {
  double c_delta = 0;
  double gamma = 0;
  double b_iterations = 0;
  double awgn_lhs = 0;
  double awgn_rhs = 0;
  bool awgn_holds = false;
  double oracle_bound = 0;
  double worstcase_bound = 0;
};

inline BoundReport evaluate_bounds(double delta, Index k, double y_norm_sq,
                                   double eps_t, double sigma, Index n,
                                   double a, double y0_norm_sq) {
  BoundReport rep;
  rep.c_delta = c_delta_of(delta);
  rep.gamma = gamma_of(delta);
  rep.b_iterations = convergence_bound(delta, y_norm_sq, eps_t, k);
  AwgnCheck chk = awgn_condition(delta, sigma, k, n, a, y0_norm_sq);
  rep.awgn_lhs = chk.lhs;
  rep.awgn_rhs = chk.rhs;
  rep.awgn_holds = chk.holds;
  const double tail = std::sqrt(2.0 * (1.0 + a) * std::log(static_cast<double>(n)));
  rep.oracle_bound = tail / (1.0 - delta) * std::sqrt(static_cast<double>(k)) * sigma;
  rep.worstcase_bound =
      worstcase_coefficient(delta) *
      std::sqrt(2.0 * static_cast<double>(k) * sigma * sigma * (1.0 + a) *
                std::log(static_cast<double>(n)));
  return rep;
}

}  // namespace sparsekit
