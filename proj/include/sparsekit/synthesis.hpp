#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "sparsekit/guarantees.hpp"
#include "sparsekit/inverse_cache.hpp"
#include "sparsekit/linalg.hpp"

namespace sparsekit {

// Atoms whose residual energy falls below this are numerically inside the
// current span and are ineligible for selection.
inline constexpr double kRhoEligible = 1e-8;

// Direct-projection variant of the eligibility threshold used by the naive
// reference solver.
inline constexpr double kRhoEligibleDirect = 1e-10;

// Correlations below this cannot drive a selection.
inline constexpr double kCorrelationFloor = 1e-12;

// Residual energies below kResidualFloor * ||y||^2 count as exhausted; no
// selection below machine noise is meaningful.
inline constexpr double kResidualFloor = 1e-12;

struct StopRule {
  enum class Kind { Cardinality, Residual };
  Kind kind = Kind::Cardinality;
  Index k = 0;
  double eps_t = 0.0;

  static StopRule cardinality(Index k) {
    StopRule s;
    s.kind = Kind::Cardinality;
    s.k = k;
    return s;
  }
  static StopRule residual(double eps_t) {
    StopRule s;
    s.kind = Kind::Residual;
    s.eps_t = eps_t;
    return s;
  }
};

struct SynthesisProblem {
  Matrix M;              // column-normalized dictionary
  Vector y;
  StopRule stop;
  Vector column_scales;  // original column norms, used to undo normalization

  // Validates dimensions and normalizes dictionary columns. Estimates are
  // rescaled back to the caller's column scales on output.
  static SynthesisProblem create(Matrix M, Vector y, StopRule stop) {
    if (M.rows() == 0 || M.cols() == 0)
      throw InvalidDims("SynthesisProblem: empty dictionary");
    if (y.size() != M.rows())
      throw InvalidDims("SynthesisProblem: measurement length mismatch");
    if (!M.allFinite() || !y.allFinite())
      throw InvalidDims("SynthesisProblem: non-finite input");
    if (stop.kind == StopRule::Kind::Cardinality) {
      if (stop.k < 0 || stop.k > M.rows())
        throw InvalidDims("SynthesisProblem: cardinality must satisfy 0 <= k <= m");
    } else if (!(stop.eps_t >= 0.0)) {
      throw InvalidDims("SynthesisProblem: residual target must be >= 0");
    }
    SynthesisProblem p;
    p.column_scales = M.colwise().norm();
    for (Index j = 0; j < M.cols(); ++j) {
      if (p.column_scales(j) < kRankTol)
        throw InvalidDims("SynthesisProblem: zero dictionary column");
      M.col(j) /= p.column_scales(j);
    }
    p.M = std::move(M);
    p.y = std::move(y);
    p.stop = stop;
    return p;
  }
};

struct IterationRecord {
  Index support_size;
  double eps0;
};

struct RecoveryResult {
  Vector xh_full;            // length-n estimate, zeros off the support
  SupportSet support;
  double residual_sq = 0.0;
  Index iterations = 0;
  Index warmup_iterations = 0;  // greedy-growth passes before replacement
  std::vector<IterationRecord> trace;
};

// Running state of the fast greedy solvers: the support, the tracked Gram
// inverse, and the selection vectors
//   c(i)   = <residual-projected atom i, y>
//   rho(i) = squared norm of the residual-projected atom i,
// kept consistent under atom addition and removal by rank-one updates.
struct SynthesisState {
  SupportSet support;
  InverseCache cache;
  Vector c;
  Vector rho;
  Vector c0;        // M^T y
  Vector xh;        // coefficients over the support, in support order
  double eps0 = 0;  // squared residual
  double y_norm_sq = 0;
  int updates = 0;

  static SynthesisState init(const Matrix& M, const Vector& y) {
    SynthesisState s;
    s.c0 = M.transpose() * y;
    s.c = s.c0;
    s.rho = M.colwise().squaredNorm();
    s.y_norm_sq = y.squaredNorm();
    s.eps0 = s.y_norm_sq;
    s.xh = Vector(0);
    return s;
  }

  void add_atom(const Matrix& M, Index i);
  void remove_atom(const Matrix& M, Index pos);
  void refresh_aux(const Matrix& M);
};

// Rank-one refresh of (c, rho) after the cache and support were extended by
// one atom; v spans the direction the new atom added to the span.
inline void upd_add(SynthesisState& s, const Matrix& M) {
  const Matrix& B = s.cache.gram_inverse();
  const Index last = s.cache.order() - 1;
  Vector v = columns(M, s.support) * B.col(last);
  Vector rho_t = M.transpose() * v;
  s.c -= (s.xh(last) / B(last, last)) * rho_t;
  s.rho -= rho_t.cwiseProduct(rho_t) / B(last, last);
}

// Mirror update before removing the atom at position `pos`; the removed
// direction re-enters every projected atom with the opposite sign.
inline void upd_rem(SynthesisState& s, const Matrix& M, Index pos) {
  const Matrix& B = s.cache.gram_inverse();
  if (pos < 0 || pos >= s.cache.order())
    throw InvalidIndex("upd_rem: bad support position");
  Vector v = columns(M, s.support) * B.col(pos);
  Vector rho_t = M.transpose() * v;
  s.c += (s.xh(pos) / B(pos, pos)) * rho_t;
  s.rho += rho_t.cwiseProduct(rho_t) / B(pos, pos);
}

inline void SynthesisState::add_atom(const Matrix& M, Index i) {
  eps0 -= c(i) * c(i) / rho(i);
  cache.add_column(M.col(i));
  support.push_back(i);
  xh = cache.gram_inverse() * gather(c0, support);
  upd_add(*this, M);
  if (++updates >= kRefreshInterval) refresh_aux(M);
}

inline void SynthesisState::remove_atom(const Matrix& M, Index pos) {
  const Matrix& B = cache.gram_inverse();
  eps0 += xh(pos) * xh(pos) / B(pos, pos);
  upd_rem(*this, M, pos);
  cache.remove_column(pos);
  support.erase(support.begin() + pos);
  xh = cache.gram_inverse() * gather(c0, support);
  if (++updates >= kRefreshInterval) refresh_aux(M);
}

// Recomputes the selection vectors from scratch to cancel accumulated drift.
inline void SynthesisState::refresh_aux(const Matrix& M) {
  cache.refresh();
  if (support.empty()) {
    c = c0;
    rho = M.colwise().squaredNorm();
    xh = Vector(0);
    eps0 = y_norm_sq;
  } else {
    Matrix A = columns(M, support);
    xh = cache.gram_inverse() * gather(c0, support);
    Vector fitted = A * xh;
    c = c0 - M.transpose() * fitted;
    Matrix G = A.transpose() * M;  // k x n
    rho = M.colwise().squaredNorm().transpose() -
          (G.cwiseProduct(cache.gram_inverse() * G)).colwise().sum().transpose();
    eps0 = y_norm_sq - gather(c0, support).dot(xh);
  }
  updates = 0;
}

namespace detail {

inline bool residual_exhausted(double eps0, double y_norm_sq) {
  return eps0 <= kResidualFloor * y_norm_sq;
}

inline bool stop_reached(const StopRule& stop, Index support_size, double eps0,
                         double y_norm_sq) {
  if (residual_exhausted(eps0, y_norm_sq)) return true;
  if (stop.kind == StopRule::Kind::Cardinality) return support_size >= stop.k;
  return eps0 <= std::max(stop.eps_t, kResidualFloor * y_norm_sq);
}

struct Selection {
  Index index = -1;
  double score = 0.0;  // c(i)^2 / rho(i), the residual drop if added
};

// Best eligible atom outside the support by the least-residual rule.
// Throws NoProgress when every eligible correlation is below the floor.
inline Selection select_best_atom(const Vector& c, const Vector& rho,
                                  const std::vector<char>& in_support,
                                  double rho_floor) {
  Selection best;
  double max_abs_c = 0.0;
  for (Index i = 0; i < c.size(); ++i) {
    if (in_support[static_cast<std::size_t>(i)]) continue;
    if (!(rho(i) > rho_floor)) continue;
    max_abs_c = std::max(max_abs_c, std::abs(c(i)));
    double score = c(i) * c(i) / rho(i);
    if (best.index < 0 || score > best.score) {
      best.index = i;
      best.score = score;
    }
  }
  if (best.index < 0 || max_abs_c < kCorrelationFloor)
    throw NoProgress("selection: all correlations below floor");
  return best;
}

inline RecoveryResult finalize(const SynthesisProblem& p, const SupportSet& T,
                               Index iterations, Index warmup,
                               std::vector<IterationRecord> trace) {
  RecoveryResult res;
  res.support = T;
  res.iterations = iterations;
  res.warmup_iterations = warmup;
  res.trace = std::move(trace);
  res.xh_full = Vector::Zero(p.M.cols());
  if (T.empty()) {
    res.residual_sq = p.y.squaredNorm();
    return res;
  }
  Matrix A = columns(p.M, T);
  Vector coeff = least_squares(A, p.y);
  res.residual_sq = (p.y - A * coeff).squaredNorm();
  for (std::size_t j = 0; j < T.size(); ++j)
    res.xh_full(T[j]) = coeff(static_cast<Index>(j)) / p.column_scales(T[j]);
  return res;
}

inline Index iteration_cap(Index k) {
  // Termination valve: the worst-case convergence bound evaluated at the
  // critical isometry constant and a residual target of 1e-12 ||y||^2
  // (scale-free in that form), floored at 100k.
  double b = convergence_bound(0.445, 1.0, kResidualFloor, std::max<Index>(k, 1));
  double cap = std::max(std::ceil(b), 100.0 * static_cast<double>(std::max<Index>(k, 1)));
  return static_cast<Index>(cap);
}

}  // namespace detail

// Correlation-greedy baseline with a full least-squares refit per iteration,
// computed incrementally through the tracked Gram inverse.
inline RecoveryResult omp_solve(const SynthesisProblem& p) {
  const Matrix& M = p.M;
  const Vector& y = p.y;
  const double ynorm = y.squaredNorm();
  SupportSet T;
  std::vector<char> in_support(static_cast<std::size_t>(M.cols()), 0);
  InverseCache cache;
  Vector r = y;
  double eps0 = ynorm;
  std::vector<IterationRecord> trace;
  Index iterations = 0;
  while (!detail::stop_reached(p.stop, static_cast<Index>(T.size()), eps0, ynorm)) {
    Vector corr = M.transpose() * r;
    Index best = -1;
    double best_abs = 0.0;
    for (Index i = 0; i < corr.size(); ++i) {
      if (in_support[static_cast<std::size_t>(i)]) continue;
      double a = std::abs(corr(i));
      if (best < 0 || a > best_abs) {
        best = i;
        best_abs = a;
      }
    }
    if (best < 0 || best_abs < kCorrelationFloor)
      throw NoProgress("omp_solve: all correlations below floor");
    try {
      cache.add_column(M.col(best));
    } catch (const DegenerateColumn&) {
      throw NoProgress("omp_solve: selected atom already spanned");
    }
    T.push_back(best);
    in_support[static_cast<std::size_t>(best)] = 1;
    const Matrix& A = cache.tracked();
    Vector coeff = cache.gram_inverse() * (A.transpose() * y);
    r = y - A * coeff;
    eps0 = r.squaredNorm();
    ++iterations;
    trace.push_back({static_cast<Index>(T.size()), eps0});
  }
  return detail::finalize(p, T, iterations, iterations, std::move(trace));
}

// Naive least-residual solver: projections recomputed from a fresh QR factor
// at every iteration. Serves as the reference the fast variant must match.
inline RecoveryResult ols_solve(const SynthesisProblem& p) {
  const Matrix& M = p.M;
  const Vector& y = p.y;
  const double ynorm = y.squaredNorm();
  SupportSet T;
  std::vector<char> in_support(static_cast<std::size_t>(M.cols()), 0);
  double eps0 = ynorm;
  std::vector<IterationRecord> trace;
  Index iterations = 0;
  while (!detail::stop_reached(p.stop, static_cast<Index>(T.size()), eps0, ynorm)) {
    Matrix RM;  // columns: residual-projected atoms
    if (T.empty()) {
      RM = M;
    } else {
      Matrix A = columns(M, T);
      Eigen::HouseholderQR<Matrix> qr(A);
      Matrix Q = qr.householderQ() * Matrix::Identity(A.rows(), A.cols());
      RM = M - Q * (Q.transpose() * M);
    }
    Vector rho = RM.colwise().squaredNorm();
    Vector c = RM.transpose() * y;
    auto sel = detail::select_best_atom(c, rho, in_support, kRhoEligibleDirect);
    T.push_back(sel.index);
    in_support[static_cast<std::size_t>(sel.index)] = 1;
    Vector coeff = least_squares(columns(M, T), y);
    eps0 = (y - columns(M, T) * coeff).squaredNorm();
    ++iterations;
    trace.push_back({static_cast<Index>(T.size()), eps0});
  }
  return detail::finalize(p, T, iterations, iterations, std::move(trace));
}

// Fast variant of the naive solver: one dictionary-vector product per
// iteration, identical selection sequence.
inline RecoveryResult fols_solve(const SynthesisProblem& p) {
  const Matrix& M = p.M;
  SynthesisState s = SynthesisState::init(M, p.y);
  std::vector<char> in_support(static_cast<std::size_t>(M.cols()), 0);
  std::vector<IterationRecord> trace;
  Index iterations = 0;
  while (!detail::stop_reached(p.stop, static_cast<Index>(s.support.size()),
                               s.eps0, s.y_norm_sq)) {
    auto sel = detail::select_best_atom(s.c, s.rho, in_support, kRhoEligible);
    s.add_atom(M, sel.index);
    in_support[static_cast<std::size_t>(sel.index)] = 1;
    ++iterations;
    trace.push_back({static_cast<Index>(s.support.size()), s.eps0});
  }
  return detail::finalize(p, s.support, iterations, iterations, std::move(trace));
}

// Replacement solver: grows a support of k+1 atoms, then swaps the least
// contributing atom for the best outside candidate until no swap strictly
// lowers the residual. Returns a support of (at most) k atoms.
inline RecoveryResult olsr_solve(const SynthesisProblem& p) {
  if (p.stop.kind != StopRule::Kind::Cardinality)
    throw InvalidDims("olsr_solve: requires a cardinality stop");
  const Matrix& M = p.M;
  const Index k = p.stop.k;
  SynthesisState s = SynthesisState::init(M, p.y);
  std::vector<char> in_support(static_cast<std::size_t>(M.cols()), 0);
  std::vector<IterationRecord> trace;
  Index warmup = 0;

  while (static_cast<Index>(s.support.size()) < k + 1 &&
         !detail::residual_exhausted(s.eps0, s.y_norm_sq)) {
    auto sel = detail::select_best_atom(s.c, s.rho, in_support, kRhoEligible);
    s.add_atom(M, sel.index);
    in_support[static_cast<std::size_t>(sel.index)] = 1;
    ++warmup;
    trace.push_back({static_cast<Index>(s.support.size()), s.eps0});
  }
  if (static_cast<Index>(s.support.size()) <= k)
    return detail::finalize(p, s.support, warmup, warmup, std::move(trace));

  const Index cap = detail::iteration_cap(k);
  Index iterations = warmup;
  while (true) {
    Index j = least_contributing_index(s.xh, s.cache);
    const Matrix& B = s.cache.gram_inverse();
    double delta_removed = s.xh(j) * s.xh(j) / B(j, j);
    Index removed_atom = s.support[static_cast<std::size_t>(j)];
    s.remove_atom(M, j);
    in_support[static_cast<std::size_t>(removed_atom)] = 0;

    detail::Selection sel;
    try {
      sel = detail::select_best_atom(s.c, s.rho, in_support, kRhoEligible);
    } catch (const NoProgress&) {
      break;
    }
    // Re-adding the removed atom is an exact no-op; near-ties below rounding
    // noise are no strict improvement either.
    if (sel.index == removed_atom) break;
    const double margin =
        kResidualFloor * std::max({s.eps0, sel.score, delta_removed});
    if (!(sel.score > delta_removed + margin)) break;
    s.add_atom(M, sel.index);
    in_support[static_cast<std::size_t>(sel.index)] = 1;
    ++iterations;
    trace.push_back({static_cast<Index>(s.support.size()), s.eps0});
    if (iterations > cap)
      throw IterationCapExceeded("olsr_solve: replacement loop exceeded cap");
  }
  return detail::finalize(p, s.support, iterations, warmup, std::move(trace));
}

// Stepwise variant: each iteration adds the best atom, then drops the least
// contributing one unless it is the atom just added. Supports both stopping
// rules; with a cardinality stop the support overshoots to k+1 and the final
// least contributor is trimmed.
inline RecoveryResult iolsr_solve(const SynthesisProblem& p) {
  const Matrix& M = p.M;
  const bool card = p.stop.kind == StopRule::Kind::Cardinality;
  const Index k = card ? p.stop.k : std::min(M.rows(), M.cols());
  SynthesisState s = SynthesisState::init(M, p.y);
  std::vector<char> in_support(static_cast<std::size_t>(M.cols()), 0);
  std::vector<IterationRecord> trace;
  const Index cap = detail::iteration_cap(k);
  Index iterations = 0;

  while (true) {
    const Index size = static_cast<Index>(s.support.size());
    if (detail::residual_exhausted(s.eps0, s.y_norm_sq)) break;
    if (card) {
      if (size >= k + 1) break;
    } else if (s.eps0 <= std::max(p.stop.eps_t, kResidualFloor * s.y_norm_sq)) {
      break;
    }
    auto sel = detail::select_best_atom(s.c, s.rho, in_support, kRhoEligible);
    s.add_atom(M, sel.index);
    in_support[static_cast<std::size_t>(sel.index)] = 1;
    Index j = least_contributing_index(s.xh, s.cache);
    if (j != static_cast<Index>(s.support.size()) - 1) {
      Index removed_atom = s.support[static_cast<std::size_t>(j)];
      s.remove_atom(M, j);
      in_support[static_cast<std::size_t>(removed_atom)] = 0;
    }
    ++iterations;
    trace.push_back({static_cast<Index>(s.support.size()), s.eps0});
    if (iterations > cap)
      throw IterationCapExceeded("iolsr_solve: iteration cap exceeded");
  }
  if (card && static_cast<Index>(s.support.size()) > k) {
    Index j = least_contributing_index(s.xh, s.cache);
    s.remove_atom(M, j);
    trace.push_back({static_cast<Index>(s.support.size()), s.eps0});
  }
  return detail::finalize(p, s.support, iterations, iterations, std::move(trace));
}

}  // namespace sparsekit
