#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "sparsekit/linalg.hpp"
#include "sparsekit/synthesis.hpp"

namespace sparsekit {

// Pivot floor for the cosupport rank-one updates: 1 -/+ alpha(i) at or below
// this means the update would make the reduced row system rank deficient.
inline constexpr double kPivotFloor = 1e-10;

// Replacement passes allowed per excess row before giving up.
inline constexpr Index kAnalysisReplacementCapPerRow = 50;

struct AnalysisProblem {
  Matrix M;      // m x n measurement matrix, full row rank
  Matrix Omega;  // p x n analysis operator
  Vector y;
  StopRule stop;  // Cardinality = target cosupport size l, or Residual
  double noise_budget = 0.0;  // measurement-noise norm; 0 = noiseless

  static AnalysisProblem create(Matrix M, Matrix Omega, Vector y, StopRule stop,
                                double noise_budget = 0.0) {
    const Index m = M.rows(), n = M.cols(), p = Omega.rows();
    if (m == 0 || n == 0 || p == 0)
      throw InvalidDims("AnalysisProblem: empty operator");
    if (Omega.cols() != n)
      throw InvalidDims("AnalysisProblem: operator column mismatch");
    if (y.size() != m)
      throw InvalidDims("AnalysisProblem: measurement length mismatch");
    if (m > n) throw InvalidDims("AnalysisProblem: requires m <= n");
    if (!M.allFinite() || !Omega.allFinite() || !y.allFinite())
      throw InvalidDims("AnalysisProblem: non-finite input");
    if (stop.kind == StopRule::Kind::Cardinality) {
      if (stop.k < 0 || stop.k > p)
        throw InvalidDims("AnalysisProblem: cosupport size out of range");
    } else if (!(stop.eps_t >= 0.0)) {
      throw InvalidDims("AnalysisProblem: residual target must be >= 0");
    }
    if (!(noise_budget >= 0.0))
      throw InvalidDims("AnalysisProblem: noise budget must be >= 0");
    {
      Eigen::JacobiSVD<Matrix> svd(M);
      const auto& s = svd.singularValues();
      if (s.size() < m || s(m - 1) < kRankTol * s(0))
        throw RankDeficient("AnalysisProblem: M is row-rank deficient");
    }
    {
      // The combined system must pin down the full-cosupport estimate.
      Matrix B = M.transpose() * M + Omega.transpose() * Omega;
      Eigen::SelfAdjointEigenSolver<Matrix> eig(B, Eigen::EigenvaluesOnly);
      const auto& ev = eig.eigenvalues();
      if (ev(0) < 1e-12 * ev(ev.size() - 1))
        throw SingularSystem("AnalysisProblem: singular at full cosupport");
    }
    AnalysisProblem prob;
    prob.M = std::move(M);
    prob.Omega = std::move(Omega);
    prob.y = std::move(y);
    prob.stop = stop;
    prob.noise_budget = noise_budget;
    return prob;
  }
};

struct AnalysisResult {
  Vector xh;
  SupportSet cosupport;
  double objective = 0.0;  // squared norm of the kept rows applied to xh
  Index iterations = 0;
  std::vector<IterationRecord> trace;
};

namespace detail {

struct CheckedLdlt {
  Eigen::LDLT<Matrix> ldlt;
  explicit CheckedLdlt(const Matrix& S, const char* who) : ldlt(S) {
    if (ldlt.info() != Eigen::Success)
      throw SingularSystem(std::string(who) + ": factorization failed");
    const auto& d = ldlt.vectorD();
    double dmax = d.cwiseAbs().maxCoeff();
    if (!(dmax > 0.0) || d.minCoeff() <= 1e-12 * dmax)
      throw SingularSystem(std::string(who) + ": numerically singular system");
  }
};

}  // namespace detail

// Minimizer of ||Omega_Lambda x||^2 subject to M x = y, by the closed form
// x = B^{-1} M^T (M B^{-1} M^T)^{-1} y with B = M^T M + Omega_L^T Omega_L.
inline Vector analysis_ls(const Matrix& M, const Matrix& Omega, const Vector& y,
                          const SupportSet& Lambda) {
  validate_support(Lambda, Omega.rows(), "analysis_ls");
  Matrix B = M.transpose() * M;
  if (!Lambda.empty()) {
    Matrix OL = rows(Omega, Lambda);
    B += OL.transpose() * OL;
  }
  detail::CheckedLdlt fac(B, "analysis_ls[B]");
  Matrix W = fac.ldlt.solve(M.transpose());  // n x m
  detail::CheckedLdlt cap(M * W, "analysis_ls[C]");
  return W * cap.ldlt.solve(y);
}

inline Vector analysis_ls(const AnalysisProblem& prob, const SupportSet& Lambda) {
  return analysis_ls(prob.M, prob.Omega, prob.y, Lambda);
}

// Objective of the constrained fit, evaluated directly.
inline double cosparse_objective(const Matrix& M, const Matrix& Omega,
                                 const Vector& y, const SupportSet& Lambda) {
  Vector xh = analysis_ls(M, Omega, y, Lambda);
  if (Lambda.empty()) return 0.0;
  return (rows(Omega, Lambda) * xh).squaredNorm();
}

// Running state of the cosupport solvers. For the current cosupport Lambda
// it keeps Gamma = (L_Lambda L_Lambda^T)^{-1} with L = Q^T Omega^T restricted
// to Lambda's columns, plus the p-length selection vectors
//   b(i)     = <row i of Omega, pinv(M) y>
//   gamma(i) = l_i^T Gamma L_Lambda b_Lambda
//   alpha(i) = l_i^T Gamma l_i.
struct AnalysisState {
  SupportSet cosupport;           // kept row ids, insertion order
  std::vector<char> in_cosupport; // mask over row ids
  Matrix Gamma;                   // (n-m) x (n-m)
  Vector b;
  Vector gamma;
  Vector alpha;
  double eps0 = 0.0;  // ||b_Lambda||^2 - ||gamma_Lambda||^2
  Matrix QMperp;      // n x (n-m) null-space basis of M
  Matrix L;           // (n-m) x p
  Matrix OmegaMpinv;  // p x m
  Vector Mpinv_y;     // n
  int updates = 0;

  static AnalysisState init(const AnalysisProblem& prob) {
    const Index n = prob.M.cols(), m = prob.M.rows(), p = prob.Omega.rows();
    AnalysisState s;
    s.QMperp = (m < n) ? null_space_basis(prob.M) : Matrix(n, 0);
    Matrix Mpinv = pseudo_inverse(prob.M);
    s.Mpinv_y = Mpinv * prob.y;
    s.OmegaMpinv = prob.Omega * Mpinv;
    s.b = s.OmegaMpinv * prob.y;
    s.L = s.QMperp.transpose() * prob.Omega.transpose();
    s.cosupport.resize(static_cast<std::size_t>(p));
    for (Index i = 0; i < p; ++i) s.cosupport[static_cast<std::size_t>(i)] = i;
    s.in_cosupport.assign(static_cast<std::size_t>(p), 1);
    const Index q = n - m;
    if (q == 0) {
      s.Gamma = Matrix(0, 0);
      s.gamma = Vector::Zero(p);
      s.alpha = Vector::Zero(p);
    } else {
      detail::CheckedLdlt fac(s.L * s.L.transpose(), "AnalysisState[LL^T]");
      s.Gamma = fac.ldlt.solve(Matrix::Identity(q, q));
      s.Gamma = ((s.Gamma + s.Gamma.transpose()) * 0.5).eval();
      Matrix W = s.Gamma * s.L;
      s.gamma = s.L.transpose() * (s.Gamma * (s.L * s.b));
      s.alpha = s.L.cwiseProduct(W).colwise().sum().transpose();
    }
    s.eps0 = s.b.squaredNorm() - s.gamma.squaredNorm();
    return s;
  }

  double recompute_eps0() const {
    double acc = 0.0;
    for (Index i : cosupport) acc += b(i) * b(i) - gamma(i) * gamma(i);
    return acc;
  }

  void add_row(Index j);
  void remove_row(Index i);
  void refresh();
};

// Rank-one update of (Gamma, gamma, alpha) when row j joins the cosupport.
// All row data enters through the cached matrix L.
inline void upd_add_a(AnalysisState& s, Index j) {
  double piv = 1.0 + s.alpha(j);
  if (piv <= kPivotFloor)
    throw DegeneratePivot("upd_add_a: pivot below floor");
  Vector u = s.Gamma * s.L.col(j);
  Vector w = s.L.transpose() * u;  // w(t) = l_t^T Gamma l_j
  s.Gamma -= u * u.transpose() / piv;
  s.Gamma = ((s.Gamma + s.Gamma.transpose()) * 0.5).eval();
  s.gamma += ((s.b(j) - s.gamma(j)) / piv) * w;
  s.alpha -= w.cwiseProduct(w) / piv;
}

// Mirror update when row i leaves the cosupport.
inline void upd_rem_a(AnalysisState& s, Index i) {
  double piv = 1.0 - s.alpha(i);
  if (piv <= kPivotFloor)
    throw DegeneratePivot("upd_rem_a: pivot below floor");
  Vector u = s.Gamma * s.L.col(i);
  Vector w = s.L.transpose() * u;
  s.Gamma += u * u.transpose() / piv;
  s.Gamma = ((s.Gamma + s.Gamma.transpose()) * 0.5).eval();
  s.gamma -= ((s.b(i) - s.gamma(i)) / piv) * w;
  s.alpha += w.cwiseProduct(w) / piv;
}

inline void AnalysisState::add_row(Index j) {
  if (j < 0 || j >= b.size() || in_cosupport[static_cast<std::size_t>(j)])
    throw InvalidIndex("AnalysisState::add_row: row not addable");
  upd_add_a(*this, j);
  cosupport.push_back(j);
  in_cosupport[static_cast<std::size_t>(j)] = 1;
  eps0 = recompute_eps0();
  if (++updates >= kRefreshInterval) refresh();
}

inline void AnalysisState::remove_row(Index i) {
  if (i < 0 || i >= b.size() || !in_cosupport[static_cast<std::size_t>(i)])
    throw InvalidIndex("AnalysisState::remove_row: row not removable");
  upd_rem_a(*this, i);
  cosupport.erase(std::find(cosupport.begin(), cosupport.end(), i));
  in_cosupport[static_cast<std::size_t>(i)] = 0;
  eps0 = recompute_eps0();
  if (++updates >= kRefreshInterval) refresh();
}

// From-scratch recomputation of (Gamma, gamma, alpha) for the current
// cosupport, cancelling accumulated update drift.
inline void AnalysisState::refresh() {
  const Index q = L.rows();
  updates = 0;
  if (q == 0) {
    eps0 = recompute_eps0();
    return;
  }
  Matrix LL = columns(L, cosupport);
  detail::CheckedLdlt fac(LL * LL.transpose(), "AnalysisState::refresh");
  Gamma = fac.ldlt.solve(Matrix::Identity(q, q));
  Gamma = ((Gamma + Gamma.transpose()) * 0.5).eval();
  Vector b_kept = gather(b, cosupport);
  gamma = L.transpose() * (Gamma * (LL * b_kept));
  Matrix W = Gamma * L;
  alpha = L.cwiseProduct(W).colwise().sum().transpose();
  eps0 = recompute_eps0();
}

// State-tracked objective value for the current cosupport.
inline double cosparse_residual(const AnalysisState& s) {
  return s.recompute_eps0();
}

namespace detail {

// Row whose removal lowers the objective the most. Rows with a degenerate
// pivot are skipped; if every row is degenerate the caller cannot shrink
// the cosupport further.
inline Index select_remove_row(const Vector& b, const Vector& gamma,
                               const Vector& alpha,
                               const std::vector<char>& mask) {
  Index best = -1;
  double best_score = 0.0;
  for (Index i = 0; i < b.size(); ++i) {
    if (!mask[static_cast<std::size_t>(i)]) continue;
    double piv = 1.0 - alpha(i);
    if (piv <= kPivotFloor) continue;
    double d = b(i) - gamma(i);
    double score = d * d / piv;
    if (best < 0 || score > best_score) {
      best = i;
      best_score = score;
    }
  }
  if (best < 0)
    throw DegeneratePivot("select_remove_row: no removable row");
  return best;
}

// Row outside the cosupport whose inclusion raises the objective the least.
inline Index select_add_row(const Vector& b, const Vector& gamma,
                            const Vector& alpha,
                            const std::vector<char>& mask) {
  Index best = -1;
  double best_score = 0.0;
  for (Index j = 0; j < b.size(); ++j) {
    if (mask[static_cast<std::size_t>(j)]) continue;
    double piv = 1.0 + alpha(j);
    if (piv <= kPivotFloor) continue;
    double d = b(j) - gamma(j);
    double score = d * d / piv;
    if (best < 0 || score < best_score) {
      best = j;
      best_score = score;
    }
  }
  if (best < 0)
    throw DegeneratePivot("select_add_row: no addable row");
  return best;
}

}  // namespace detail

enum class SelectionMode { Add, Remove };

struct NoisyAdjusted {
  Vector b_tilde;
  Vector gamma_tilde;
  Vector w_hat;  // the fitted measurement perturbation, norm = noise budget
};

// Fits the norm-constrained perturbation w minimizing the projected objective
// residual, by a Lagrange relaxation with a scalar search on the multiplier,
// then returns the perturbation-adjusted selection vectors.
inline NoisyAdjusted noisy_adjust(const AnalysisState& s,
                                  const AnalysisProblem& prob) {
  const double eps_w = prob.noise_budget;
  NoisyAdjusted out;
  if (eps_w == 0.0) {
    out.b_tilde = s.b;
    out.gamma_tilde = s.gamma;
    out.w_hat = Vector::Zero(prob.M.rows());
    return out;
  }
  Matrix AL = rows(s.OmegaMpinv, s.cosupport);  // |Lambda| x m
  Matrix LL = columns(s.L, s.cosupport);
  Matrix G = AL - LL.transpose() * (s.Gamma * (LL * AL));
  Vector t = gather(s.b, s.cosupport) - gather(s.gamma, s.cosupport);

  Eigen::JacobiSVD<Matrix> svd(G, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sig = svd.singularValues();
  Vector d = svd.matrixU().transpose() * t;
  auto norm_at = [&](double lambda) {
    double acc = 0.0;
    for (Index i = 0; i < sig.size(); ++i) {
      double w = sig(i) * d(i) / (sig(i) * sig(i) + lambda);
      acc += w * w;
    }
    return std::sqrt(acc);
  };
  const double tol = 1e-6 * eps_w;
  double lo = 1e-12, hi = 1e12;
  if (norm_at(lo) < eps_w - tol)
    throw BisectionFailed("noisy_adjust: norm target unreachable");
  if (norm_at(hi) > eps_w + tol)
    throw BisectionFailed("noisy_adjust: norm target above search range");
  double lambda = std::sqrt(lo * hi);
  for (int it = 0; it < 500; ++it) {
    lambda = std::sqrt(lo * hi);
    double nw = norm_at(lambda);
    if (std::abs(nw - eps_w) <= tol) break;
    if (nw > eps_w)
      lo = lambda;  // increase damping to shrink w
    else
      hi = lambda;
    if (it == 499)
      throw BisectionFailed("noisy_adjust: multiplier search did not converge");
  }
  Vector coeff(sig.size());
  for (Index i = 0; i < sig.size(); ++i)
    coeff(i) = sig(i) * d(i) / (sig(i) * sig(i) + lambda);
  out.w_hat = svd.matrixV() * coeff;

  Vector dp = s.OmegaMpinv * out.w_hat;  // p-length perturbation image
  out.b_tilde = s.b - dp;
  out.gamma_tilde = s.gamma - s.L.transpose() * (s.Gamma * (LL * gather(dp, s.cosupport)));
  return out;
}

// Selection in the presence of measurement noise: the perturbation-adjusted
// scores replace (b, gamma) in the noiseless rules.
inline Index noisy_selection(const AnalysisState& s, const AnalysisProblem& prob,
                             SelectionMode mode) {
  NoisyAdjusted adj = noisy_adjust(s, prob);
  if (mode == SelectionMode::Remove)
    return detail::select_remove_row(adj.b_tilde, adj.gamma_tilde, s.alpha,
                                     s.in_cosupport);
  return detail::select_add_row(adj.b_tilde, adj.gamma_tilde, s.alpha,
                                s.in_cosupport);
}

namespace detail {

inline bool analysis_stop_reached(const StopRule& stop, Index cosupport_size,
                                  double eps0, double eps0_init) {
  if (stop.kind == StopRule::Kind::Cardinality)
    return cosupport_size <= stop.k;
  return eps0 <= std::max(stop.eps_t, kResidualFloor * std::max(eps0_init, 0.0));
}

inline AnalysisResult finalize_analysis(const AnalysisProblem& prob,
                                        const AnalysisState& s,
                                        Index iterations,
                                        std::vector<IterationRecord> trace) {
  AnalysisResult res;
  res.cosupport = s.cosupport;
  std::sort(res.cosupport.begin(), res.cosupport.end());
  res.xh = analysis_ls(prob, res.cosupport);
  res.objective = res.cosupport.empty()
                      ? 0.0
                      : (rows(prob.Omega, res.cosupport) * res.xh).squaredNorm();
  res.iterations = iterations;
  res.trace = std::move(trace);
  return res;
}

// Shared removal phase: shrink the cosupport by the least-squares rule until
// the stopping condition fires.
inline Index gals_descent(AnalysisState& s, const AnalysisProblem& prob,
                          double eps0_init, std::vector<IterationRecord>& trace) {
  Index iterations = 0;
  while (!analysis_stop_reached(prob.stop, static_cast<Index>(s.cosupport.size()),
                                s.eps0, eps0_init)) {
    Index i = prob.noise_budget > 0.0
                  ? noisy_selection(s, prob, SelectionMode::Remove)
                  : select_remove_row(s.b, s.gamma, s.alpha, s.in_cosupport);
    s.remove_row(i);
    ++iterations;
    trace.push_back({static_cast<Index>(s.cosupport.size()), s.eps0});
  }
  return iterations;
}

}  // namespace detail

// Correlation-style baseline: repeatedly re-solves the constrained fit and
// drops the cosupport row with the largest magnitude in the analyzed
// estimate.
inline AnalysisResult gap_solve(const AnalysisProblem& prob) {
  const Index p = prob.Omega.rows();
  SupportSet Lambda(static_cast<std::size_t>(p));
  for (Index i = 0; i < p; ++i) Lambda[static_cast<std::size_t>(i)] = i;
  std::vector<IterationRecord> trace;
  Index iterations = 0;
  Vector xh = analysis_ls(prob, Lambda);
  double obj = (prob.Omega * xh).squaredNorm();
  const double obj_init = obj;
  while (!detail::analysis_stop_reached(prob.stop,
                                        static_cast<Index>(Lambda.size()), obj,
                                        obj_init)) {
    Vector scores = prob.Omega * xh;
    Index best_pos = -1;
    double best_val = -1.0;
    for (std::size_t pos = 0; pos < Lambda.size(); ++pos) {
      double v = std::abs(scores(Lambda[pos]));
      if (v > best_val) {
        best_val = v;
        best_pos = static_cast<Index>(pos);
      }
    }
    Lambda.erase(Lambda.begin() + best_pos);
    ++iterations;
    xh = analysis_ls(prob, Lambda);
    obj = Lambda.empty() ? 0.0 : (rows(prob.Omega, Lambda) * xh).squaredNorm();
    trace.push_back({static_cast<Index>(Lambda.size()), obj});
  }
  AnalysisResult res;
  res.cosupport = Lambda;
  res.xh = xh;
  res.objective = obj;
  res.iterations = iterations;
  res.trace = std::move(trace);
  return res;
}

// Least-squares greedy cosupport shrinkage: start from all rows, repeatedly
// remove the row whose exclusion lowers the objective the most.
inline AnalysisResult gals_solve(const AnalysisProblem& prob) {
  AnalysisState s = AnalysisState::init(prob);
  std::vector<IterationRecord> trace;
  const double eps0_init = s.eps0;
  Index iterations = detail::gals_descent(s, prob, eps0_init, trace);
  return detail::finalize_analysis(prob, s, iterations, std::move(trace));
}

// Replacement variant: after the shrink phase reaches size l, alternately add
// the cheapest outside row and remove the most expensive inside row until the
// objective stops strictly decreasing.
inline AnalysisResult galsr_solve(const AnalysisProblem& prob) {
  if (prob.stop.kind != StopRule::Kind::Cardinality)
    throw InvalidDims("galsr_solve: requires a cosupport-size stop");
  AnalysisState s = AnalysisState::init(prob);
  std::vector<IterationRecord> trace;
  const double eps0_init = s.eps0;
  Index iterations = detail::gals_descent(s, prob, eps0_init, trace);

  const Index cap =
      kAnalysisReplacementCapPerRow *
      std::max<Index>(prob.Omega.rows() - prob.stop.k, 1);
  Index passes = 0;
  while (true) {
    double eps_before = s.eps0;
    Index j = prob.noise_budget > 0.0
                  ? noisy_selection(s, prob, SelectionMode::Add)
                  : detail::select_add_row(s.b, s.gamma, s.alpha, s.in_cosupport);
    s.add_row(j);
    Index i = prob.noise_budget > 0.0
                  ? noisy_selection(s, prob, SelectionMode::Remove)
                  : detail::select_remove_row(s.b, s.gamma, s.alpha,
                                              s.in_cosupport);
    s.remove_row(i);
    ++iterations;
    ++passes;
    trace.push_back({static_cast<Index>(s.cosupport.size()), s.eps0});
    if (!(s.eps0 < eps_before)) break;
    if (passes > cap)
      throw IterationCapExceeded("galsr_solve: replacement cap exceeded");
  }
  return detail::finalize_analysis(prob, s, iterations, std::move(trace));
}

}  // namespace sparsekit
