#pragma once

#include <algorithm>
#include <cstdint>

#include "sparsekit/linalg.hpp"
#include "sparsekit/rng.hpp"

namespace sparsekit {

inline Matrix gaussian_matrix(GaussianRng& rng, Index rows, Index cols) {
  Matrix M(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) M(i, j) = rng.gaussian();
  return M;
}

// Uniform size-k subset of {0..n-1}, returned sorted.
inline SupportSet sample_support(GaussianRng& rng, Index n, Index k) {
  std::vector<Index> pool(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
  SupportSet out;
  for (Index j = 0; j < k; ++j) {
    std::uint64_t pick = rng.uniform_index(static_cast<std::uint64_t>(n - j));
    std::swap(pool[static_cast<std::size_t>(j)],
              pool[static_cast<std::size_t>(j) + pick]);
    out.push_back(pool[static_cast<std::size_t>(j)]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Rescales every singular value to 1: rows form a unit tight frame.
inline Matrix gaussian_tight_frame(GaussianRng& rng, Index p, Index n) {
  if (p < n) throw InvalidDims("gaussian_tight_frame: requires p >= n");
  Matrix G = gaussian_matrix(rng, p, n);
  Eigen::JacobiSVD<Matrix> svd(G, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.matrixU() * svd.matrixV().transpose();
}

struct SynthesisInstance {
  Matrix M;   // column-normalized Gaussian dictionary
  Vector x;   // k-sparse coefficients
  Vector y0;  // noiseless measurements M x
  SupportSet support;
};

// Random sparse-recovery instance: Gaussian dictionary with unit columns,
// uniform support, Gaussian coefficient values.
inline SynthesisInstance gen_synthesis(std::uint64_t seed, Index m, Index n,
                                       Index k) {
  if (!(k >= 0 && k <= m && m <= n))
    throw InvalidDims("gen_synthesis: requires 0 <= k <= m <= n");
  GaussianRng rng(seed);
  SynthesisInstance inst;
  inst.M = gaussian_matrix(rng, m, n);
  for (Index j = 0; j < n; ++j) inst.M.col(j).normalize();
  inst.support = sample_support(rng, n, k);
  inst.x = Vector::Zero(n);
  for (Index idx : inst.support) inst.x(idx) = rng.gaussian();
  inst.y0 = inst.M * inst.x;
  return inst;
}

struct AnalysisInstance {
  Matrix M;      // Gaussian measurement matrix
  Matrix Omega;  // Gaussian tight frame
  Vector x;      // signal orthogonal to l rows of Omega
  Vector y0;     // M x
  SupportSet cosupport;
};

// Random cosparse instance: the signal is drawn inside the null space of a
// uniformly chosen set of l operator rows.
inline AnalysisInstance gen_analysis(std::uint64_t seed, Index m, Index n,
                                     Index p, Index l) {
  if (!(m >= 1 && m <= n && p >= n && l >= 0 && l < n))
    throw InvalidDims("gen_analysis: requires 1 <= m <= n <= p and l < n");
  GaussianRng rng(seed);
  AnalysisInstance inst;
  inst.M = gaussian_matrix(rng, m, n);
  inst.Omega = gaussian_tight_frame(rng, p, n);
  inst.cosupport = sample_support(rng, p, l);
  Matrix V = l == 0 ? Matrix::Identity(n, n)
                    : kernel_basis(rows(inst.Omega, inst.cosupport));
  if (V.cols() == 0)
    throw InvalidDims("gen_analysis: chosen rows leave no null space");
  Vector g(V.cols());
  for (Index i = 0; i < g.size(); ++i) g(i) = rng.gaussian();
  inst.x = V * g;
  inst.y0 = inst.M * inst.x;
  return inst;
}

// Adds a fraction of each column's right neighbor (five sweeps, last column
// left alone), then renormalizes. Raises cross-correlation in a controlled
// way.
inline Matrix damage_coherence(const Matrix& M, double mu) {
  if (!(mu >= 0.0)) throw InvalidDims("damage_coherence: mu must be >= 0");
  Matrix D = M;
  for (int pass = 0; pass < 5; ++pass)
    for (Index j = 0; j + 1 < D.cols(); ++j) D.col(j) += mu * D.col(j + 1);
  for (Index j = 0; j < D.cols(); ++j) D.col(j).normalize();
  return D;
}

}  // namespace sparsekit
