#pragma once

#include <cstddef>
#include <vector>

#include "least/sparse.hpp"

namespace least {

/// Dense oracles refuse matrices larger than this.
inline constexpr std::size_t kDenseGuard = 2000;
/// backward_gradient_dense_reference materialises several d x d arrays.
inline constexpr std::size_t kDenseReferenceGuard = 200;

struct BoundConfig {
  unsigned k = 5;       // number of diagonal-similarity rescalings
  double alpha = 0.9;   // row/column balancing factor in [0, 1]

  void validate() const;
  friend bool operator==(const BoundConfig&, const BoundConfig&) = default;
};

/// One rescaling level: S^(j) and the vectors derived from it.
struct BoundLevel {
  SparseMatrix s;      // compressed: exact zeros are dropped
  DenseVector rows;    // r(S^(j))
  DenseVector cols;    // c(S^(j))
  DenseVector b;       // r^alpha o c^(1-alpha)
};

/// Everything the backward pass needs from the forward pass.
struct BoundTrace {
  BoundConfig config;
  Index dim = 0;
  std::vector<BoundLevel> levels;  // k+1 entries
  double bound = 0.0;              // sum of levels.back().b

  std::size_t storage_bytes() const;
};

/// Spectral-radius upper bound of S = W o W.
///
/// S^(0) = W o W and, for each level, b = r(S)^alpha o c(S)^(1-alpha) followed by
/// S' = b^-1 o S o b^T (with 1/0 read as 0). The bound is the sum of the last b.
/// Costs O(k * nnz) time; never forms a dense d x d array.
BoundTrace forward_bound(const SparseMatrix& w, const BoundConfig& cfg);

/// Gradient of the bound with respect to W, computed level by level on the
/// support of W only. The result has exactly W's pattern.
///
/// Throws std::invalid_argument if the trace was produced with a different
/// config or matrix shape.
SparseMatrix backward_gradient(const BoundTrace& trace, const SparseMatrix& w,
                               const BoundConfig& cfg);

/// Same gradient via the unmasked recursion (all-ones J in place of the support
/// mask), restricted to supp(W) at the end. Test oracle; d <= kDenseReferenceGuard.
SparseMatrix backward_gradient_dense_reference(const BoundTrace& trace, const SparseMatrix& w,
                                               const BoundConfig& cfg);

/// Tr(exp(W o W)) - d by scaling and squaring of a truncated Taylor series.
double h_exact(const SparseMatrix& w, std::size_t guard = kDenseGuard);

/// Tr((I + W o W)^d) - d by repeated squaring. Returns +Inf on overflow.
double g_exact(const SparseMatrix& w, std::size_t guard = kDenseGuard);

struct SpectralRadius {
  double value = 0.0;
  unsigned iterations = 0;
  bool converged = true;
  /// Largest diagonal shift used to make a cyclic component aperiodic.
  double shift = 0.0;
};

/// Spectral radius of the non-negative matrix s.
///
/// The matrix is split into strongly connected components; each cyclic
/// component C is power-iterated as C + sigma*I (sigma = its largest row sum)
/// from the normalised all-ones vector until the Collatz-Wielandt bounds agree
/// to 1e-10 relative, or 10000 iterations.
SpectralRadius spectral_radius_nonnegative(const SparseMatrix& s, std::size_t guard = kDenseGuard);

/// Spectral radius of S = W o W.
SpectralRadius spectral_radius_dense(const SparseMatrix& w, std::size_t guard = kDenseGuard);

struct ConsistencyThresholds {
  double h_threshold = 0.0;  // ln(eps/d + 1)
  double g_threshold = 0.0;  // (1/alpha) * log_d(eps/d^2); negative when eps < d^2
  bool g_threshold_unsatisfiable() const { return g_threshold < 0.0; }
};

/// Bound values below which h (first) or g (second) is guaranteed <= epsilon.
/// Requires epsilon > 0, d >= 2 and 0 < alpha < 1.
ConsistencyThresholds consistency_thresholds(double epsilon, std::size_t d, double alpha);

}  // namespace least
