#pragma once

#include <cstdint>

#include "least/sparse.hpp"

namespace least {

/// Adam moments stored on the same pattern as the weights they drive.
struct AdamState {
  SparseMatrix m;
  SparseMatrix v;
  std::uint64_t t = 0;
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_hat = 1e-8;

  /// Fresh state with zero moments on w's pattern.
  static AdamState for_weights(const SparseMatrix& w, double lr = 0.01);
};

/// d x d matrix with each off-diagonal position present independently with
/// probability `density` and values uniform on +-sqrt(6 / (2d)).
/// Positions are drawn by geometric skipping, so the cost is O(nnz).
SparseMatrix glorot_sparse_init(Index d, double density, std::uint64_t seed);

/// Carries moment values over to w's (possibly grown or shrunk) pattern:
/// surviving positions keep their moments, new positions start at 0 and
/// dropped positions are discarded.
void resync_moments(AdamState& state, const SparseMatrix& w);

/// One bias-corrected Adam step on every stored entry of w. Entries of w
/// missing from grad see a zero gradient. grad must not store positions
/// outside w, and the moments must share w's pattern (call resync_moments
/// after changing it); violations throw std::logic_error.
void adam_step(AdamState& state, SparseMatrix& w, const SparseMatrix& grad);

/// Removes entries with |value| < theta. theta = 0 leaves w unchanged.
SparseMatrix threshold_filter(const SparseMatrix& w, double theta);

}  // namespace least
