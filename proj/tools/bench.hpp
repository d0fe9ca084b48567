#pragma once

#include <cstddef>
#include <cstdint>

#include "least/acyclicity.hpp"
#include "least/sparse.hpp"

namespace least::cli {

/// d x d matrix with `nnz` uniformly placed entries (duplicates merged, so
/// slightly fewer) of magnitude uniform on [0.1, 1] and random sign.
SparseMatrix random_sparse(Index d, std::size_t nnz, std::uint64_t seed);

struct ConstraintCost {
  Index d = 0;
  std::size_t nnz = 0;
  double forward_seconds = 0.0;   // medians over the repeats
  double backward_seconds = 0.0;
  double total_seconds = 0.0;
  double bound = 0.0;
  std::size_t trace_bytes = 0;
  std::size_t gradient_bytes = 0;
  /// Peak bytes allocated by forward_bound above what it returns (the trace).
  std::size_t forward_extra_bytes = 0;
  /// Peak bytes allocated by backward_gradient above what it returns.
  std::size_t backward_extra_bytes = 0;
  /// Peak bytes held during forward + backward, trace and gradient included.
  std::size_t peak_bytes = 0;
};

/// Times forward_bound + backward_gradient on w (one warm-up call, then the
/// median of `repeats`) and records allocation peaks. Memory figures need the
/// least_alloc_stats object library in the executable.
ConstraintCost measure_constraint(const SparseMatrix& w, const BoundConfig& cfg, unsigned repeats);

}  // namespace least::cli
