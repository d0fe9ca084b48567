#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "least/acyclicity.hpp"

namespace least::detail {

struct DenseBoundResult {
  double bound = 0.0;
  /// Row-major d x d gradient with respect to W. Zero wherever W is zero.
  std::vector<double> gradient;
};

/// Forward and unmasked backward pass on a row-major dense W. Uses the same
/// summation order as the sparse kernels, so on identical inputs the results
/// agree with forward_bound/backward_gradient bit for bit.
DenseBoundResult dense_bound_and_gradient(std::span<const double> w, std::size_t d,
                                          const BoundConfig& cfg, bool want_gradient = true);

}  // namespace least::detail
