#include <stdexcept>
#include <string>

#include "dense_bound.hpp"
#include "least/acyclicity.hpp"
#include "least/errors.hpp"

namespace least {

SparseMatrix backward_gradient_dense_reference(const BoundTrace& trace, const SparseMatrix& w,
                                               const BoundConfig& cfg) {
  if (!(trace.config == cfg)) {
    throw std::invalid_argument("bound trace was computed with a different k or alpha");
  }
  if (!w.is_square() || w.rows() != trace.dim) {
    throw std::invalid_argument("bound trace does not match W");
  }
  if (w.rows() > kDenseReferenceGuard) {
    throw GuardError("dense reference gradient: d=" + std::to_string(w.rows()) +
                     " exceeds guard " + std::to_string(kDenseReferenceGuard));
  }
  const std::size_t d = w.rows();
  const auto dense = detail::dense_bound_and_gradient(w.to_dense(), d, cfg);

  SparseMatrix out = w;
  auto vals = out.values();
  const auto offsets = w.row_offsets();
  const auto cols = w.col_indices();
  for (Index p = 0; p < w.rows(); ++p) {
    for (Index e = offsets[p]; e < offsets[p + 1]; ++e) vals[e] = dense.gradient[p * d + cols[e]];
  }
  return out;
}

}  // namespace least
