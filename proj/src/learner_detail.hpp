#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "least/dense.hpp"
#include "least/learner.hpp"
#include "least/rng.hpp"

namespace least::detail {

/// Column-major copy of a batch of samples (or of a residual).
struct ColumnBlock {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  std::span<const double> col(std::size_t j) const {
    return std::span<const double>(data).subspan(j * rows, rows);
  }
  std::span<double> col(std::size_t j) { return std::span<double>(data).subspan(j * rows, rows); }
};

/// Gathers the given rows (all rows, in order, when `rows` is empty).
ColumnBlock gather_columns(const DenseMatrix& x, std::span<const std::size_t> rows);

/// Draws B of n row indices uniformly without replacement each call (partial
/// Fisher-Yates), returned in ascending order. With B == n it returns nothing,
/// meaning "use every row in order".
class BatchSampler {
 public:
  BatchSampler(std::size_t n, std::size_t batch, std::uint64_t seed, std::uint64_t stream);
  std::span<const std::size_t> next();
  bool full() const { return batch_ == n_; }

 private:
  std::size_t n_;
  std::size_t batch_;
  Rng rng_;
  std::vector<std::size_t> perm_;
  std::vector<std::size_t> chosen_;
};

/// Fixed-order dot product: four interleaved partial sums combined as
/// (s0 + s1) + (s2 + s3), then the tail in order.
double dot(std::span<const double> a, std::span<const double> b);

inline double sign0(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

/// Sum of squares in column order, divided by the number of rows.
double mean_squared_norm(const ColumnBlock& r);

/// True when the last `window` objective values moved by less than `tol` relative.
bool window_converged(const std::vector<double>& history, unsigned window, double tol);

void check_finite(double value, const char* what, unsigned iteration);

}  // namespace least::detail
