#pragma once

#include <cmath>

#include "least/sparse.hpp"

namespace least::detail {

// b = r^alpha c^(1-alpha). For 0 < alpha < 1 this is c (r/c)^alpha, one pow
// per node instead of two, unless r/c leaves the normal range.
inline double balance(double row_sum, double col_sum, double alpha) {
  if (alpha > 0.0 && alpha < 1.0) {
    if (row_sum == 0.0 || col_sum == 0.0) return 0.0;
    if (row_sum == col_sum) return row_sum;
    const double q = row_sum / col_sum;
    if (std::isnormal(q)) return col_sum * std::pow(q, alpha);
  }
  return pow0(row_sum, alpha) * pow0(col_sum, 1.0 - alpha);
}

// Partial derivatives of b: x = db/dr = alpha b / r, y = db/dc = (1-alpha) b / c.
// Quotients by a zero sum are read as 0. `b` must be balance(r, c, alpha).
inline double d_balance_d_row(double row_sum, double col_sum, double b, double alpha) {
  if (alpha > 0.0 && alpha < 1.0) return row_sum == 0.0 ? 0.0 : alpha * b / row_sum;
  return alpha * pow0(col_sum, 1.0 - alpha) * inv_pow0(row_sum, 1.0 - alpha);
}
inline double d_balance_d_col(double row_sum, double col_sum, double b, double alpha) {
  if (alpha > 0.0 && alpha < 1.0) return col_sum == 0.0 ? 0.0 : (1.0 - alpha) * b / col_sum;
  return (1.0 - alpha) * pow0(row_sum, alpha) * inv_pow0(col_sum, alpha);
}

}  // namespace least::detail
