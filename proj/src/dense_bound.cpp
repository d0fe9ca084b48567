#include "dense_bound.hpp"

#include <algorithm>

#include "bound_detail.hpp"
#include "least/errors.hpp"

namespace least::detail {

DenseBoundResult dense_bound_and_gradient(std::span<const double> w, std::size_t d,
                                          const BoundConfig& cfg, bool want_gradient) {
  cfg.validate();
  if (w.size() != d * d) throw ShapeError("dense bound: W must be d x d");
  const double alpha = cfg.alpha;
  const unsigned k = cfg.k;

  struct Level {
    std::vector<double> s, rows, cols, b;
  };
  std::vector<Level> levels(k + 1);

  std::vector<double> s(d * d);
  for (std::size_t e = 0; e < d * d; ++e) s[e] = w[e] * w[e];
  for (unsigned j = 0; j <= k; ++j) {
    Level& lv = levels[j];
    lv.rows.assign(d, 0.0);
    lv.cols.assign(d, 0.0);
    lv.b.resize(d);
    for (std::size_t p = 0; p < d; ++p) {
      double acc = 0.0;
      for (std::size_t q = 0; q < d; ++q) {
        acc += s[p * d + q];
        lv.cols[q] += s[p * d + q];
      }
      lv.rows[p] = acc;
    }
    for (std::size_t i = 0; i < d; ++i) lv.b[i] = balance(lv.rows[i], lv.cols[i], alpha);
    std::vector<double> next;
    if (j < k) {
      next.resize(d * d);
      for (std::size_t p = 0; p < d; ++p) {
        const double inv_bp = safe_inverse(lv.b[p]);
        for (std::size_t q = 0; q < d; ++q) next[p * d + q] = inv_bp * s[p * d + q] * lv.b[q];
      }
    }
    lv.s = std::move(s);
    s = std::move(next);
  }

  DenseBoundResult out;
  for (double v : levels[k].b) out.bound += v;
  if (!want_gradient) return out;

  std::vector<double> x(d), y(d), z(d), z_cols(d);
  auto load_partials = [&](const Level& lv) {
    for (std::size_t i = 0; i < d; ++i) {
      x[i] = d_balance_d_row(lv.rows[i], lv.cols[i], lv.b[i], alpha);
      y[i] = d_balance_d_col(lv.rows[i], lv.cols[i], lv.b[i], alpha);
    }
  };

  std::vector<double> grad(d * d);
  load_partials(levels[k]);
  for (std::size_t p = 0; p < d; ++p)
    for (std::size_t q = 0; q < d; ++q) grad[p * d + q] = x[p] + y[q];

  for (unsigned j = k; j >= 1; --j) {
    const Level& prev = levels[j - 1];
    const auto& b = prev.b;
    std::fill(z_cols.begin(), z_cols.end(), 0.0);
    for (std::size_t p = 0; p < d; ++p) {
      const double inv_bp = safe_inverse(b[p]);
      double row_acc = 0.0;
      for (std::size_t q = 0; q < d; ++q) {
        const double g = grad[p * d + q];
        const double sv = prev.s[p * d + q];
        row_acc += g * sv * b[q];
        z_cols[q] += inv_bp * g * sv;
      }
      z[p] = row_acc;
    }
    for (std::size_t m = 0; m < d; ++m) {
      const double inv_bm = safe_inverse(b[m]);
      z[m] = -z[m] * inv_bm * inv_bm + z_cols[m];
    }
    load_partials(prev);
    for (std::size_t p = 0; p < d; ++p) {
      const double inv_bp = safe_inverse(b[p]);
      const double row_term = x[p] * z[p];
      for (std::size_t q = 0; q < d; ++q) {
        grad[p * d + q] = inv_bp * grad[p * d + q] * b[q] + row_term + y[q] * z[q];
      }
    }
  }
  for (std::size_t e = 0; e < d * d; ++e) grad[e] = 2.0 * grad[e] * w[e];
  out.gradient = std::move(grad);
  return out;
}

}  // namespace least::detail
