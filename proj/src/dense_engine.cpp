// Dense-storage inner loop. Performs the same arithmetic as the sparse engine
// in the same order, so both engines follow the same trajectory; only the
// storage (d x d arrays plus a support mask) differs.

#include <cmath>
#include <cstdint>
#include <string>

#include "dense_bound.hpp"
#include "learner_detail.hpp"
#include "least/errors.hpp"

namespace least::detail {

InnerResult dense_inner(const DenseMatrix& x, const LearnConfig& cfg, double rho, double eta,
                        const SparseMatrix& w_init, std::uint64_t stream) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  if (d > kDenseGuard) {
    throw GuardError("dense engine: d=" + std::to_string(d) + " exceeds " +
                     std::to_string(kDenseGuard));
  }
  const BoundConfig bcfg = cfg.bound_config();
  const double grow = cfg.effective_grow_threshold();

  std::vector<double> w(d * d, 0.0), m(d * d, 0.0), v(d * d, 0.0), g_full(d * d, 0.0);
  std::vector<std::uint8_t> support(d * d, 0);
  for (Index i = 0; i < w_init.rows(); ++i) {
    const auto cols = w_init.row_cols(i);
    const auto vals = w_init.row_values(i);
    for (std::size_t e = 0; e < cols.size(); ++e) {
      w[i * d + cols[e]] = vals[e];
      support[i * d + cols[e]] = 1;
    }
  }

  BatchSampler sampler(n, cfg.effective_batch(n), cfg.seed, stream);
  ColumnBlock full_batch;
  if (sampler.full()) full_batch = gather_columns(x, {});

  std::uint64_t adam_t = 0;
  const double b1 = 0.9, b2 = 0.999, eps_hat = 1e-8;
  std::vector<double> history;
  InnerResult out;

  for (unsigned t = 0; t < cfg.t_inner; ++t) {
    const DenseBoundResult bound_res = dense_bound_and_gradient(w, d, bcfg);
    const double bound = bound_res.bound;

    const auto rows = sampler.next();
    ColumnBlock sampled;
    if (!sampler.full()) sampled = gather_columns(x, rows);
    const ColumnBlock& xb = sampler.full() ? full_batch : sampled;

    ColumnBlock r;
    r.rows = xb.rows;
    r.cols = xb.cols;
    r.data.resize(xb.data.size());
    for (std::size_t e = 0; e < xb.data.size(); ++e) r.data[e] = -xb.data[e];
    for (std::size_t j = 0; j < d; ++j) {
      auto rj = r.col(j);
      for (std::size_t i = 0; i < d; ++i) {
        const double wv = w[i * d + j];
        const auto xi = xb.col(i);
        for (std::size_t b = 0; b < r.rows; ++b) rj[b] += xi[b] * wv;
      }
    }
    double l1 = 0.0;
    for (double wv : w) l1 += std::abs(wv);
    const double loss = mean_squared_norm(r) + cfg.lambda * l1;
    const double objective = augmented_objective(loss, bound, rho, eta);
    check_finite(objective, "objective", t);

    const double scale = 2.0 / static_cast<double>(xb.rows);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        g_full[i * d + j] = i == j ? 0.0 : scale * dot(xb.col(i), r.col(j));
      }
    }

    const bool scan = t % cfg.grow_interval == 0;
    const double factor = bound_gradient_factor(bound, rho);
    ++adam_t;
    const double correction1 = 1.0 - std::pow(b1, static_cast<double>(adam_t));
    const double correction2 = 1.0 - std::pow(b2, static_cast<double>(adam_t));
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        const std::size_t k = i * d + j;
        double g = 0.0;
        if (support[k]) {
          g = g_full[k] + cfg.lambda * sign0(w[k]) + factor * bound_res.gradient[k];
        } else if (scan && i != j && std::abs(g_full[k]) >= grow) {
          support[k] = 1;
          g = g_full[k];  // W is 0 there: no L1 or bound term
        } else {
          continue;
        }
        check_finite(g, "gradient", t);
        m[k] = b1 * m[k] + (1.0 - b1) * g;
        v[k] = b2 * v[k] + (1.0 - b2) * g * g;
        const double m_hat = m[k] / correction1;
        const double v_hat = v[k] / correction2;
        w[k] -= cfg.lr * m_hat / (std::sqrt(v_hat) + eps_hat);
        if (std::abs(w[k]) < cfg.theta) {
          support[k] = 0;
          w[k] = m[k] = v[k] = 0.0;
        }
      }
    }

    history.push_back(objective);
    out.iterations = t + 1;
    out.loss = loss;
    out.objective = objective;
    if (window_converged(history, cfg.inner_window, cfg.inner_tolerance)) break;
  }

  std::vector<Triplet> triplets;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      if (support[i * d + j])
        triplets.push_back({static_cast<Index>(i), static_cast<Index>(j), w[i * d + j]});
  out.bound = dense_bound_and_gradient(w, d, bcfg, false).bound;
  out.w = SparseMatrix::from_triplets(static_cast<Index>(d), static_cast<Index>(d),
                                      std::move(triplets));
  return out;
}

}  // namespace least::detail
