#include "least/optimizer.hpp"

#include <cmath>
#include <stdexcept>

#include "least/errors.hpp"
#include "least/rng.hpp"

namespace least {

AdamState AdamState::for_weights(const SparseMatrix& w, double lr) {
  AdamState state;
  state.lr = lr;
  state.m = w;
  state.v = w;
  std::fill(state.m.values().begin(), state.m.values().end(), 0.0);
  std::fill(state.v.values().begin(), state.v.values().end(), 0.0);
  return state;
}

SparseMatrix glorot_sparse_init(Index d, double density, std::uint64_t seed) {
  if (!(density > 0.0 && density <= 1.0)) {
    throw DomainError("glorot_sparse_init: density must lie in (0, 1]");
  }
  Rng rng(seed, Stream::kInit);
  const double limit = std::sqrt(6.0 / (2.0 * static_cast<double>(d)));
  std::vector<Triplet> triplets;
  if (d < 2) return SparseMatrix(d, d);
  // Walk the d*(d-1) off-diagonal slots row by row; slot s of row i maps to
  // column s if s < i, else s+1.
  const std::uint64_t per_row = d - 1;
  const std::uint64_t total = static_cast<std::uint64_t>(d) * per_row;
  std::uint64_t slot = rng.geometric(density);
  while (slot < total) {
    const auto i = static_cast<Index>(slot / per_row);
    auto j = static_cast<Index>(slot % per_row);
    if (j >= i) ++j;
    triplets.push_back({i, j, 0.0});
    const std::uint64_t skip = rng.geometric(density);
    if (skip >= total) break;
    slot += skip + 1;
  }
  for (auto& t : triplets) t.value = rng.uniform(-limit, limit);
  return SparseMatrix::from_triplets(d, d, std::move(triplets));
}

namespace {

SparseMatrix carry_over(const SparseMatrix& old_values, const SparseMatrix& pattern) {
  SparseMatrix out = pattern;
  auto vals = out.values();
  for (Index i = 0; i < pattern.rows(); ++i) {
    const auto new_cols = pattern.row_cols(i);
    const Index base = pattern.row_offsets()[i];
    std::span<const Index> old_cols;
    std::span<const double> old_vals;
    if (i < old_values.rows()) {
      old_cols = old_values.row_cols(i);
      old_vals = old_values.row_values(i);
    }
    std::size_t t = 0;
    for (std::size_t e = 0; e < new_cols.size(); ++e) {
      while (t < old_cols.size() && old_cols[t] < new_cols[e]) ++t;
      vals[base + e] = (t < old_cols.size() && old_cols[t] == new_cols[e]) ? old_vals[t] : 0.0;
    }
  }
  return out;
}

}  // namespace

void resync_moments(AdamState& state, const SparseMatrix& w) {
  if (state.m.same_pattern(w) && state.v.same_pattern(w)) return;
  state.m = carry_over(state.m, w);
  state.v = carry_over(state.v, w);
}

void adam_step(AdamState& state, SparseMatrix& w, const SparseMatrix& grad) {
  if (!state.m.same_pattern(w) || !state.v.same_pattern(w)) {
    throw std::logic_error("adam_step: moments are not on the weight pattern");
  }
  if (grad.rows() != w.rows() || grad.cols() != w.cols()) {
    throw std::logic_error("adam_step: gradient shape differs from weights");
  }
  ++state.t;
  const double b1 = state.beta1;
  const double b2 = state.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
  auto wv = w.values();
  auto mv = state.m.values();
  auto vv = state.v.values();
  const bool aligned = grad.same_pattern(w);
  const auto gv_all = grad.values();

  for (Index i = 0; i < w.rows(); ++i) {
    const auto w_cols = w.row_cols(i);
    const Index base = w.row_offsets()[i];
    const auto g_cols = grad.row_cols(i);
    const auto g_vals = grad.row_values(i);
    std::size_t t = 0;
    for (std::size_t e = 0; e < w_cols.size(); ++e) {
      double g = 0.0;
      if (aligned) {
        g = gv_all[base + e];
      } else {
        if (t < g_cols.size() && g_cols[t] < w_cols[e]) {
          throw std::logic_error("adam_step: gradient entry outside the weight support");
        }
        if (t < g_cols.size() && g_cols[t] == w_cols[e]) g = g_vals[t++];
      }
      const std::size_t k = base + e;
      mv[k] = b1 * mv[k] + (1.0 - b1) * g;
      vv[k] = b2 * vv[k] + (1.0 - b2) * g * g;
      const double m_hat = mv[k] / correction1;
      const double v_hat = vv[k] / correction2;
      wv[k] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps_hat);
    }
    if (!aligned && t < g_cols.size()) {
      throw std::logic_error("adam_step: gradient entry outside the weight support");
    }
  }
}

SparseMatrix threshold_filter(const SparseMatrix& w, double theta) {
  if (!(theta >= 0.0)) throw DomainError("threshold_filter: theta must be non-negative");
  if (theta == 0.0) return w;
  return drop_below(w, theta);
}

}  // namespace least
