#include "least/learner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "learner_detail.hpp"
#include "least/errors.hpp"
#include "least/optimizer.hpp"

namespace least {

namespace detail {

ColumnBlock gather_columns(const DenseMatrix& x, std::span<const std::size_t> rows) {
  ColumnBlock out;
  out.cols = x.cols();
  out.rows = rows.empty() ? x.rows() : rows.size();
  out.data.resize(out.rows * out.cols);
  for (std::size_t r = 0; r < out.rows; ++r) {
    const auto src = x.row(rows.empty() ? r : rows[r]);
    for (std::size_t c = 0; c < out.cols; ++c) out.data[c * out.rows + r] = src[c];
  }
  return out;
}

BatchSampler::BatchSampler(std::size_t n, std::size_t batch, std::uint64_t seed,
                           std::uint64_t stream)
    : n_(n), batch_(std::min(batch, n)), rng_(seed, Stream::kBatch, stream) {
  if (!full()) {
    perm_.resize(n_);
    std::iota(perm_.begin(), perm_.end(), std::size_t{0});
    chosen_.resize(batch_);
  }
}

std::span<const std::size_t> BatchSampler::next() {
  if (full()) return {};
  for (std::size_t i = 0; i < batch_; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng_.below(n_ - i));
    std::swap(perm_[i], perm_[j]);
    chosen_[i] = perm_[i];
  }
  std::sort(chosen_.begin(), chosen_.end());
  return chosen_;
}

double dot(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  double s = (s0 + s1) + (s2 + s3);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double mean_squared_norm(const ColumnBlock& r) {
  double acc = 0.0;
  for (double v : r.data) acc += v * v;
  return acc / static_cast<double>(r.rows);
}

bool window_converged(const std::vector<double>& history, unsigned window, double tol) {
  if (window == 0 || history.size() <= window) return false;
  const double now = history.back();
  const double then = history[history.size() - 1 - window];
  return std::abs(now - then) <= tol * std::abs(then);
}

void check_finite(double value, const char* what, unsigned iteration) {
  if (!std::isfinite(value)) {
    throw NumericError(std::string("non-finite ") + what + " at inner iteration " +
                       std::to_string(iteration));
  }
}

InnerResult dense_inner(const DenseMatrix& x, const LearnConfig& cfg, double rho, double eta,
                        const SparseMatrix& w_init, std::uint64_t stream);

namespace {

ColumnBlock residual(const ColumnBlock& xb, const SparseMatrix& w) {
  ColumnBlock r;
  r.rows = xb.rows;
  r.cols = xb.cols;
  r.data.resize(xb.data.size());
  for (std::size_t e = 0; e < xb.data.size(); ++e) r.data[e] = -xb.data[e];
  for (Index i = 0; i < w.rows(); ++i) {
    const auto cols = w.row_cols(i);
    const auto vals = w.row_values(i);
    const auto xi = xb.col(i);
    for (std::size_t e = 0; e < cols.size(); ++e) {
      auto rj = r.col(cols[e]);
      const double wv = vals[e];
      for (std::size_t b = 0; b < r.rows; ++b) rj[b] += xi[b] * wv;
    }
  }
  return r;
}

double l1_norm(const SparseMatrix& w) {
  double acc = 0.0;
  for (double v : w.values()) acc += std::abs(v);
  return acc;
}

// Positions outside supp(w) (and off the diagonal) whose least-squares
// gradient reaches `threshold`, scanned in blocks of columns. Returned in
// row-major order with their gradient values.
std::vector<Triplet> scan_candidates(const ColumnBlock& xb, const ColumnBlock& r,
                                     const SparseMatrix& w, double threshold,
                                     std::size_t block) {
  const Index d = w.rows();
  const double scale = 2.0 / static_cast<double>(xb.rows);
  std::vector<Triplet> found;
  block = std::max<std::size_t>(block, 1);
  for (std::size_t j0 = 0; j0 < d; j0 += block) {
    const auto j1 = static_cast<Index>(std::min<std::size_t>(d, j0 + block));
    for (Index i = 0; i < d; ++i) {
      const auto present = w.row_cols(i);
      auto it = std::lower_bound(present.begin(), present.end(), static_cast<Index>(j0));
      const auto xi = xb.col(i);
      for (auto j = static_cast<Index>(j0); j < j1; ++j) {
        if (it != present.end() && *it == j) {
          ++it;
          continue;
        }
        if (j == i) continue;
        const double g = scale * dot(xi, r.col(j));
        if (std::abs(g) >= threshold) found.push_back({i, j, g});
      }
    }
  }
  std::sort(found.begin(), found.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  return found;
}

InnerResult sparse_inner(const DenseMatrix& x, const LearnConfig& cfg, double rho, double eta,
                         const SparseMatrix& w_init, std::uint64_t stream) {
  const std::size_t n = x.rows();
  const auto d = static_cast<Index>(x.cols());
  const BoundConfig bcfg = cfg.bound_config();
  const double grow = cfg.effective_grow_threshold();

  BatchSampler sampler(n, cfg.effective_batch(n), cfg.seed, stream);
  ColumnBlock full_batch;
  if (sampler.full()) full_batch = gather_columns(x, {});

  SparseMatrix w = w_init;
  AdamState adam = AdamState::for_weights(w, cfg.lr);
  std::vector<double> history;
  InnerResult out;

  for (unsigned t = 0; t < cfg.t_inner; ++t) {
    const BoundTrace trace = forward_bound(w, bcfg);
    const double bound = trace.bound;
    const SparseMatrix bound_grad = backward_gradient(trace, w, bcfg);

    const auto rows = sampler.next();
    ColumnBlock sampled;
    if (!sampler.full()) sampled = gather_columns(x, rows);
    const ColumnBlock& xb = sampler.full() ? full_batch : sampled;
    const ColumnBlock r = residual(xb, w);
    const double loss = mean_squared_norm(r) + cfg.lambda * l1_norm(w);
    const double objective = augmented_objective(loss, bound, rho, eta);
    check_finite(objective, "objective", t);

    std::vector<Triplet> fresh;
    if (t % cfg.grow_interval == 0) fresh = scan_candidates(xb, r, w, grow, cfg.grow_block);

    // Merge supp(W) with the admitted positions and assemble the gradient.
    const double scale = 2.0 / static_cast<double>(xb.rows);
    const double factor = bound_gradient_factor(bound, rho);
    std::vector<Index> offsets(static_cast<std::size_t>(d) + 1, 0);
    std::vector<Index> cols;
    std::vector<double> values, grads;
    cols.reserve(w.nnz() + fresh.size());
    values.reserve(w.nnz() + fresh.size());
    grads.reserve(w.nnz() + fresh.size());
    std::size_t f = 0;
    for (Index i = 0; i < d; ++i) {
      const auto wc = w.row_cols(i);
      const auto wv = w.row_values(i);
      const auto gd = bound_grad.row_values(i);
      const auto xi = xb.col(i);
      std::size_t e = 0;
      while (e < wc.size() || (f < fresh.size() && fresh[f].row == i)) {
        const bool take_fresh =
            f < fresh.size() && fresh[f].row == i && (e == wc.size() || fresh[f].col < wc[e]);
        if (take_fresh) {
          cols.push_back(fresh[f].col);
          values.push_back(0.0);
          grads.push_back(fresh[f].value);  // W is 0 there: no L1 or bound term
          ++f;
        } else {
          const Index j = wc[e];
          const double smooth = scale * dot(xi, r.col(j));
          cols.push_back(j);
          values.push_back(wv[e]);
          grads.push_back(smooth + cfg.lambda * sign0(wv[e]) + factor * gd[e]);
          ++e;
        }
        check_finite(grads.back(), "gradient", t);
      }
      offsets[i + 1] = static_cast<Index>(cols.size());
    }
    SparseMatrix grad(d, d, offsets, cols, std::move(grads));
    SparseMatrix expanded(d, d, std::move(offsets), std::move(cols), std::move(values));

    resync_moments(adam, expanded);
    adam_step(adam, expanded, grad);
    w = threshold_filter(expanded, cfg.theta);
    resync_moments(adam, w);

    history.push_back(objective);
    out.iterations = t + 1;
    out.loss = loss;
    out.objective = objective;
    if (window_converged(history, cfg.inner_window, cfg.inner_tolerance)) break;
  }
  out.bound = forward_bound(w, bcfg).bound;
  out.w = std::move(w);
  return out;
}

}  // namespace
}  // namespace detail

std::string to_string(EngineKind engine) {
  return engine == EngineKind::kDense ? "dense" : "sparse";
}

EngineKind parse_engine(const std::string& name) {
  if (name == "dense") return EngineKind::kDense;
  if (name == "sparse") return EngineKind::kSparse;
  throw std::invalid_argument("unknown engine '" + name + "' (expected dense or sparse)");
}

void LearnConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument("invalid learn config: " + what);
  };
  require(zeta > 0.0 && zeta <= 1.0, "zeta must lie in (0, 1]");
  require(lambda >= 0.0, "lambda must be non-negative");
  require(epsilon > 0.0, "epsilon must be positive");
  require(alpha >= 0.0 && alpha <= 1.0, "alpha must lie in [0, 1]");
  require(theta >= 0.0, "theta must be non-negative");
  require(lr > 0.0, "lr must be positive");
  require(rho_init > 0.0, "rho_init must be positive");
  require(eta_init >= 0.0, "eta_init must be non-negative");
  require(rho_growth > 1.0, "rho_growth must exceed 1");
  require(rho_max >= rho_init, "rho_max must be at least rho_init");
  require(grow_interval >= 1, "grow_interval must be at least 1");
  require(grow_block >= 1, "grow_block must be at least 1");
  require(inner_tolerance >= 0.0, "inner_tolerance must be non-negative");
}

std::size_t LearnConfig::effective_batch(std::size_t n) const {
  return batch_size == 0 ? std::min<std::size_t>(n, 1000) : std::min(batch_size, n);
}

double augmented_objective(double loss, double bound, double rho, double eta) {
  return loss + 0.5 * rho * bound * bound + eta * bound;
}

double bound_gradient_factor(double bound, double rho) { return rho + bound; }

LossAndGradient loss_and_grad(const SparseMatrix& w, const DenseMatrix& x_batch, double lambda,
                              const SparseMatrix& candidate_support) {
  const std::size_t d = x_batch.cols();
  if (!w.is_square() || w.rows() != d || candidate_support.rows() != d ||
      candidate_support.cols() != d) {
    throw ShapeError("loss_and_grad: W, X and the candidate support must agree on d");
  }
  if (x_batch.rows() == 0) throw ShapeError("loss_and_grad: empty batch");
  const auto xb = detail::gather_columns(x_batch, {});
  const auto r = detail::residual(xb, w);
  LossAndGradient out;
  out.loss = detail::mean_squared_norm(r) + lambda * detail::l1_norm(w);
  out.grad = candidate_support;
  auto g = out.grad.values();
  const double scale = 2.0 / static_cast<double>(xb.rows);
  for (Index i = 0; i < candidate_support.rows(); ++i) {
    const auto cols = candidate_support.row_cols(i);
    const Index base = candidate_support.row_offsets()[i];
    for (std::size_t e = 0; e < cols.size(); ++e) {
      const Index j = cols[e];
      g[base + e] = scale * detail::dot(xb.col(i), r.col(j)) +
                    lambda * detail::sign0(w.at(i, j));
    }
  }
  return out;
}

InnerResult inner(const DenseMatrix& x, const LearnConfig& cfg, double rho, double eta,
                  const SparseMatrix& w_init, std::uint64_t stream) {
  cfg.validate();
  if (!w_init.is_square() || w_init.rows() != x.cols()) {
    throw ShapeError("inner: initial W must be d x d with d = number of columns of X");
  }
  if (x.rows() == 0) throw ShapeError("inner: no samples");
  if (cfg.t_inner == 0) {
    InnerResult out;
    out.w = w_init;
    out.bound = forward_bound(w_init, cfg.bound_config()).bound;
    return out;
  }
  if (cfg.engine == EngineKind::kDense) {
    return detail::dense_inner(x, cfg, rho, eta, w_init, stream);
  }
  return detail::sparse_inner(x, cfg, rho, eta, w_init, stream);
}

LearnResult learn(const DenseMatrix& x, const LearnConfig& cfg, const ProgressFn& progress) {
  cfg.validate();
  if (x.rows() < 2 || x.cols() < 2) {
    throw ShapeError("learn: need at least 2 samples and 2 variables");
  }
  const auto d = static_cast<Index>(x.cols());
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  LearnResult result;
  result.w = glorot_sparse_init(d, cfg.zeta, cfg.seed);
  double rho = cfg.rho_init;
  double eta = cfg.eta_init;
  if (cfg.stop_on_h && d > kDenseGuard) {
    throw GuardError("learn: stop_on_h needs d <= " + std::to_string(kDenseGuard));
  }
  const bool record_h = (cfg.oracle_trace && d <= kDenseGuard) || cfg.stop_on_h;

  for (unsigned outer = 0; outer < cfg.t_outer; ++outer) {
    SparseMatrix w_init = result.w;
    if (outer > 0 && !cfg.warm_start) {
      w_init = glorot_sparse_init(d, cfg.zeta, mix64(cfg.seed + outer));
    }
    InnerResult solved = inner(x, cfg, rho, eta, w_init, outer);

    OuterRecord rec;
    rec.iteration = outer;
    rec.bound = solved.bound;
    if (record_h) rec.h = h_exact(solved.w);
    rec.loss = solved.loss;
    rec.objective = solved.objective;
    rec.rho = rho;
    rec.eta = eta;
    rec.nnz = solved.w.nnz();
    rec.inner_iterations = solved.iterations;
    rec.seconds = elapsed();
    result.trace.push_back(rec);
    result.w = std::move(solved.w);
    if (progress) progress(rec);

    eta += rho * rec.bound;
    rho = std::min(rho * cfg.rho_growth, cfg.rho_max);
    const double measure = cfg.stop_on_h ? *rec.h : rec.bound;
    if (measure <= cfg.epsilon) {
      result.converged = true;
      break;
    }
  }
  result.outer_iterations = static_cast<unsigned>(result.trace.size());
  result.seconds = elapsed();
  return result;
}

SparseMatrix post_threshold(const SparseMatrix& w, double tau) {
  if (!(tau >= 0.0)) throw DomainError("post_threshold: tau must be non-negative");
  return drop_below(w, tau);
}

}  // namespace least
