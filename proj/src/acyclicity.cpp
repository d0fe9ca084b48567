#include "least/acyclicity.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "bound_detail.hpp"
#include "least/errors.hpp"

namespace least {

void BoundConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw DomainError("alpha must lie in [0, 1], got " + std::to_string(alpha));
  }
}

std::size_t BoundTrace::storage_bytes() const {
  std::size_t total = levels.capacity() * sizeof(BoundLevel);
  for (const auto& level : levels) {
    total += level.s.storage_bytes();
    total += (level.rows.capacity() + level.cols.capacity() + level.b.capacity()) * sizeof(double);
  }
  return total;
}

BoundTrace forward_bound(const SparseMatrix& w, const BoundConfig& cfg) {
  cfg.validate();
  if (!w.is_square()) throw ShapeError("forward_bound: W must be square");

  BoundTrace trace;
  trace.config = cfg;
  trace.dim = w.rows();
  trace.levels.reserve(cfg.k + 1);

  SparseMatrix s = hadamard(w, w);
  s.compress();
  for (unsigned j = 0; j <= cfg.k; ++j) {
    BoundLevel level;
    level.rows = row_sums(s);
    level.cols = col_sums(s);
    level.b.resize(trace.dim);
    for (Index i = 0; i < trace.dim; ++i) {
      level.b[i] = detail::balance(level.rows[i], level.cols[i], cfg.alpha);
    }
    SparseMatrix next;
    if (j < cfg.k) {
      DenseVector inv_b(trace.dim);
      for (Index i = 0; i < trace.dim; ++i) inv_b[i] = safe_inverse(level.b[i]);
      next = scale_rows_cols(s, inv_b, level.b);
      next.compress();
    }
    level.s = std::move(s);
    trace.levels.push_back(std::move(level));
    s = std::move(next);
  }

  double bound = 0.0;
  for (double v : trace.levels.back().b) bound += v;
  trace.bound = bound;
  return trace;
}

namespace {

void check_trace(const BoundTrace& trace, const SparseMatrix& w, const BoundConfig& cfg) {
  if (!(trace.config == cfg)) {
    throw std::invalid_argument("bound trace was computed with a different k or alpha");
  }
  if (!w.is_square() || w.rows() != trace.dim || trace.levels.size() != cfg.k + 1) {
    throw std::invalid_argument("bound trace does not match W");
  }
}

}  // namespace

SparseMatrix backward_gradient(const BoundTrace& trace, const SparseMatrix& w,
                               const BoundConfig& cfg) {
  check_trace(trace, w, cfg);
  const Index d = trace.dim;
  const double alpha = cfg.alpha;
  const auto offsets = w.row_offsets();
  const auto w_cols = w.col_indices();

  // grad holds the masked gradient with respect to S^(j), aligned to W's
  // pattern; every S^(j) pattern is a subset of it.
  std::vector<double> grad(w.nnz());
  DenseVector x(d), y(d), z(d), z_cols(d);

  auto load_partials = [&](const BoundLevel& level) {
    for (Index i = 0; i < d; ++i) {
      x[i] = detail::d_balance_d_row(level.rows[i], level.cols[i], level.b[i], alpha);
      y[i] = detail::d_balance_d_col(level.rows[i], level.cols[i], level.b[i], alpha);
    }
  };

  load_partials(trace.levels[cfg.k]);
  for (Index p = 0; p < d; ++p) {
    for (Index e = offsets[p]; e < offsets[p + 1]; ++e) grad[e] = x[p] + y[w_cols[e]];
  }

  for (unsigned j = cfg.k; j >= 1; --j) {
    const BoundLevel& prev = trace.levels[j - 1];
    const auto& b = prev.b;
    std::fill(z.begin(), z.end(), 0.0);
    std::fill(z_cols.begin(), z_cols.end(), 0.0);

    for (Index p = 0; p < d; ++p) {
      const auto s_cols = prev.s.row_cols(p);
      const auto s_vals = prev.s.row_values(p);
      const double inv_bp = safe_inverse(b[p]);
      double row_acc = 0.0;
      std::size_t t = 0;
      for (Index e = offsets[p]; e < offsets[p + 1] && t < s_cols.size(); ++e) {
        if (w_cols[e] != s_cols[t]) continue;
        const Index q = s_cols[t];
        const double g = grad[e];
        const double s = s_vals[t];
        row_acc += g * s * b[q];
        z_cols[q] += inv_bp * g * s;
        ++t;
      }
      z[p] = row_acc;
    }
    for (Index m = 0; m < d; ++m) {
      const double inv_bm = safe_inverse(b[m]);
      z[m] = -z[m] * inv_bm * inv_bm + z_cols[m];
    }

    load_partials(prev);
    for (Index p = 0; p < d; ++p) {
      const double inv_bp = safe_inverse(b[p]);
      const double row_term = x[p] * z[p];
      for (Index e = offsets[p]; e < offsets[p + 1]; ++e) {
        const Index q = w_cols[e];
        grad[e] = inv_bp * grad[e] * b[q] + row_term + y[q] * z[q];
      }
    }
  }

  const auto w_vals = w.values();
  for (std::size_t e = 0; e < grad.size(); ++e) grad[e] = 2.0 * grad[e] * w_vals[e];
  return SparseMatrix(d, d, std::vector<Index>(offsets.begin(), offsets.end()),
                      std::vector<Index>(w_cols.begin(), w_cols.end()), std::move(grad));
}

namespace {

Eigen::MatrixXd dense_square(const SparseMatrix& w, std::size_t guard, const char* who) {
  if (!w.is_square()) throw ShapeError(std::string(who) + ": W must be square");
  if (w.rows() > guard) {
    throw GuardError(std::string(who) + ": d=" + std::to_string(w.rows()) +
                     " exceeds dense guard " + std::to_string(guard));
  }
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(w.rows(), w.cols());
  for (Index i = 0; i < w.rows(); ++i) {
    const auto c = w.row_cols(i);
    const auto v = w.row_values(i);
    for (std::size_t e = 0; e < c.size(); ++e) s(i, c[e]) = v[e] * v[e];
  }
  return s;
}

}  // namespace

double h_exact(const SparseMatrix& w, std::size_t guard) {
  Eigen::MatrixXd a = dense_square(w, guard, "h_exact");
  if (a.rows() == 0) return 0.0;
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  a /= std::ldexp(1.0, squarings);

  // f tracks exp(A) - I so that small traces keep full relative precision.
  Eigen::MatrixXd term = a;
  Eigen::MatrixXd f = a;
  for (int m = 2; m <= 30; ++m) {
    term = (term * a) / static_cast<double>(m);
    f += term;
    const double term_norm = term.cwiseAbs().maxCoeff();
    if (term_norm == 0.0 || term_norm <= 1e-18 * f.cwiseAbs().maxCoeff()) break;
  }
  for (int i = 0; i < squarings; ++i) {
    // exp(2A) - I = (F + I)^2 - I = F^2 + 2F
    f = (f * f + 2.0 * f).eval();
  }
  return f.trace();
}

double g_exact(const SparseMatrix& w, std::size_t guard) {
  Eigen::MatrixXd base = dense_square(w, guard, "g_exact");
  const auto d = static_cast<std::size_t>(base.rows());
  if (d == 0) return 0.0;
  // Both result and base are stored minus the identity: (I+R)(I+B) - I = R + B + RB.
  Eigen::MatrixXd result = Eigen::MatrixXd::Zero(base.rows(), base.cols());
  std::size_t e = d;
  while (e > 0) {
    if (e & 1U) result = (result + base + result * base).eval();
    e >>= 1U;
    if (e > 0) base = (2.0 * base + base * base).eval();
    if (!result.allFinite() || !base.allFinite()) {
      return std::numeric_limits<double>::infinity();
    }
  }
  const double tr = result.trace();
  return std::isfinite(tr) ? tr : std::numeric_limits<double>::infinity();
}

namespace {

// Iterative Tarjan; returns component id per node.
std::vector<Index> strongly_connected_components(const SparseMatrix& s, Index& count) {
  const Index n = s.rows();
  constexpr Index kUnvisited = std::numeric_limits<Index>::max();
  std::vector<Index> index(n, kUnvisited), low(n, 0), comp(n, kUnvisited);
  std::vector<bool> on_stack(n, false);
  std::vector<Index> stack;
  std::vector<std::pair<Index, Index>> call;  // (node, next edge offset)
  Index next_index = 0;
  count = 0;
  const auto offsets = s.row_offsets();
  const auto cols = s.col_indices();
  for (Index root = 0; root < n; ++root) {
    if (index[root] != kUnvisited) continue;
    call.push_back({root, offsets[root]});
    index[root] = low[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      auto& [v, edge] = call.back();
      if (edge < offsets[v + 1]) {
        const Index u = cols[edge++];
        if (index[u] == kUnvisited) {
          index[u] = low[u] = next_index++;
          stack.push_back(u);
          on_stack[u] = true;
          call.push_back({u, offsets[u]});
        } else if (on_stack[u]) {
          low[v] = std::min(low[v], index[u]);
        }
        continue;
      }
      const Index finished = v;
      call.pop_back();
      if (!call.empty()) {
        const Index parent = call.back().first;
        low[parent] = std::min(low[parent], low[finished]);
      }
      if (low[finished] == index[finished]) {
        Index member = 0;
        do {
          member = stack.back();
          stack.pop_back();
          on_stack[member] = false;
          comp[member] = count;
        } while (member != finished);
        ++count;
      }
    }
  }
  return comp;
}

}  // namespace

SpectralRadius spectral_radius_nonnegative(const SparseMatrix& s_in, std::size_t guard) {
  if (!s_in.is_square()) throw ShapeError("spectral radius: matrix must be square");
  if (s_in.rows() > guard) {
    throw GuardError("spectral radius: d=" + std::to_string(s_in.rows()) +
                     " exceeds dense guard " + std::to_string(guard));
  }
  for (double v : s_in.values()) {
    if (v < 0.0) throw DomainError("spectral radius: matrix must be non-negative");
  }
  const SparseMatrix s = s_in.compressed();
  const Index n = s.rows();
  Index n_comp = 0;
  const auto comp = strongly_connected_components(s, n_comp);

  std::vector<std::vector<Index>> members(n_comp);
  for (Index i = 0; i < n; ++i) members[comp[i]].push_back(i);

  SpectralRadius out;
  std::vector<double> v(n, 0.0), av(n, 0.0);
  for (Index c = 0; c < n_comp; ++c) {
    const auto& nodes = members[c];
    if (nodes.size() == 1) {
      out.value = std::max(out.value, s.at(nodes[0], nodes[0]));
      continue;
    }
    double sigma = 0.0;
    for (Index i : nodes) {
      double row = 0.0;
      const auto cols = s.row_cols(i);
      const auto vals = s.row_values(i);
      for (std::size_t e = 0; e < cols.size(); ++e) {
        if (comp[cols[e]] == c) row += vals[e];
      }
      sigma = std::max(sigma, row);
    }
    out.shift = std::max(out.shift, sigma);

    const double start = 1.0 / std::sqrt(static_cast<double>(nodes.size()));
    for (Index i : nodes) v[i] = start;
    double estimate = 0.0;
    bool converged = false;
    unsigned it = 0;
    for (; it < 10000; ++it) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = 0.0;
      double norm2 = 0.0;
      for (Index i : nodes) {
        double acc = sigma * v[i];
        const auto cols = s.row_cols(i);
        const auto vals = s.row_values(i);
        for (std::size_t e = 0; e < cols.size(); ++e) {
          if (comp[cols[e]] == c) acc += vals[e] * v[cols[e]];
        }
        av[i] = acc;
        const double ratio = acc / v[i];
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
        norm2 += acc * acc;
      }
      estimate = 0.5 * (lo + hi) - sigma;
      if (hi - lo <= 1e-10 * hi) {
        converged = true;
        break;
      }
      const double inv_norm = 1.0 / std::sqrt(norm2);
      for (Index i : nodes) v[i] = av[i] * inv_norm;
    }
    out.iterations = std::max(out.iterations, it);
    out.converged = out.converged && converged;
    out.value = std::max(out.value, estimate);
  }
  return out;
}

SpectralRadius spectral_radius_dense(const SparseMatrix& w, std::size_t guard) {
  return spectral_radius_nonnegative(hadamard(w, w), guard);
}

ConsistencyThresholds consistency_thresholds(double epsilon, std::size_t d, double alpha) {
  if (!(epsilon > 0.0)) throw DomainError("consistency_thresholds: epsilon must be positive");
  if (d < 2) throw DomainError("consistency_thresholds: d must be at least 2");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError("consistency_thresholds: alpha must lie in (0, 1)");
  }
  const double dd = static_cast<double>(d);
  ConsistencyThresholds out;
  out.h_threshold = std::log(epsilon / dd + 1.0);
  out.g_threshold = (1.0 / alpha) * (std::log(epsilon / (dd * dd)) / std::log(dd));
  return out;
}

}  // namespace least
