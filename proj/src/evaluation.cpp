#include "least/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <thread>

#include "least/errors.hpp"

namespace least {

EvalReport compare_graphs(const SparseMatrix& predicted, const SparseMatrix& truth) {
  if (!predicted.is_square() || predicted.rows() != truth.rows() ||
      predicted.cols() != truth.cols()) {
    throw ShapeError("compare_graphs: predicted and truth must be square of the same size");
  }
  const Index d = truth.rows();
  auto reject_diagonal = [d](const SparseMatrix& m, const char* name) {
    for (Index i = 0; i < d; ++i) {
      if (m.contains(i, i)) {
        throw std::invalid_argument(std::string("compare_graphs: ") + name + " has a self-loop");
      }
    }
  };
  reject_diagonal(predicted, "predicted");
  reject_diagonal(truth, "truth");

  EvalReport r;
  r.predicted_edges = predicted.nnz();
  r.truth_edges = truth.nnz();
  for (Index i = 0; i < d; ++i) {
    for (Index j : predicted.row_cols(i)) {
      if (truth.contains(i, j)) {
        ++r.true_positive_edges;
      } else if (truth.contains(j, i)) {
        ++r.reversed;
      } else {
        ++r.false_positive;
      }
    }
    for (Index j : truth.row_cols(i)) {
      if (!predicted.contains(i, j) && !predicted.contains(j, i)) ++r.missing;
    }
  }
  r.false_negative = r.truth_edges - r.true_positive_edges;
  const double tp = static_cast<double>(r.true_positive_edges);
  const double denom = 2.0 * tp + static_cast<double>(r.false_positive + r.reversed +
                                                      r.false_negative);
  r.f1 = denom == 0.0 ? 1.0 : 2.0 * tp / denom;
  r.shd = r.missing + r.false_positive + r.reversed;
  const double wrong = static_cast<double>(r.reversed + r.false_positive);
  r.fdr = wrong / static_cast<double>(std::max<std::size_t>(r.predicted_edges, 1));
  r.tpr = tp / static_cast<double>(std::max<std::size_t>(r.truth_edges, 1));
  const std::size_t pairs = static_cast<std::size_t>(d) * (d == 0 ? 0 : d - 1);
  r.fpr = wrong / static_cast<double>(std::max<std::size_t>(pairs - r.truth_edges, 1));
  return r;
}

std::optional<double> auc_roc(const SparseMatrix& w, const SparseMatrix& truth) {
  if (!w.is_square() || w.rows() != truth.rows() || w.cols() != truth.cols()) {
    throw ShapeError("auc_roc: w and truth must be square of the same size");
  }
  const Index d = truth.rows();
  const std::size_t pairs = static_cast<std::size_t>(d) * (d == 0 ? 0 : d - 1);
  std::size_t positives = 0;
  for (Index i = 0; i < d; ++i)
    for (Index j : truth.row_cols(i))
      if (j != i) ++positives;
  const std::size_t negatives = pairs - positives;
  if (positives == 0 || negatives == 0) return std::nullopt;

  // Only stored off-diagonal entries can score above zero; every other pair
  // ties at zero and shares one midrank.
  struct Scored {
    double score;
    bool positive;
  };
  std::vector<Scored> scored;
  std::size_t stored_positive = 0;
  for (Index i = 0; i < d; ++i) {
    const auto cols = w.row_cols(i);
    const auto vals = w.row_values(i);
    for (std::size_t e = 0; e < cols.size(); ++e) {
      if (cols[e] == i) continue;
      const bool pos = truth.contains(i, cols[e]);
      scored.push_back({std::abs(vals[e]), pos});
      stored_positive += pos ? 1 : 0;
    }
  }
  const std::size_t zero_block = pairs - scored.size();
  const std::size_t zero_positive = positives - stored_positive;
  std::sort(scored.begin(), scored.end(),
            [](const Scored& a, const Scored& b) { return a.score < b.score; });

  // Ranks are 1-based over all pairs, ascending. Stored zeros join the zero block.
  std::size_t leading_zeros = 0, leading_zero_pos = 0;
  while (leading_zeros < scored.size() && scored[leading_zeros].score == 0.0) {
    leading_zero_pos += scored[leading_zeros].positive ? 1 : 0;
    ++leading_zeros;
  }
  const double zeros = static_cast<double>(zero_block + leading_zeros);
  double rank_sum = static_cast<double>(zero_positive + leading_zero_pos) * (zeros + 1.0) / 2.0;
  std::size_t pos = leading_zeros;
  double next_rank = zeros + 1.0;
  while (pos < scored.size()) {
    std::size_t end = pos;
    std::size_t tied_pos = 0;
    while (end < scored.size() && scored[end].score == scored[pos].score) {
      tied_pos += scored[end].positive ? 1 : 0;
      ++end;
    }
    const double count = static_cast<double>(end - pos);
    rank_sum += static_cast<double>(tied_pos) * (next_rank + (count - 1.0) / 2.0);
    next_rank += count;
    pos = end;
  }
  const double p = static_cast<double>(positives);
  const double n = static_cast<double>(negatives);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * n);
}

std::optional<double> pearson(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw ShapeError("pearson: series lengths differ");
  const std::size_t n = a.size();
  if (n < 3) return std::nullopt;
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return std::nullopt;
  return sab / std::sqrt(saa * sbb);
}

std::optional<double> trace_correlation(const std::vector<OuterRecord>& trace) {
  std::vector<double> bounds, hs;
  for (const auto& rec : trace) {
    if (!rec.h) continue;
    bounds.push_back(rec.bound);
    hs.push_back(*rec.h);
  }
  return pearson(bounds, hs);
}

const std::vector<double>& benchmark_epsilon_grid() {
  static const std::vector<double> grid{1e-1, 1e-2, 1e-3, 1e-4};
  return grid;
}

const std::vector<double>& benchmark_tau_grid() {
  static const std::vector<double> grid{0.1, 0.2, 0.3, 0.4, 0.5};
  return grid;
}

GridResult grid_search(const DenseMatrix& x, const SparseMatrix& truth, const LearnConfig& cfg_base,
                       const std::vector<double>& eps_grid, const std::vector<double>& tau_grid,
                       unsigned jobs) {
  if (eps_grid.empty() || tau_grid.empty()) {
    throw std::invalid_argument("grid_search: grids must be non-empty");
  }
  if (truth.rows() != x.cols()) throw ShapeError("grid_search: truth size differs from data");

  GridResult out;
  out.learns.resize(eps_grid.size());
  std::vector<std::exception_ptr> errors(eps_grid.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t e = next++; e < eps_grid.size(); e = next++) {
      try {
        LearnConfig cfg = cfg_base;
        cfg.epsilon = eps_grid[e];
        out.learns[e] = learn(x, cfg);
      } catch (...) {
        errors[e] = std::current_exception();
      }
    }
  };
  const unsigned threads =
      std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(eps_grid.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& err : errors)
    if (err) std::rethrow_exception(err);

  const GridCell* best = nullptr;
  std::size_t best_index = 0;
  for (std::size_t e = 0; e < eps_grid.size(); ++e) {
    for (double tau : tau_grid) {
      GridCell cell{eps_grid[e], tau, compare_graphs(post_threshold(out.learns[e].w, tau), truth)};
      out.cells.push_back(cell);
    }
  }
  for (std::size_t c = 0; c < out.cells.size(); ++c) {
    const GridCell& cell = out.cells[c];
    const bool better =
        best == nullptr || cell.report.f1 > best->report.f1 ||
        (cell.report.f1 == best->report.f1 &&
         (cell.report.shd < best->report.shd ||
          (cell.report.shd == best->report.shd && cell.tau < best->tau)));
    if (better) {
      best = &cell;
      best_index = c;
    }
  }
  const std::size_t e = best_index / tau_grid.size();
  out.best_w = post_threshold(out.learns[e].w, best->tau);
  out.best = best->report;
  out.best.best_epsilon = best->epsilon;
  out.best.best_tau = best->tau;
  out.best.auc_roc = auc_roc(out.learns[e].w, truth);
  return out;
}

}  // namespace least
