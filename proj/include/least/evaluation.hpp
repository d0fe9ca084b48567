#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "least/dense.hpp"
#include "least/learner.hpp"
#include "least/sparse.hpp"

namespace least {

/// Directed-edge comparison of a predicted graph against the truth.
///  - true_positive: same edge, same direction
///  - reversed: predicted i->j where the truth has j->i only
///  - false_positive: predicted edge absent from the truth in both directions
///  - false_negative: truth edges not matched with the same direction
///    (a reversed edge therefore also counts here)
///  - missing: truth edges absent from the prediction in both directions
struct EvalReport {
  std::size_t predicted_edges = 0;
  std::size_t truth_edges = 0;
  std::size_t true_positive_edges = 0;
  std::size_t reversed = 0;
  std::size_t false_positive = 0;
  std::size_t false_negative = 0;
  std::size_t missing = 0;
  double f1 = 0.0;   // 2TP / (2TP + FP + reversed + FN)
  std::size_t shd = 0;  // missing + FP + reversed
  double fdr = 0.0;  // (reversed + FP) / max(predicted, 1)
  double tpr = 0.0;  // TP / max(truth, 1)
  double fpr = 0.0;  // (reversed + FP) / max(d(d-1) - truth, 1)
  std::optional<double> auc_roc;
  std::optional<double> best_epsilon;
  std::optional<double> best_tau;
};

/// Compares the stored positions of two d x d patterns (values are ignored).
/// Throws ShapeError on a size mismatch and std::invalid_argument on a
/// diagonal entry.
EvalReport compare_graphs(const SparseMatrix& predicted, const SparseMatrix& truth);

/// Area under the ROC curve scoring every ordered pair i != j by |W[i,j]|
/// against the directed truth, by the rank-sum formula with midranks. Empty
/// when the truth has no edges or every pair is an edge.
std::optional<double> auc_roc(const SparseMatrix& w, const SparseMatrix& truth);

/// Pearson correlation of the paired series; empty when fewer than 3 points
/// or either series has zero variance.
std::optional<double> pearson(const std::vector<double>& a, const std::vector<double>& b);

/// Pearson(bound, h) over the trace points where h was recorded.
std::optional<double> trace_correlation(const std::vector<OuterRecord>& trace);

const std::vector<double>& benchmark_epsilon_grid();  // 1e-1 .. 1e-4
const std::vector<double>& benchmark_tau_grid();      // 0.1 .. 0.5

struct GridCell {
  double epsilon = 0.0;
  double tau = 0.0;
  EvalReport report;
};

struct GridResult {
  EvalReport best;                 // with best_epsilon / best_tau set
  SparseMatrix best_w;             // learned W of the best cell after thresholding
  std::vector<GridCell> cells;     // epsilon-major, tau-minor
  std::vector<LearnResult> learns; // one per epsilon, in grid order
};

/// One learn per epsilon (with cfg_base otherwise unchanged), each result
/// thresholded at every tau. The best cell has the highest F1, then the
/// smallest SHD, then the smallest tau, then the earliest epsilon. Learns run
/// on up to `jobs` threads; results do not depend on `jobs`.
GridResult grid_search(const DenseMatrix& x, const SparseMatrix& truth, const LearnConfig& cfg_base,
                       const std::vector<double>& eps_grid, const std::vector<double>& tau_grid,
                       unsigned jobs = 1);

}  // namespace least
