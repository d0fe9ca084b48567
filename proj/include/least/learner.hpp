#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "least/acyclicity.hpp"
#include "least/dense.hpp"
#include "least/sparse.hpp"

namespace least {

enum class EngineKind { kDense, kSparse };

std::string to_string(EngineKind engine);
EngineKind parse_engine(const std::string& name);

/// Hyperparameters of the outer augmented-Lagrangian loop and the inner
/// first-order loop.
struct LearnConfig {
  double zeta = 1e-4;       // initialisation density
  double lambda = 0.5;      // L1 weight
  double epsilon = 1e-4;    // stop once the bound is <= epsilon
  unsigned k = 5;
  double alpha = 0.9;
  std::size_t batch_size = 0;  // 0 selects min(n, 1000)
  double theta = 0.0;          // in-loop filter threshold
  unsigned t_outer = 1000;
  unsigned t_inner = 200;
  double lr = 0.01;
  double rho_init = 1.0;
  double eta_init = 1.0;
  double rho_growth = 10.0;
  double rho_max = 1e16;
  std::uint64_t seed = 0;
  EngineKind engine = EngineKind::kSparse;
  /// Reuse the previous outer solution instead of re-initialising every round.
  bool warm_start = true;
  /// Record h(W) next to the bound in the outer trace (d <= kDenseGuard).
  bool oracle_trace = false;
  /// Stop once h(W) <= epsilon instead of bound <= epsilon. Computes h after
  /// every outer round, so it needs d <= kDenseGuard.
  bool stop_on_h = false;

  /// A position outside supp(W) enters the candidate support when the
  /// magnitude of its least-squares gradient reaches this value. Negative
  /// selects lambda.
  double grow_threshold = -1.0;
  /// Scan for new positions every this many inner iterations (>= 1).
  unsigned grow_interval = 1;
  /// Columns per block in the candidate scan.
  std::size_t grow_block = 256;

  /// Inner loop stops when the objective changes by less than
  /// inner_tolerance (relative) over inner_window iterations.
  double inner_tolerance = 1e-6;
  unsigned inner_window = 10;

  void validate() const;
  BoundConfig bound_config() const { return {k, alpha}; }
  double effective_grow_threshold() const { return grow_threshold < 0.0 ? lambda : grow_threshold; }
  std::size_t effective_batch(std::size_t n) const;
};

struct OuterRecord {
  unsigned iteration = 0;
  double bound = 0.0;
  std::optional<double> h;
  double loss = 0.0;       // least-squares + L1 on the last batch of the inner solve
  double objective = 0.0;  // augmented objective on that batch
  double rho = 0.0;        // penalty used by this inner solve
  double eta = 0.0;        // multiplier used by this inner solve
  std::size_t nnz = 0;
  unsigned inner_iterations = 0;
  double seconds = 0.0;    // wall time since the start of the run
};

struct LearnResult {
  SparseMatrix w;
  std::vector<OuterRecord> trace;
  bool converged = false;
  unsigned outer_iterations = 0;
  double seconds = 0.0;
};

struct LossAndGradient {
  double loss = 0.0;
  SparseMatrix grad;  // on candidate_support's pattern
};

/// (1/B)||X - XW||_F^2 + lambda * sum|W| and its gradient on the positions of
/// candidate_support: (2/B) X[:,i]^T (XW - X)[:,j] + lambda * sign(W[i,j]),
/// with sign(0) = 0. The residual is materialised once (B x d).
LossAndGradient loss_and_grad(const SparseMatrix& w, const DenseMatrix& x_batch, double lambda,
                              const SparseMatrix& candidate_support);

/// Augmented objective L + (rho/2) * bound^2 + eta * bound.
double augmented_objective(double loss, double bound, double rho, double eta);
/// Factor applied to the bound gradient when assembling the objective gradient:
/// rho + bound.
double bound_gradient_factor(double bound, double rho);

struct InnerResult {
  SparseMatrix w;
  double bound = 0.0;       // bound of the returned W
  double loss = 0.0;
  double objective = 0.0;
  unsigned iterations = 0;
};

/// Minimises the augmented objective for fixed (rho, eta) with Adam, starting
/// from w_init. `stream` selects the batch-sampling stream so successive outer
/// rounds see different batches.
InnerResult inner(const DenseMatrix& x, const LearnConfig& cfg, double rho, double eta,
                  const SparseMatrix& w_init, std::uint64_t stream = 0);

using ProgressFn = std::function<void(const OuterRecord&)>;

/// Outer loop: inner solve, eta += rho * bound, rho *= rho_growth (capped at
/// rho_max), until bound <= epsilon (h <= epsilon with stop_on_h) or t_outer
/// rounds. Non-convergence is reported through LearnResult::converged, not an
/// exception.
LearnResult learn(const DenseMatrix& x, const LearnConfig& cfg, const ProgressFn& progress = {});

/// Evaluation-time filter: drops entries with |value| < tau.
SparseMatrix post_threshold(const SparseMatrix& w, double tau);

}  // namespace least
