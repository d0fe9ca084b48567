#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <iostream>
#include <limits>

#include "cli_support.hpp"
#include "least/acyclicity.hpp"
#include "least/datagen.hpp"
#include "least/dense.hpp"
#include "least/errors.hpp"
#include "least/evaluation.hpp"
#include "least/matrix_market.hpp"
#include "least/rng.hpp"

namespace least::cli {

namespace fs = std::filesystem;

int cmd_generate(const GenerateArgs& args, std::ostream& out, std::ostream& /*err*/) {
  const GraphModel model = parse_graph_model(args.model);
  const NoiseKind noise = parse_noise(args.noise);
  const double degree = args.degree.value_or(model == GraphModel::kErdosRenyi ? 2.0 : 4.0);
  const std::size_t n = args.n.value_or(10 * static_cast<std::size_t>(args.d));
  if (n == 0) throw std::invalid_argument("--n must be positive");
  const fs::path dir = resolve_out_dir(args.out_dir);
  Manifest manifest("generate", dir);

  const GraphCase gc = make_graph_case(args.d, model, degree, noise, n, args.seed,
                                       {args.weight_low, args.weight_high}, !args.raw_noise);
  json meta;
  meta["d"] = gc.d;
  meta["model"] = to_string(gc.model);
  meta["avg_degree"] = gc.avg_degree;
  meta["noise"] = to_string(gc.noise);
  meta["noise_centered"] = gc.centered;
  meta["n"] = gc.n;
  meta["seed"] = gc.seed;
  meta["weight_range"] = {gc.weights.low, gc.weights.high};
  meta["edges"] = gc.adjacency.nnz();
  manifest.set_config(meta);

  const fs::path adjacency = dir / "adjacency.mtx";
  const fs::path weights = dir / "w_true.mtx";
  const fs::path samples = dir / "x.csv";
  const fs::path sidecar = dir / "case.json";
  write_matrix_market(adjacency, gc.adjacency);
  write_matrix_market(weights, gc.w_true);
  write_csv(samples, gc.x);
  write_json(sidecar, meta);
  for (const auto& p : {adjacency, weights, samples, sidecar}) manifest.add_output(p);
  manifest.write();
  out << "generated d=" << gc.d << " n=" << gc.n << " edges=" << gc.adjacency.nnz() << " in "
      << dir.string() << "\n";
  return 0;
}

namespace {

DenseMatrix load_samples(const fs::path& path, bool center) {
  DenseMatrix x = read_csv(path);
  if (center) center_columns(x);
  return x;
}

}  // namespace

int cmd_learn(const LearnArgs& args, const LearnOptions& opts, std::ostream& out,
              std::ostream& err) {
  const LearnConfig cfg = opts.resolve();
  const fs::path input = args.input;
  const DenseMatrix x = load_samples(input, args.center);
  const fs::path dir = resolve_out_dir(args.out_dir);
  Manifest manifest("learn", dir);
  manifest.add_input(input);
  json config = to_json(cfg);
  config["profile"] = opts.profile();
  config["center"] = args.center;
  config["effective_batch"] = cfg.effective_batch(x.rows());
  manifest.set_config(config);

  ProgressFn progress;
  if (!args.quiet) {
    progress = [&err](const OuterRecord& rec) {
      err << "outer=" << rec.iteration << " delta=" << format_double(rec.bound)
          << " loss=" << format_double(rec.loss) << "\n";
    };
  }
  const LearnResult result = learn(x, cfg, progress);

  const fs::path w_path = dir / "w.mtx";
  const fs::path trace_path = dir / "trace.csv";
  const fs::path report_path = dir / "report.json";
  write_matrix_market(w_path, result.w);
  write_trace_csv(trace_path, result.trace);
  json report;
  report["d"] = x.cols();
  report["n"] = x.rows();
  report["converged"] = result.converged;
  report["outer_iterations"] = result.outer_iterations;
  report["seconds"] = result.seconds;
  report["nnz"] = result.w.nnz();
  report["final_delta"] = result.trace.empty() ? forward_bound(result.w, cfg.bound_config()).bound
                                               : result.trace.back().bound;
  if (!result.trace.empty() && result.trace.back().h) report["final_h"] = *result.trace.back().h;
  report["trace"] = json::array();
  for (const auto& rec : result.trace) report["trace"].push_back(to_json(rec));
  report["config"] = config;
  write_json(report_path, report);
  for (const auto& p : {w_path, trace_path, report_path}) manifest.add_output(p);
  manifest.write();
  out << "learned d=" << x.cols() << " nnz=" << result.w.nnz()
      << " converged=" << (result.converged ? "true" : "false")
      << " outer=" << result.outer_iterations << " in " << dir.string() << "\n";
  return 0;
}

int cmd_evaluate(const EvaluateArgs& args, const LearnOptions& opts, std::ostream& out,
                 std::ostream& /*err*/) {
  const fs::path dir = resolve_out_dir(args.out_dir);
  Manifest manifest("evaluate", dir);
  const fs::path truth_path = args.truth;
  const SparseMatrix truth = read_matrix_market(truth_path);
  manifest.add_input(truth_path);
  json report;

  if (args.grid) {
    if (*args.grid != "benchmark") {
      throw std::invalid_argument("--grid accepts only 'benchmark' (use --eps-grid / --tau-grid to customise)");
    }
    if (!args.input) throw std::invalid_argument("--grid needs --input samples");
    const fs::path input = *args.input;
    const DenseMatrix x = load_samples(input, args.center);
    manifest.add_input(input);
    const LearnConfig cfg = opts.resolve();
    const auto eps = args.eps_grid ? parse_number_list(*args.eps_grid) : benchmark_epsilon_grid();
    const auto taus = args.tau_grid ? parse_number_list(*args.tau_grid) : benchmark_tau_grid();
    json config = to_json(cfg);
    config["profile"] = opts.profile();
    config["eps_grid"] = eps;
    config["tau_grid"] = taus;
    config["center"] = args.center;
    manifest.set_config(config);

    const GridResult grid = grid_search(x, truth, cfg, eps, taus, args.jobs);
    report = to_json(grid.best);
    report["acyclic"] = is_acyclic(grid.best_w);
    report["cells"] = json::array();
    for (const auto& cell : grid.cells) {
      json c = to_json(cell.report);
      c["epsilon"] = cell.epsilon;
      c["tau"] = cell.tau;
      report["cells"].push_back(c);
    }
    report["learns"] = json::array();
    for (std::size_t e = 0; e < grid.learns.size(); ++e) {
      const auto& lr = grid.learns[e];
      report["learns"].push_back({{"epsilon", eps[e]},
                                  {"converged", lr.converged},
                                  {"outer_iterations", lr.outer_iterations},
                                  {"seconds", lr.seconds},
                                  {"nnz", lr.w.nnz()}});
    }
    const fs::path best = dir / "best_w.mtx";
    write_matrix_market(best, grid.best_w);
    manifest.add_output(best);
  } else {
    if (!args.learned) throw std::invalid_argument("evaluate needs --learned or --grid");
    const fs::path learned_path = *args.learned;
    const SparseMatrix learned = read_matrix_market(learned_path);
    manifest.add_input(learned_path);
    manifest.set_config({{"tau", args.tau}});
    const SparseMatrix thresholded = post_threshold(learned, args.tau);
    EvalReport r = compare_graphs(thresholded, truth);
    r.auc_roc = auc_roc(learned, truth);
    report = to_json(r);
    report["tau"] = args.tau;
    report["acyclic"] = is_acyclic(thresholded);
  }

  const fs::path report_path = dir / "eval.json";
  write_json(report_path, report);
  manifest.add_output(report_path);
  manifest.write();
  out << "f1=" << format_double(report["f1"].get<double>()) << " shd=" << report["shd"].get<std::size_t>()
      << " fdr=" << format_double(report["fdr"].get<double>())
      << " tpr=" << format_double(report["tpr"].get<double>()) << "\n";
  return 0;
}

namespace {

/// Random d x d matrix, each position present with probability `density`,
/// values of random sign with magnitude uniform on [0.1, 1].
SparseMatrix random_weights(unsigned d, double density, Rng& rng) {
  std::vector<Triplet> t;
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) {
      if (rng.uniform() >= density) continue;
      const double magnitude = rng.uniform(0.1, 1.0);
      t.push_back({i, j, rng.uniform() < 0.5 ? -magnitude : magnitude});
    }
  }
  return SparseMatrix::from_triplets(d, d, std::move(t));
}

}  // namespace

int cmd_check_grad(const CheckGradArgs& args, std::ostream& out, std::ostream& /*err*/) {
  if (args.k.empty() || args.alpha.empty()) throw std::invalid_argument("--k and --alpha need values");
  if (!(args.step > 0.0)) throw std::invalid_argument("--step must be positive");
  const fs::path dir = resolve_out_dir(args.out_dir);
  Manifest manifest("check-grad", dir);
  manifest.set_config({{"d", args.d},
                       {"density", args.density},
                       {"k", args.k},
                       {"alpha", args.alpha},
                       {"trials", args.trials},
                       {"seed", args.seed},
                       {"tol", args.tol},
                       {"step", args.step}});
  // Below this magnitude an entry is compared absolutely (tolerance tol * 1e-2).
  constexpr double kSmall = 1e-4;
  const double abs_tol = args.tol * 1e-2;

  const auto start = std::chrono::steady_clock::now();
  double max_rel = 0.0, max_abs_small = 0.0;
  std::size_t entries = 0;
  json trials = json::array();
  for (unsigned t = 0; t < args.trials; ++t) {
    const BoundConfig cfg{args.k[t % args.k.size()],
                          args.alpha[(t / args.k.size()) % args.alpha.size()]};
    Rng rng(args.seed, Stream::kTrial, t);
    const SparseMatrix w = random_weights(args.d, args.density, rng);
    const SparseMatrix grad = backward_gradient(forward_bound(w, cfg), w, cfg);
    double trial_rel = 0.0;
    SparseMatrix probe = w;
    for (std::size_t e = 0; e < w.nnz(); ++e) {
      const double base = w.values()[e];
      auto at = [&](double offset) {
        probe.values()[e] = base + offset;
        return forward_bound(probe, cfg).bound;
      };
      const double h = args.step;
      // Fourth-order central difference.
      const double numeric = (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h);
      probe.values()[e] = base;
      const double analytic = grad.values()[e];
      const double diff = std::abs(analytic - numeric);
      if (std::abs(analytic) >= kSmall) {
        trial_rel = std::max(trial_rel, diff / std::abs(analytic));
      } else {
        max_abs_small = std::max(max_abs_small, diff);
      }
      ++entries;
    }
    max_rel = std::max(max_rel, trial_rel);
    trials.push_back({{"trial", t}, {"k", cfg.k}, {"alpha", cfg.alpha}, {"nnz", w.nnz()},
                      {"max_rel_error", trial_rel}});
  }
  const bool vacuous = entries == 0;
  const bool pass = max_rel <= args.tol && max_abs_small <= abs_tol;
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  json report{{"trials", args.trials},
              {"entries_checked", entries},
              {"max_rel_error", max_rel},
              {"max_abs_error_small", max_abs_small},
              {"tol", args.tol},
              {"abs_tol_small", abs_tol},
              {"vacuous", vacuous},
              {"pass", pass},
              {"seconds", seconds},
              {"per_trial", trials}};
  const fs::path report_path = dir / "check_grad.json";
  write_json(report_path, report);
  manifest.add_output(report_path);
  manifest.write();
  if (vacuous) {
    out << "check-grad: vacuous pass (no stored entries in " << args.trials << " trials)\n";
  } else {
    out << "check-grad: trials=" << args.trials << " entries=" << entries
        << " max_rel_err=" << format_double(max_rel)
        << " max_abs_err_small=" << format_double(max_abs_small) << (pass ? " pass" : " FAIL")
        << "\n";
  }
  return pass ? 0 : 1;
}

}  // namespace least::cli
