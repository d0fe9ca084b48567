#include "cli.hpp"

#include <iostream>
#include <limits>
#include <type_traits>

#include <CLI11.hpp>

#include "commands.hpp"
#include "least/errors.hpp"

namespace least::cli {

LearnConfig profile_config(const std::string& name) {
  LearnConfig cfg;
  if (name == "default") return cfg;
  if (name == "bench-small") {
    cfg.batch_size = std::numeric_limits<std::size_t>::max();
    cfg.theta = 0.0;
    cfg.lambda = 0.5;
    cfg.stop_on_h = true;
    return cfg;
  }
  if (name == "bench-large") {
    cfg.batch_size = 1000;
    cfg.theta = 1e-3;
    cfg.epsilon = 1e-8;
    return cfg;
  }
  throw std::invalid_argument("unknown profile '" + name +
                              "' (expected default, bench-small or bench-large)");
}

template <class T>
void LearnOptions::add(CLI::App& app, const std::string& name, T LearnConfig::*field,
                       const std::string& help) {
  CLI::Option* opt = nullptr;
  if constexpr (std::is_same_v<T, bool>) {
    opt = app.add_flag(name, values_.*field, help);  // --name or --name=false
  } else {
    opt = app.add_option(name, values_.*field, help);
  }
  setters_.emplace_back(opt, [this, field](LearnConfig& cfg) { cfg.*field = values_.*field; });
}

void LearnOptions::attach(CLI::App& app) {
  app.add_option("--profile", profile_, "default | bench-small | bench-large")
      ->capture_default_str();
  add(app, "--zeta", &LearnConfig::zeta, "initialisation density");
  add(app, "--lambda", &LearnConfig::lambda, "L1 weight");
  add(app, "--epsilon", &LearnConfig::epsilon, "constraint tolerance");
  add(app, "--k", &LearnConfig::k, "bound iterations");
  add(app, "--alpha", &LearnConfig::alpha, "balancing factor");
  add(app, "--batch-size", &LearnConfig::batch_size, "batch size (0: min(n, 1000))");
  add(app, "--theta", &LearnConfig::theta, "in-loop filter threshold");
  add(app, "--t-outer", &LearnConfig::t_outer, "maximum outer iterations");
  add(app, "--t-inner", &LearnConfig::t_inner, "maximum inner iterations");
  add(app, "--lr", &LearnConfig::lr, "Adam learning rate");
  add(app, "--rho-init", &LearnConfig::rho_init, "initial penalty");
  add(app, "--eta-init", &LearnConfig::eta_init, "initial multiplier");
  add(app, "--rho-growth", &LearnConfig::rho_growth, "penalty growth factor");
  add(app, "--rho-max", &LearnConfig::rho_max, "penalty cap");
  add(app, "--seed", &LearnConfig::seed, "random seed");
  add(app, "--grow-threshold", &LearnConfig::grow_threshold,
      "gradient magnitude admitting a new edge (negative: lambda)");
  add(app, "--grow-interval", &LearnConfig::grow_interval, "inner iterations between scans");
  add(app, "--grow-block", &LearnConfig::grow_block, "columns per scan block");
  add(app, "--inner-tolerance", &LearnConfig::inner_tolerance, "inner convergence tolerance");
  add(app, "--inner-window", &LearnConfig::inner_window, "inner convergence window");
  add(app, "--oracle-trace", &LearnConfig::oracle_trace, "record h(W) in the trace");
  add(app, "--stop-on-h", &LearnConfig::stop_on_h, "stop when h(W) <= epsilon");
  add(app, "--warm-start", &LearnConfig::warm_start, "reuse W across outer iterations");
  CLI::Option* engine = app.add_option("--engine", engine_, "dense | sparse");
  setters_.emplace_back(engine, [this](LearnConfig& cfg) { cfg.engine = parse_engine(engine_); });
}

LearnConfig LearnOptions::resolve() const {
  LearnConfig cfg = profile_config(profile_);
  for (const auto& [opt, apply] : setters_) {
    if (opt->count() > 0) apply(cfg);
  }
  cfg.validate();
  return cfg;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sparse DAG structure learning with a spectral-radius bound constraint", "least"};
  app.require_subcommand(1);

  GenerateArgs gen;
  CLI::App* generate = app.add_subcommand("generate", "generate a synthetic benchmark case");
  generate->add_option("--d", gen.d, "number of nodes")->required()->check(CLI::Range(2u, 1u << 30));
  generate->add_option("--model", gen.model, "er | sf")->capture_default_str();
  generate->add_option("--degree", gen.degree, "average degree (default 2 for er, 4 for sf)");
  generate->add_option("--noise", gen.noise, "gauss | exp | gumbel")->capture_default_str();
  generate->add_option("--n", gen.n, "number of samples (default 10 d)");
  generate->add_option("--seed", gen.seed, "random seed")->capture_default_str();
  generate->add_option("--weight-low", gen.weight_low, "smallest |weight|")->capture_default_str();
  generate->add_option("--weight-high", gen.weight_high, "largest |weight|")->capture_default_str();
  generate->add_flag("--raw-noise", gen.raw_noise, "do not centre exponential / gumbel noise");
  generate->add_option("--out-dir", gen.out_dir, "output directory");

  LearnArgs learn_args;
  LearnOptions learn_opts;
  CLI::App* learn = app.add_subcommand("learn", "learn a DAG from samples");
  learn->add_option("--input", learn_args.input, "samples, headerless CSV")->required();
  learn->add_flag("--center", learn_args.center, "subtract column means first");
  learn->add_flag("--quiet", learn_args.quiet, "no progress lines");
  learn->add_option("--out-dir", learn_args.out_dir, "output directory");
  learn_opts.attach(*learn);

  EvaluateArgs eval_args;
  LearnOptions eval_opts;
  eval_opts.set_default_profile("bench-small");
  CLI::App* evaluate = app.add_subcommand("evaluate", "compare a learned graph with the truth");
  evaluate->add_option("--learned", eval_args.learned, "learned W, Matrix-Market");
  evaluate->add_option("--truth", eval_args.truth, "true graph, Matrix-Market")->required();
  evaluate->add_option("--tau", eval_args.tau, "post-threshold for --learned")->capture_default_str();
  evaluate->add_option("--grid", eval_args.grid, "'benchmark' runs the epsilon x tau grid search");
  evaluate->add_option("--input", eval_args.input, "samples for --grid, headerless CSV");
  evaluate->add_option("--eps-grid", eval_args.eps_grid, "comma-separated epsilon values");
  evaluate->add_option("--tau-grid", eval_args.tau_grid, "comma-separated tau values");
  evaluate->add_flag("--center", eval_args.center, "subtract column means first");
  evaluate->add_option("--jobs", eval_args.jobs, "parallel learns")->capture_default_str();
  evaluate->add_option("--out-dir", eval_args.out_dir, "output directory");
  eval_opts.attach(*evaluate);

  CheckGradArgs cg;
  CLI::App* check = app.add_subcommand("check-grad", "finite-difference check of the bound gradient");
  check->add_option("--d", cg.d, "matrix size")->capture_default_str()->check(CLI::Range(1u, 200u));
  check->add_option("--density", cg.density, "entry density")->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  check->add_option("--k", cg.k, "bound iterations (cycled over trials)")->delimiter(',');
  check->add_option("--alpha", cg.alpha, "balancing factors (cycled over trials)")->delimiter(',');
  check->add_option("--trials", cg.trials, "number of random matrices")->capture_default_str();
  check->add_option("--seed", cg.seed, "random seed")->capture_default_str();
  check->add_option("--tol", cg.tol, "maximum relative error")->capture_default_str();
  check->add_option("--step", cg.step, "finite-difference step")->capture_default_str();
  check->add_option("--out-dir", cg.out_dir, "output directory");

  BenchArgs bench_args;
  LearnOptions bench_opts;
  bench_opts.set_default_profile("bench-small");
  CLI::App* bench = app.add_subcommand("bench", "benchmark suites with tables and SVG plots");
  bench->add_option("--suite", bench_args.suite, "accuracy | timing | scale")
      ->required()
      ->check(CLI::IsMember({"accuracy", "timing", "scale"}));
  bench->add_option("--jobs", bench_args.jobs, "worker threads")->capture_default_str();
  bench->add_option("--seeds", bench_args.seeds, "seeds per cell")->capture_default_str();
  bench->add_option("--dims", bench_args.dims, "comma-separated node counts");
  bench->add_option("--models", bench_args.models, "comma-separated: er, sf")->capture_default_str();
  bench->add_option("--noises", bench_args.noises, "comma-separated: gauss, exp, gumbel")
      ->capture_default_str();
  bench->add_option("--scale-d", bench_args.scale_d, "scale suite node counts")->capture_default_str();
  bench->add_option("--scale-nnz", bench_args.scale_nnz, "scale suite entry counts")
      ->capture_default_str();
  bench->add_option("--scale-k", bench_args.k, "scale suite bound iterations")->capture_default_str();
  bench->add_option("--scale-alpha", bench_args.alpha, "scale suite balancing factor")
      ->capture_default_str();
  bench->add_option("--repeats", bench_args.repeats, "timed repetitions (median)")
      ->capture_default_str();
  bench->add_flag("--correlation", bench_args.correlation,
                  "accuracy: extra run per cell recording the bound/h correlation");
  bench->add_option("--out-dir", bench_args.out_dir, "output directory");
  bench_opts.attach(*bench);

  std::vector<std::string> argv_storage{"least"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_storage) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    err << "run 'least --help' for usage\n";
    return kExitUsage;
  }

  try {
    if (*generate) return cmd_generate(gen, out, err);
    if (*learn) return cmd_learn(learn_args, learn_opts, out, err);
    if (*evaluate) return cmd_evaluate(eval_args, eval_opts, out, err);
    if (*check) return cmd_check_grad(cg, out, err);
    if (*bench) return cmd_bench(bench_args, bench_opts, out, err);
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const GuardError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace least::cli
