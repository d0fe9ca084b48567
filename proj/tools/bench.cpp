#include "bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "cli_support.hpp"
#include "commands.hpp"
#include "least/alloc_stats.hpp"
#include "least/datagen.hpp"
#include "least/matrix_market.hpp"
#include "least/rng.hpp"
#include "svg.hpp"

namespace least::cli {

namespace fs = std::filesystem;
using clock_type = std::chrono::steady_clock;

SparseMatrix random_sparse(Index d, std::size_t nnz, std::uint64_t seed) {
  Rng rng(seed, Stream::kTrial);
  std::vector<Triplet> t;
  t.reserve(nnz);
  for (std::size_t e = 0; e < nnz; ++e) {
    const auto i = static_cast<Index>(rng.below(d));
    const auto j = static_cast<Index>(rng.below(d));
    const double magnitude = rng.uniform(0.1, 1.0);
    t.push_back({i, j, rng.uniform() < 0.5 ? -magnitude : magnitude});
  }
  // Merged duplicates could cancel to an exact zero; drop those.
  return SparseMatrix::from_triplets(d, d, std::move(t)).compressed();
}

namespace {

double seconds_since(clock_type::time_point start) {
  return std::chrono::duration<double>(clock_type::now() - start).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

ConstraintCost measure_constraint(const SparseMatrix& w, const BoundConfig& cfg, unsigned repeats) {
  ConstraintCost cost;
  cost.d = w.rows();
  cost.nnz = w.nnz();
  {
    alloc_stats::Window all;
    std::size_t after_forward = 0;
    std::size_t forward_peak = 0;
    BoundTrace trace;
    {
      alloc_stats::Window fwd;
      trace = forward_bound(w, cfg);
      forward_peak = fwd.peak_increment();
      after_forward = fwd.current_increment();
    }
    cost.trace_bytes = trace.storage_bytes();
    cost.forward_extra_bytes = forward_peak > after_forward ? forward_peak - after_forward : 0;
    alloc_stats::Window bwd;
    const SparseMatrix grad = backward_gradient(trace, w, cfg);
    const std::size_t backward_peak = bwd.peak_increment();
    const std::size_t after_backward = bwd.current_increment();
    cost.gradient_bytes = grad.storage_bytes();
    cost.backward_extra_bytes =
        backward_peak > after_backward ? backward_peak - after_backward : 0;
    cost.peak_bytes = all.peak_increment();
    cost.bound = trace.bound;
  }
  std::vector<double> fwd_times, bwd_times, totals;
  for (unsigned r = 0; r < std::max(1u, repeats); ++r) {
    const auto t0 = clock_type::now();
    const BoundTrace trace = forward_bound(w, cfg);
    const double f = seconds_since(t0);
    const auto t1 = clock_type::now();
    const SparseMatrix grad = backward_gradient(trace, w, cfg);
    const double b = seconds_since(t1);
    fwd_times.push_back(f);
    bwd_times.push_back(b);
    totals.push_back(f + b);
  }
  cost.forward_seconds = median(fwd_times);
  cost.backward_seconds = median(bwd_times);
  cost.total_seconds = median(totals);
  return cost;
}

namespace {

std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (!token.empty()) out.push_back(token);
  }
  return out;
}

std::vector<unsigned> parse_dims(const std::string& text, std::vector<unsigned> fallback) {
  if (text.empty()) return fallback;
  std::vector<unsigned> out;
  for (double v : parse_number_list(text)) {
    if (!(v >= 2.0) || v != std::floor(v)) throw std::invalid_argument("bad dimension in --dims");
    out.push_back(static_cast<unsigned>(v));
  }
  return out;
}

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
  std::size_t count = 0;
};

MeanSd summarize(const std::vector<double>& v) {
  MeanSd s;
  s.count = v.size();
  if (v.empty()) return s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double acc = 0.0;
    for (double x : v) acc += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(acc / static_cast<double>(v.size() - 1));
  }
  return s;
}

std::string fmt(double v, int digits = 3) {
  std::ostringstream o;
  o.setf(std::ios::fixed);
  o.precision(digits);
  o << v;
  return o.str();
}

/// Runs task(i) for i in [0, count) on `jobs` threads.
template <class Task>
void parallel_for(std::size_t count, unsigned jobs, Task task) {
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) task(i);
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(count)));
  if (threads == 1) {
    worker();
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

struct AccuracyCell {
  GraphModel model = GraphModel::kErdosRenyi;
  NoiseKind noise = NoiseKind::kGaussian;
  unsigned d = 0;
  unsigned seed = 0;
  bool ok = false;
  std::string error;
  EvalReport report;
  bool acyclic = false;
  std::optional<double> correlation;
  double seconds = 0.0;
};

int bench_accuracy(const BenchArgs& args, const LearnConfig& base, const fs::path& dir,
                   Manifest& manifest, std::ostream& out, std::ostream& err) {
  const auto dims = parse_dims(args.dims, {10, 20, 50, 100});
  std::vector<AccuracyCell> cells;
  for (const auto& m : split_words(args.models))
    for (const auto& nz : split_words(args.noises))
      for (unsigned d : dims)
        for (unsigned s = 0; s < args.seeds; ++s) {
          AccuracyCell cell;
          cell.model = parse_graph_model(m);
          cell.noise = parse_noise(nz);
          cell.d = d;
          cell.seed = s;
          cells.push_back(cell);
        }

  std::mutex log_mutex;
  parallel_for(cells.size(), args.jobs, [&](std::size_t i) {
    AccuracyCell& cell = cells[i];
    const auto start = clock_type::now();
    try {
      const double degree = cell.model == GraphModel::kErdosRenyi ? 2.0 : 4.0;
      const GraphCase gc = make_graph_case(cell.d, cell.model, degree, cell.noise,
                                           10 * static_cast<std::size_t>(cell.d), cell.seed);
      LearnConfig cfg = base;
      cfg.seed = cell.seed;
      const GridResult grid =
          grid_search(gc.x, gc.adjacency, cfg, benchmark_epsilon_grid(), benchmark_tau_grid(), 1);
      cell.report = grid.best;
      cell.acyclic = is_acyclic(grid.best_w);
      if (args.correlation) {
        LearnConfig corr_cfg = cfg;
        corr_cfg.stop_on_h = false;
        corr_cfg.oracle_trace = true;
        corr_cfg.epsilon = 1e-4;
        corr_cfg.t_outer = std::min(corr_cfg.t_outer, 30u);
        cell.correlation = trace_correlation(learn(gc.x, corr_cfg).trace);
      }
      cell.ok = true;
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
    cell.seconds = seconds_since(start);
    std::lock_guard lock(log_mutex);
    err << "cell model=" << to_string(cell.model) << " noise=" << to_string(cell.noise)
        << " d=" << cell.d << " seed=" << cell.seed
        << (cell.ok ? " f1=" + fmt(cell.report.f1) + " shd=" + std::to_string(cell.report.shd)
                    : " failed: " + cell.error)
        << "\n";
  });

  json report;
  report["cells"] = json::array();
  for (const auto& c : cells) {
    json j{{"model", to_string(c.model)}, {"noise", to_string(c.noise)}, {"d", c.d},
           {"seed", c.seed}, {"ok", c.ok}, {"seconds", c.seconds}};
    if (c.ok) {
      j["report"] = to_json(c.report);
      j["acyclic"] = c.acyclic;
      j["correlation"] = c.correlation ? json(*c.correlation) : json(nullptr);
    } else {
      j["error"] = c.error;
    }
    report["cells"].push_back(j);
  }

  // Aggregate per (model, noise, d).
  struct Key {
    std::string model, noise;
    unsigned d;
    bool operator<(const Key& o) const {
      return std::tie(model, noise, d) < std::tie(o.model, o.noise, o.d);
    }
  };
  std::map<Key, std::vector<const AccuracyCell*>> groups;
  for (const auto& c : cells) groups[{to_string(c.model), to_string(c.noise), c.d}].push_back(&c);

  std::ostringstream table;
  table << "| model | noise | d | F1 | SHD | FDR | TPR | correlation | acyclic | failed | seconds |\n"
        << "|---|---|---|---|---|---|---|---|---|---|---|\n";
  report["summary"] = json::array();
  std::map<std::pair<std::string, std::string>, Series> f1_series, shd_series, corr_series;
  std::size_t failures = 0;
  for (const auto& [key, group] : groups) {
    std::vector<double> f1, shd, fdr, tpr, corr, secs;
    std::size_t acyclic = 0, failed = 0;
    for (const auto* c : group) {
      secs.push_back(c->seconds);
      if (!c->ok) {
        ++failed;
        continue;
      }
      f1.push_back(c->report.f1);
      shd.push_back(static_cast<double>(c->report.shd));
      fdr.push_back(c->report.fdr);
      tpr.push_back(c->report.tpr);
      if (c->correlation) corr.push_back(*c->correlation);
      acyclic += c->acyclic ? 1 : 0;
    }
    failures += failed;
    const MeanSd f = summarize(f1), s = summarize(shd), fd = summarize(fdr), tp = summarize(tpr),
                 co = summarize(corr), sec = summarize(secs);
    table << "| " << key.model << " | " << key.noise << " | " << key.d << " | " << fmt(f.mean)
          << " ± " << fmt(f.sd) << " | " << fmt(s.mean, 1) << " ± " << fmt(s.sd, 1) << " | "
          << fmt(fd.mean) << " | " << fmt(tp.mean) << " | "
          << (co.count ? fmt(co.mean) : std::string("n/a")) << " | " << acyclic << "/"
          << group.size() - failed << " | " << failed << " | " << fmt(sec.mean, 2) << " |\n";
    report["summary"].push_back({{"model", key.model}, {"noise", key.noise}, {"d", key.d},
                                 {"f1_mean", f.mean}, {"f1_sd", f.sd}, {"shd_mean", s.mean},
                                 {"shd_sd", s.sd}, {"fdr_mean", fd.mean}, {"tpr_mean", tp.mean},
                                 {"correlation_mean", co.count ? json(co.mean) : json(nullptr)},
                                 {"acyclic", acyclic}, {"failed", failed},
                                 {"seconds_mean", sec.mean}});
    const auto panel = std::make_pair(key.model, key.noise);
    for (auto* target : {&f1_series[panel], &shd_series[panel], &corr_series[panel]})
      target->label = key.noise;
    f1_series[panel].x.push_back(key.d);
    f1_series[panel].y.push_back(f.mean);
    f1_series[panel].err.push_back(f.sd);
    shd_series[panel].x.push_back(key.d);
    shd_series[panel].y.push_back(s.mean);
    shd_series[panel].err.push_back(s.sd);
    if (co.count) {
      corr_series[panel].x.push_back(key.d);
      corr_series[panel].y.push_back(co.mean);
      corr_series[panel].err.push_back(co.sd);
    }
  }

  std::map<std::string, std::array<Chart, 3>> charts;
  for (auto& [panel, series] : f1_series) {
    auto& c = charts[panel.first];
    c[0].title = "F1 (" + panel.first + ")";
    c[0].x_label = "d";
    c[0].y_label = "F1";
    c[0].log_x = true;
    c[0].series.push_back(series);
    c[1].title = "SHD (" + panel.first + ")";
    c[1].x_label = "d";
    c[1].y_label = "SHD";
    c[1].log_x = true;
    c[1].series.push_back(shd_series[panel]);
    c[2].title = "Pearson(bound, h) (" + panel.first + ")";
    c[2].x_label = "d";
    c[2].y_label = "correlation";
    c[2].log_x = true;
    if (!corr_series[panel].x.empty()) c[2].series.push_back(corr_series[panel]);
  }
  for (const auto& [model, c] : charts) {
    const std::string names[] = {"f1", "shd", "correlation"};
    for (int i = 0; i < 3; ++i) {
      if (c[i].series.empty()) continue;
      const fs::path p = dir / ("accuracy_" + names[i] + "_" + model + ".svg");
      write_text(p, render_svg(c[i]));
      manifest.add_output(p);
    }
  }
  const fs::path json_path = dir / "accuracy.json";
  const fs::path md_path = dir / "accuracy.md";
  write_json(json_path, report);
  write_text(md_path, table.str());
  manifest.add_output(json_path);
  manifest.add_output(md_path);
  out << table.str();
  return failures == 0 ? 0 : 1;
}

int bench_timing(const BenchArgs& args, const LearnConfig& base, const fs::path& dir,
                 Manifest& manifest, std::ostream& out, std::ostream& err) {
  const auto dims = parse_dims(args.dims, {10, 20, 50, 100});
  std::vector<std::vector<double>> times(dims.size());
  for (std::size_t i = 0; i < dims.size(); ++i) {
    for (unsigned s = 0; s < args.seeds; ++s) {
      const GraphCase gc = make_graph_case(dims[i], GraphModel::kErdosRenyi, 2.0,
                                           NoiseKind::kGaussian, 10 * std::size_t{dims[i]}, s);
      LearnConfig cfg = base;
      cfg.seed = s;
      const auto start = clock_type::now();
      learn(gc.x, cfg);
      times[i].push_back(seconds_since(start));
      err << "timing d=" << dims[i] << " seed=" << s << " seconds=" << fmt(times[i].back(), 3)
          << "\n";
    }
  }
  std::ostringstream table;
  table << "| d | seconds (mean) | sd |\n|---|---|---|\n";
  json report;
  report["rows"] = json::array();
  Series series{"learn", {}, {}, {}};
  bool monotone = true;
  double previous = 0.0;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    const MeanSd m = summarize(times[i]);
    // Loose monotonicity: allow a 20% dip against the previous size.
    if (i > 0 && m.mean < 0.8 * previous) monotone = false;
    previous = m.mean;
    table << "| " << dims[i] << " | " << fmt(m.mean, 4) << " | " << fmt(m.sd, 4) << " |\n";
    report["rows"].push_back({{"d", dims[i]}, {"seconds_mean", m.mean}, {"seconds_sd", m.sd},
                              {"seconds", times[i]}});
    series.x.push_back(dims[i]);
    series.y.push_back(m.mean);
    series.err.push_back(m.sd);
  }
  report["monotone_within_20pct"] = monotone;
  Chart chart{"learning time vs d (ER-2, Gaussian)", "d", "seconds", true, true, {series}};
  const fs::path svg = dir / "timing.svg";
  const fs::path json_path = dir / "timing.json";
  const fs::path md_path = dir / "timing.md";
  write_text(svg, render_svg(chart));
  write_json(json_path, report);
  write_text(md_path, table.str());
  for (const auto& p : {svg, json_path, md_path}) manifest.add_output(p);
  out << table.str() << "monotone (20% slack): " << (monotone ? "yes" : "no") << "\n";
  return 0;
}

int bench_scale(const BenchArgs& args, const fs::path& dir, Manifest& manifest, std::ostream& out,
                std::ostream& err) {
  const BoundConfig cfg{args.k, args.alpha};
  cfg.validate();
  std::vector<double> ds = parse_number_list(args.scale_d);
  std::vector<double> nnzs = parse_number_list(args.scale_nnz);
  std::ostringstream table;
  table << "| d | nnz | forward s | backward s | total s | trace MB | extra fwd B/nnz | extra bwd B/nnz | peak MB |\n"
        << "|---|---|---|---|---|---|---|---|---|\n";
  json report;
  report["config"] = {{"k", cfg.k}, {"alpha", cfg.alpha}, {"repeats", args.repeats}};
  report["rows"] = json::array();
  std::vector<Series> series;
  for (double dv : ds) {
    const auto d = static_cast<Index>(dv);
    Series s{"d=" + format_double(dv), {}, {}, {}};
    for (double nv : nnzs) {
      const auto target = static_cast<std::size_t>(nv);
      if (static_cast<double>(target) > 0.5 * dv * dv) continue;
      const SparseMatrix w = random_sparse(d, target, 1);
      const ConstraintCost c = measure_constraint(w, cfg, args.repeats);
      const double per = 1.0 / static_cast<double>(std::max<std::size_t>(c.nnz, 1));
      table << "| " << d << " | " << c.nnz << " | " << fmt(c.forward_seconds, 4) << " | "
            << fmt(c.backward_seconds, 4) << " | " << fmt(c.total_seconds, 4) << " | "
            << fmt(c.trace_bytes / 1e6, 1) << " | " << fmt(c.forward_extra_bytes * per, 1) << " | "
            << fmt(c.backward_extra_bytes * per, 1) << " | " << fmt(c.peak_bytes / 1e6, 1)
            << " |\n";
      report["rows"].push_back({{"d", d}, {"nnz", c.nnz}, {"forward_seconds", c.forward_seconds},
                                {"backward_seconds", c.backward_seconds},
                                {"total_seconds", c.total_seconds}, {"bound", c.bound},
                                {"trace_bytes", c.trace_bytes},
                                {"gradient_bytes", c.gradient_bytes},
                                {"forward_extra_bytes", c.forward_extra_bytes},
                                {"backward_extra_bytes", c.backward_extra_bytes},
                                {"peak_bytes", c.peak_bytes}});
      err << "scale d=" << d << " nnz=" << c.nnz << " total=" << fmt(c.total_seconds, 4) << "s\n";
      s.x.push_back(static_cast<double>(c.nnz));
      s.y.push_back(c.total_seconds);
    }
    series.push_back(s);
  }
  Chart chart{"bound + gradient time vs nnz", "nnz", "seconds", true, true, series};
  const fs::path svg = dir / "scale.svg";
  const fs::path json_path = dir / "scale.json";
  const fs::path md_path = dir / "scale.md";
  write_text(svg, render_svg(chart));
  write_json(json_path, report);
  write_text(md_path, table.str());
  for (const auto& p : {svg, json_path, md_path}) manifest.add_output(p);
  out << table.str();
  return 0;
}

}  // namespace

int cmd_bench(const BenchArgs& args, const LearnOptions& opts, std::ostream& out,
              std::ostream& err) {
  const fs::path dir = resolve_out_dir(args.out_dir);
  Manifest manifest("bench " + args.suite, dir);
  json config{{"suite", args.suite}, {"jobs", args.jobs}, {"seeds", args.seeds},
              {"dims", args.dims}, {"models", args.models}, {"noises", args.noises}};
  if (args.suite == "scale") {
    config["scale_d"] = args.scale_d;
    config["scale_nnz"] = args.scale_nnz;
    config["k"] = args.k;
    config["alpha"] = args.alpha;
    config["repeats"] = args.repeats;
    manifest.set_config(config);
    const int code = bench_scale(args, dir, manifest, out, err);
    manifest.write();
    return code;
  }
  const LearnConfig cfg = opts.resolve();
  config["learn"] = to_json(cfg);
  config["profile"] = opts.profile();
  manifest.set_config(config);
  const int code = args.suite == "accuracy" ? bench_accuracy(args, cfg, dir, manifest, out, err)
                                            : bench_timing(args, cfg, dir, manifest, out, err);
  manifest.write();
  return code;
}

}  // namespace least::cli
