#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "least/learner.hpp"

namespace least::cli {

/// Learner flags shared by `learn`, `evaluate --grid` and `bench`. Values
/// given on the command line override the chosen profile.
class LearnOptions {
 public:
  void attach(CLI::App& app);
  /// Profile defaults with explicit flags applied on top.
  LearnConfig resolve() const;
  const std::string& profile() const { return profile_; }
  void set_default_profile(std::string profile) { profile_ = std::move(profile); }

 private:
  template <class T>
  void add(CLI::App& app, const std::string& name, T LearnConfig::*field, const std::string& help);

  std::string profile_ = "default";
  LearnConfig values_;
  std::string engine_ = "sparse";
  std::vector<std::pair<CLI::Option*, std::function<void(LearnConfig&)>>> setters_;
};

/// LearnConfig of a named profile: "default", "bench-small" (full batch,
/// theta 0, lambda 0.5, stop on h <= epsilon) or "bench-large" (B = 1000,
/// theta 1e-3, epsilon 1e-8).
LearnConfig profile_config(const std::string& name);

struct GenerateArgs {
  unsigned d = 0;
  std::string model = "er";
  std::optional<double> degree;
  std::string noise = "gauss";
  std::optional<std::size_t> n;
  std::uint64_t seed = 0;
  double weight_low = 0.5;
  double weight_high = 2.0;
  bool raw_noise = false;
  std::optional<std::string> out_dir;
};

struct LearnArgs {
  std::string input;
  bool center = false;
  std::optional<std::string> out_dir;
  bool quiet = false;
};

struct EvaluateArgs {
  std::optional<std::string> learned;
  std::string truth;
  double tau = 0.0;
  std::optional<std::string> grid;
  std::optional<std::string> input;
  std::optional<std::string> eps_grid;
  std::optional<std::string> tau_grid;
  bool center = false;
  unsigned jobs = 1;
  std::optional<std::string> out_dir;
};

struct CheckGradArgs {
  unsigned d = 10;
  double density = 0.3;
  std::vector<unsigned> k{0, 1, 5};
  std::vector<double> alpha{0.5, 0.9};
  unsigned trials = 50;
  std::uint64_t seed = 0;
  double tol = 1e-6;
  double step = 1e-4;
  std::optional<std::string> out_dir;
};

struct BenchArgs {
  std::string suite;
  unsigned jobs = 1;
  unsigned seeds = 5;
  std::string dims;  // empty: suite default
  std::string models = "er";
  std::string noises = "gauss";
  std::string scale_d = "10000,100000";
  std::string scale_nnz = "100000,200000,1000000";
  unsigned k = 5;
  double alpha = 0.9;
  unsigned repeats = 3;
  bool correlation = false;
  std::optional<std::string> out_dir;
};

int cmd_generate(const GenerateArgs& args, std::ostream& out, std::ostream& err);
int cmd_learn(const LearnArgs& args, const LearnOptions& opts, std::ostream& out,
              std::ostream& err);
int cmd_evaluate(const EvaluateArgs& args, const LearnOptions& opts, std::ostream& out,
                 std::ostream& err);
int cmd_check_grad(const CheckGradArgs& args, std::ostream& out, std::ostream& err);
int cmd_bench(const BenchArgs& args, const LearnOptions& opts, std::ostream& out,
              std::ostream& err);

}  // namespace least::cli
