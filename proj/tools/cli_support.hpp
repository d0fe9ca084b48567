#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "least/datagen.hpp"
#include "least/evaluation.hpp"
#include "least/learner.hpp"

namespace least::cli {

using nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";
/// Environment variable naming the default output directory.
inline constexpr const char* kOutDirEnv = "LEAST_OUT_DIR";

/// --out-dir if given, else $LEAST_OUT_DIR, else ./least-out. Created if missing.
std::filesystem::path resolve_out_dir(const std::optional<std::string>& flag);

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// Collects what a run read and wrote and emits manifest.json at the end.
class Manifest {
 public:
  Manifest(std::string command, std::filesystem::path out_dir);
  void set_config(json config) { config_ = std::move(config); }
  void add_input(const std::filesystem::path& path);
  void add_output(const std::filesystem::path& path);
  /// Writes <out_dir>/manifest.json and returns its path.
  std::filesystem::path write() const;

 private:
  std::string command_;
  std::filesystem::path out_dir_;
  json config_ = json::object();
  std::map<std::string, std::string> inputs_;
  std::vector<std::string> outputs_;
  std::chrono::steady_clock::time_point start_;
};

json to_json(const LearnConfig& cfg);
json to_json(const EvalReport& report);
json to_json(const OuterRecord& rec);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const json& value);
/// iteration,delta,h,loss,objective,rho,eta,nnz,inner_iterations,seconds (h empty when absent).
void write_trace_csv(const std::filesystem::path& path, const std::vector<OuterRecord>& trace);

/// Parses a comma-separated list of numbers.
std::vector<double> parse_number_list(const std::string& text);

}  // namespace least::cli
