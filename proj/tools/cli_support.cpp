#include "cli_support.hpp"

#include <openssl/evp.h>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <memory>
#include <sstream>

#include "least/errors.hpp"
#include "least/matrix_market.hpp"

namespace least::cli {

namespace fs = std::filesystem;

fs::path resolve_out_dir(const std::optional<std::string>& flag) {
  fs::path dir;
  if (flag) {
    dir = *flag;
  } else if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') {
    dir = env;
  } else {
    dir = "least-out";
  }
  fs::create_directories(dir);
  return dir;
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256: digest initialisation failed");
  }
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return hex.str();
}

Manifest::Manifest(std::string command, fs::path out_dir)
    : command_(std::move(command)), out_dir_(std::move(out_dir)),
      start_(std::chrono::steady_clock::now()) {}

void Manifest::add_input(const fs::path& path) { inputs_[path.string()] = sha256_file(path); }

void Manifest::add_output(const fs::path& path) { outputs_.push_back(path.string()); }

fs::path Manifest::write() const {
  json m;
  m["command"] = command_;
  m["tool_version"] = kVersion;
  m["config"] = config_;
  m["inputs"] = json::object();
  for (const auto& [path, digest] : inputs_) m["inputs"][path] = {{"sha256", digest}};
  m["outputs"] = outputs_;
  m["wall_time"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  const fs::path path = out_dir_ / "manifest.json";
  write_json(path, m);
  return path;
}

json to_json(const LearnConfig& cfg) {
  json j;
  j["zeta"] = cfg.zeta;
  j["lambda"] = cfg.lambda;
  j["epsilon"] = cfg.epsilon;
  j["k"] = cfg.k;
  j["alpha"] = cfg.alpha;
  // "full" stands for B = n.
  if (cfg.batch_size == std::numeric_limits<std::size_t>::max()) {
    j["batch_size"] = "full";
  } else {
    j["batch_size"] = cfg.batch_size;
  }
  j["theta"] = cfg.theta;
  j["t_outer"] = cfg.t_outer;
  j["t_inner"] = cfg.t_inner;
  j["lr"] = cfg.lr;
  j["rho_init"] = cfg.rho_init;
  j["eta_init"] = cfg.eta_init;
  j["rho_growth"] = cfg.rho_growth;
  j["rho_max"] = cfg.rho_max;
  j["seed"] = cfg.seed;
  j["engine"] = to_string(cfg.engine);
  j["warm_start"] = cfg.warm_start;
  j["oracle_trace"] = cfg.oracle_trace;
  j["stop_on_h"] = cfg.stop_on_h;
  j["grow_threshold"] = cfg.effective_grow_threshold();
  j["grow_interval"] = cfg.grow_interval;
  j["grow_block"] = cfg.grow_block;
  j["inner_tolerance"] = cfg.inner_tolerance;
  j["inner_window"] = cfg.inner_window;
  return j;
}

json to_json(const EvalReport& r) {
  json j;
  j["f1"] = r.f1;
  j["shd"] = r.shd;
  j["fdr"] = r.fdr;
  j["tpr"] = r.tpr;
  j["fpr"] = r.fpr;
  j["auc_roc"] = r.auc_roc ? json(*r.auc_roc) : json(nullptr);
  j["predicted_edges"] = r.predicted_edges;
  j["truth_edges"] = r.truth_edges;
  j["true_positive_edges"] = r.true_positive_edges;
  j["reversed"] = r.reversed;
  j["false_positive"] = r.false_positive;
  j["false_negative"] = r.false_negative;
  j["missing"] = r.missing;
  j["best_epsilon"] = r.best_epsilon ? json(*r.best_epsilon) : json(nullptr);
  j["best_tau"] = r.best_tau ? json(*r.best_tau) : json(nullptr);
  return j;
}

json to_json(const OuterRecord& rec) {
  json j;
  j["iteration"] = rec.iteration;
  j["delta"] = rec.bound;
  j["h"] = rec.h ? json(*rec.h) : json(nullptr);
  j["loss"] = rec.loss;
  j["objective"] = rec.objective;
  j["rho"] = rec.rho;
  j["eta"] = rec.eta;
  j["nnz"] = rec.nnz;
  j["inner_iterations"] = rec.inner_iterations;
  j["seconds"] = rec.seconds;
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_json(const fs::path& path, const json& value) { write_text(path, value.dump(2) + "\n"); }

void write_trace_csv(const fs::path& path, const std::vector<OuterRecord>& trace) {
  std::ostringstream o;
  o << "iteration,delta,h,loss,objective,rho,eta,nnz,inner_iterations,seconds\n";
  for (const auto& r : trace) {
    o << r.iteration << ',' << format_double(r.bound) << ',' << (r.h ? format_double(*r.h) : "")
      << ',' << format_double(r.loss) << ',' << format_double(r.objective) << ','
      << format_double(r.rho) << ',' << format_double(r.eta) << ',' << r.nnz << ','
      << r.inner_iterations << ',' << format_double(r.seconds) << '\n';
  }
  write_text(path, o.str());
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (token.empty()) continue;
    out.push_back(parse_double(token));
  }
  if (out.empty()) throw ParseError("empty number list '" + text + "'");
  return out;
}

}  // namespace least::cli
