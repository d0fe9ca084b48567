#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "least/dense.hpp"
#include "least/sparse.hpp"

namespace least {

enum class GraphModel { kErdosRenyi, kScaleFree };
enum class NoiseKind { kGaussian, kExponential, kGumbel };

std::string to_string(GraphModel model);
std::string to_string(NoiseKind noise);
GraphModel parse_graph_model(const std::string& name);  // "er" | "sf"
NoiseKind parse_noise(const std::string& name);         // "gauss" | "exp" | "gumbel"

/// Topological order of the graph whose edges are the stored entries of m
/// (edge i -> j for entry (i, j)); std::nullopt if it has a cycle. Kahn's
/// algorithm, smallest available node first.
std::optional<std::vector<Index>> topological_order(const SparseMatrix& m);
bool is_acyclic(const SparseMatrix& m);

/// 0/1 adjacency of a random DAG.
///  ER: each unordered pair is an edge with probability avg_degree/(d-1),
///      oriented along a uniformly random node permutation.
///  SF: Barabasi-Albert attachment of avg_degree/2 edges per new node,
///      preferential on (degree + 1), oriented new -> old; nodes keep their
///      attachment order as labels.
/// Throws std::invalid_argument if d < 2 or avg_degree >= d.
SparseMatrix random_dag(Index d, GraphModel model, double avg_degree, std::uint64_t seed);

struct WeightRange {
  double low = 0.5;
  double high = 2.0;
};

/// Independent weights uniform on [-high, -low] U [low, high].
SparseMatrix assign_weights(const SparseMatrix& pattern, std::uint64_t seed,
                            WeightRange range = {});

/// n samples of the linear SEM x_j = sum_i W[i,j] x_i + noise_j, generated in
/// topological order. Noise has unit scale and, when `centered`, zero mean
/// (Exponential shifted by -1, Gumbel by minus the Euler-Mascheroni constant).
DenseMatrix sample_lsem(const SparseMatrix& w_true, std::size_t n, NoiseKind noise,
                        std::uint64_t seed, bool centered = true);

struct GraphCase {
  Index d = 0;
  SparseMatrix w_true;
  SparseMatrix adjacency;
  GraphModel model = GraphModel::kErdosRenyi;
  double avg_degree = 2.0;
  NoiseKind noise = NoiseKind::kGaussian;
  std::size_t n = 0;
  DenseMatrix x;
  std::uint64_t seed = 0;
  WeightRange weights;
  bool centered = true;
};

/// Graph, weights and samples drawn from independent streams of one seed.
GraphCase make_graph_case(Index d, GraphModel model, double avg_degree, NoiseKind noise,
                          std::size_t n, std::uint64_t seed, WeightRange weights = {},
                          bool centered = true);

}  // namespace least
