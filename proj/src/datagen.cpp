#include "least/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <stdexcept>

#include "least/errors.hpp"
#include "least/rng.hpp"

namespace least {

namespace {
constexpr double kEulerGamma = 0.57721566490153286061;
}

std::string to_string(GraphModel model) {
  return model == GraphModel::kErdosRenyi ? "er" : "sf";
}

std::string to_string(NoiseKind noise) {
  switch (noise) {
    case NoiseKind::kGaussian:
      return "gauss";
    case NoiseKind::kExponential:
      return "exp";
    case NoiseKind::kGumbel:
      return "gumbel";
  }
  return "unknown";
}

GraphModel parse_graph_model(const std::string& name) {
  if (name == "er") return GraphModel::kErdosRenyi;
  if (name == "sf") return GraphModel::kScaleFree;
  throw std::invalid_argument("unknown graph model '" + name + "' (expected er or sf)");
}

NoiseKind parse_noise(const std::string& name) {
  if (name == "gauss") return NoiseKind::kGaussian;
  if (name == "exp") return NoiseKind::kExponential;
  if (name == "gumbel") return NoiseKind::kGumbel;
  throw std::invalid_argument("unknown noise '" + name + "' (expected gauss, exp or gumbel)");
}

std::optional<std::vector<Index>> topological_order(const SparseMatrix& m) {
  if (!m.is_square()) throw ShapeError("topological_order: matrix must be square");
  const Index d = m.rows();
  std::vector<Index> indegree(d, 0);
  for (Index c : m.col_indices()) ++indegree[c];
  std::priority_queue<Index, std::vector<Index>, std::greater<>> ready;
  for (Index i = 0; i < d; ++i)
    if (indegree[i] == 0) ready.push(i);
  std::vector<Index> order;
  order.reserve(d);
  while (!ready.empty()) {
    const Index i = ready.top();
    ready.pop();
    order.push_back(i);
    for (Index j : m.row_cols(i))
      if (--indegree[j] == 0) ready.push(j);
  }
  if (order.size() != d) return std::nullopt;
  return order;
}

bool is_acyclic(const SparseMatrix& m) { return topological_order(m).has_value(); }

SparseMatrix random_dag(Index d, GraphModel model, double avg_degree, std::uint64_t seed) {
  if (d < 2) throw std::invalid_argument("random_dag: d must be at least 2");
  if (!(avg_degree >= 0.0) || avg_degree >= static_cast<double>(d)) {
    throw std::invalid_argument("random_dag: avg_degree must lie in [0, d)");
  }
  Rng rng(seed, Stream::kGraph);
  std::vector<Triplet> edges;

  if (model == GraphModel::kErdosRenyi) {
    // Random topological position for every node.
    std::vector<Index> position(d);
    std::iota(position.begin(), position.end(), Index{0});
    for (Index i = d - 1; i > 0; --i) {
      std::swap(position[i], position[static_cast<Index>(rng.below(i + 1))]);
    }
    const double p = avg_degree / static_cast<double>(d - 1);
    // Pairs (a, b), a < b, enumerated row by row; geometric skipping keeps the
    // cost proportional to the number of edges.
    const std::uint64_t total = static_cast<std::uint64_t>(d) * (d - 1) / 2;
    std::uint64_t slot = rng.geometric(p);
    Index a = 0;
    std::uint64_t row_start = 0;
    while (slot < total) {
      while (slot >= row_start + (d - 1 - a)) {
        row_start += d - 1 - a;
        ++a;
      }
      const auto b = static_cast<Index>(a + 1 + (slot - row_start));
      if (position[a] < position[b]) {
        edges.push_back({a, b, 1.0});
      } else {
        edges.push_back({b, a, 1.0});
      }
      const std::uint64_t skip = rng.geometric(p);
      if (skip >= total) break;
      slot += skip + 1;
    }
  } else {
    const auto per_node = static_cast<Index>(std::llround(avg_degree / 2.0));
    std::vector<double> weight;  // degree + 1 per existing node
    weight.reserve(d);
    std::vector<Index> degree(d, 0);
    for (Index node = 0; node < d; ++node) {
      const Index m = std::min(per_node, node);
      std::vector<Index> targets;
      // Sample m distinct older nodes proportionally to degree + 1.
      while (targets.size() < m) {
        double total = 0.0;
        for (Index old = 0; old < node; ++old) {
          if (std::find(targets.begin(), targets.end(), old) == targets.end()) {
            total += degree[old] + 1.0;
          }
        }
        double u = rng.uniform() * total;
        Index pick = node;
        for (Index old = 0; old < node; ++old) {
          if (std::find(targets.begin(), targets.end(), old) != targets.end()) continue;
          pick = old;
          u -= degree[old] + 1.0;
          if (u < 0.0) break;
        }
        targets.push_back(pick);
      }
      for (Index old : targets) {
        edges.push_back({node, old, 1.0});
        ++degree[old];
        ++degree[node];
      }
    }
  }
  auto pattern = SparseMatrix::from_triplets(d, d, std::move(edges));
  if (!is_acyclic(pattern)) throw std::logic_error("random_dag produced a cycle");
  return pattern;
}

SparseMatrix assign_weights(const SparseMatrix& pattern, std::uint64_t seed, WeightRange range) {
  if (!(range.low >= 0.0 && range.high >= range.low)) {
    throw std::invalid_argument("assign_weights: need 0 <= low <= high");
  }
  Rng rng(seed, Stream::kWeights);
  SparseMatrix out = pattern;
  for (auto& v : out.values()) {
    const double magnitude = rng.uniform(range.low, range.high);
    v = rng.uniform() < 0.5 ? -magnitude : magnitude;
  }
  return out;
}

DenseMatrix sample_lsem(const SparseMatrix& w_true, std::size_t n, NoiseKind noise,
                        std::uint64_t seed, bool centered) {
  const auto order = topological_order(w_true);
  if (!order) throw std::invalid_argument("sample_lsem: W must be acyclic");
  const Index d = w_true.rows();
  const SparseMatrix parents = transpose(w_true);  // row j lists the parents of j
  Rng rng(seed, Stream::kNoise);
  DenseMatrix x(n, d);
  for (std::size_t s = 0; s < n; ++s) {
    auto row = x.row(s);
    for (Index j : *order) {
      double value = 0.0;
      switch (noise) {
        case NoiseKind::kGaussian:
          value = rng.normal();
          break;
        case NoiseKind::kExponential:
          value = rng.exponential() - (centered ? 1.0 : 0.0);
          break;
        case NoiseKind::kGumbel:
          value = rng.gumbel() - (centered ? kEulerGamma : 0.0);
          break;
      }
      const auto pc = parents.row_cols(j);
      const auto pv = parents.row_values(j);
      for (std::size_t e = 0; e < pc.size(); ++e) value += pv[e] * row[pc[e]];
      row[j] = value;
    }
  }
  return x;
}

GraphCase make_graph_case(Index d, GraphModel model, double avg_degree, NoiseKind noise,
                          std::size_t n, std::uint64_t seed, WeightRange weights,
                          bool centered) {
  GraphCase gc;
  gc.d = d;
  gc.model = model;
  gc.avg_degree = avg_degree;
  gc.noise = noise;
  gc.n = n;
  gc.seed = seed;
  gc.weights = weights;
  gc.centered = centered;
  gc.adjacency = random_dag(d, model, avg_degree, seed);
  gc.w_true = assign_weights(gc.adjacency, seed, weights);
  gc.x = sample_lsem(gc.w_true, n, noise, seed, centered);
  return gc;
}

}  // namespace least
