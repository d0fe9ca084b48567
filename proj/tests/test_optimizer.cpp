#include <doctest.h>

#include <cmath>
#include <random>

#include "least/errors.hpp"
#include "least/optimizer.hpp"
#include "oracles.hpp"

using namespace least;

namespace {

// Textbook Adam on full d x d arrays, touching only the given support.
struct DenseAdam {
  std::size_t d;
  std::vector<double> m, v;
  std::uint64_t t = 0;
  explicit DenseAdam(std::size_t dim) : d(dim), m(dim * dim, 0.0), v(dim * dim, 0.0) {}
  void step(oracle::Dense& w, const oracle::Dense& g, const oracle::EdgeSet& support, double lr) {
    ++t;
    for (const auto& [i, j] : support) {
      const std::size_t k = i * d + j;
      m[k] = 0.9 * m[k] + 0.1 * g[k];
      v[k] = 0.999 * v[k] + 0.001 * g[k] * g[k];
      const double mh = m[k] / (1 - std::pow(0.9, static_cast<double>(t)));
      const double vh = v[k] / (1 - std::pow(0.999, static_cast<double>(t)));
      w[k] -= lr * mh / (std::sqrt(vh) + 1e-8);
    }
  }
};

}  // namespace

TEST_CASE("glorot_sparse_init") {
  const Index d = 1000;
  const double p = 1e-2;
  const double limit = std::sqrt(6.0 / (2.0 * d));
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto w = glorot_sparse_init(d, p, seed);
    const double trials = static_cast<double>(d) * (d - 1);
    const double mean = trials * p;
    const double sigma = std::sqrt(trials * p * (1 - p));
    CHECK(std::abs(static_cast<double>(w.nnz()) - mean) <= 4 * sigma);
    for (const auto& t : w.to_triplets()) {
      CHECK(t.row != t.col);
      CHECK(std::abs(t.value) <= limit);
    }
  }
  CHECK(glorot_sparse_init(d, p, 7) == glorot_sparse_init(d, p, 7));
  CHECK_FALSE(glorot_sparse_init(d, p, 7) == glorot_sparse_init(d, p, 8));
  CHECK(glorot_sparse_init(50, 1e-6, 1).nnz() == 0);
  CHECK(glorot_sparse_init(20, 1.0, 1).nnz() == 20u * 19u);
  CHECK_THROWS_AS(glorot_sparse_init(10, 0.0, 1), DomainError);
  CHECK_THROWS_AS(glorot_sparse_init(10, 1.5, 1), DomainError);
}

TEST_CASE("adam_step on a single entry") {
  SparseMatrix w = SparseMatrix::from_triplets(2, 2, {{0, 1, 1.0}});
  auto state = AdamState::for_weights(w, 0.01);
  const SparseMatrix g = SparseMatrix::from_triplets(2, 2, {{0, 1, 3.0}});
  adam_step(state, w, g);
  CHECK(w.at(0, 1) == doctest::Approx(1.0 - 0.01 * 3.0 / (3.0 + 1e-8)).epsilon(1e-15));
  CHECK(w.at(0, 1) == doctest::Approx(0.99).epsilon(1e-9));
  CHECK(state.t == 1);

  SparseMatrix z = SparseMatrix::from_triplets(2, 2, {{0, 1, 1.0}});
  auto zs = AdamState::for_weights(z);
  for (int i = 0; i < 5; ++i) adam_step(zs, z, SparseMatrix(2, 2));
  CHECK(z.at(0, 1) == 1.0);
}

TEST_CASE("adam_step matches dense Adam on the support") {
  std::mt19937_64 gen(41);
  const std::size_t d = 12;
  auto w = oracle::random_matrix(d, 0.3, gen, 0.1, 1.0, false);
  auto dense = oracle::dense_of(w);
  const auto support = oracle::edges_of(w);
  auto state = AdamState::for_weights(w, 0.05);
  DenseAdam ref(d);
  std::normal_distribution<double> nd;
  for (int step = 0; step < 50; ++step) {
    oracle::Dense g(d * d, 0.0);
    std::vector<Triplet> t;
    for (const auto& [i, j] : support) {
      if (step % 3 == 0 && (i + j) % 2 == 0) continue;  // sparse gradients: missing entries are 0
      g[i * d + j] = nd(gen);
      t.push_back({static_cast<Index>(i), static_cast<Index>(j), g[i * d + j]});
    }
    adam_step(state, w, SparseMatrix::from_triplets(static_cast<Index>(d), static_cast<Index>(d), t));
    ref.step(dense, g, support, 0.05);
  }
  const auto got = oracle::dense_of(w);
  for (std::size_t k = 0; k < d * d; ++k) CHECK(std::abs(got[k] - dense[k]) <= 1e-12);
  for (double v : state.v.values()) CHECK(v >= 0.0);
}

TEST_CASE("adam_step contract violations") {
  SparseMatrix w = SparseMatrix::from_triplets(3, 3, {{0, 1, 1.0}});
  auto state = AdamState::for_weights(w);
  CHECK_THROWS_AS(adam_step(state, w, SparseMatrix::from_triplets(3, 3, {{1, 0, 1.0}})),
                  std::logic_error);
  CHECK_THROWS_AS(adam_step(state, w, SparseMatrix(2, 2)), std::logic_error);
  SparseMatrix grown = SparseMatrix::from_triplets(3, 3, {{0, 1, 1.0}, {2, 0, 0.5}});
  CHECK_THROWS_AS(adam_step(state, grown, SparseMatrix(3, 3)), std::logic_error);
}

TEST_CASE("resync_moments keeps survivors and zeroes newcomers") {
  SparseMatrix w = SparseMatrix::from_triplets(3, 3, {{0, 1, 1.0}, {1, 2, -1.0}});
  auto state = AdamState::for_weights(w);
  adam_step(state, w, SparseMatrix::from_triplets(3, 3, {{0, 1, 2.0}, {1, 2, 4.0}}));
  const double m01 = state.m.at(0, 1);
  SparseMatrix next = SparseMatrix::from_triplets(3, 3, {{0, 1, w.at(0, 1)}, {2, 0, 0.0}});
  resync_moments(state, next);
  CHECK(state.m.same_pattern(next));
  CHECK(state.v.same_pattern(next));
  CHECK(state.m.at(0, 1) == m01);
  CHECK(state.m.at(2, 0) == 0.0);
  CHECK(state.v.at(2, 0) == 0.0);
  CHECK(state.m.nnz() == 2);
}

TEST_CASE("threshold_filter") {
  const auto w = SparseMatrix::from_dense(2, 2, std::vector<double>{0, 0.05, -0.2, 0});
  const auto f = threshold_filter(w, 0.1);
  CHECK(f.nnz() == 1);
  CHECK(f.at(1, 0) == -0.2);
  CHECK(threshold_filter(w, 0.0) == w);
  CHECK(threshold_filter(f, 0.1) == f);
  CHECK(threshold_filter(w, 0.2).nnz() == 1);  // |-0.2| is not below 0.2
}
