#include <doctest.h>

#include <cmath>
#include <random>

#include "least/acyclicity.hpp"
#include "least/errors.hpp"
#include "oracles.hpp"

using namespace least;

namespace {

SparseMatrix from_rows(Index d, std::initializer_list<double> v) {
  std::vector<double> a(v);
  return SparseMatrix::from_dense(d, d, a);
}

const SparseMatrix kTwoCycle = from_rows(2, {0, 1, 1, 0});
const SparseMatrix kChain = from_rows(3, {0, 1, 0, 0, 0, 1, 0, 0, 0});

bool entries_close(double a, double b, double rel, double abs) {
  return std::abs(a - b) <= std::max(abs, rel * std::abs(b));
}

}  // namespace

TEST_CASE("forward_bound examples") {
  CHECK(forward_bound(SparseMatrix(3, 3), {5, 0.9}).bound == 0.0);
  CHECK(forward_bound(SparseMatrix(3, 3), {0, 0.3}).bound == 0.0);

  const auto t = forward_bound(kTwoCycle, {0, 0.5});
  CHECK(t.levels.size() == 1);
  CHECK(t.levels[0].rows == DenseVector{1, 1});
  CHECK(t.levels[0].cols == DenseVector{1, 1});
  CHECK(t.levels[0].b == DenseVector{1, 1});
  CHECK(t.bound == 2.0);
  CHECK(oracle::spectral_radius(oracle::dense_of(hadamard(kTwoCycle, kTwoCycle)), 2) ==
        doctest::Approx(1.0));

  const auto c0 = forward_bound(kChain, {0, 0.5});
  CHECK(c0.levels[0].b == DenseVector{0, 1, 0});
  CHECK(c0.bound == 1.0);
  const auto c1 = forward_bound(kChain, {1, 0.5});
  CHECK(c1.levels[1].s.nnz() == 0);
  CHECK(c1.bound == 0.0);

  CHECK_THROWS_AS(forward_bound(SparseMatrix(2, 3), {}), ShapeError);
  CHECK_THROWS_AS(forward_bound(kTwoCycle, {1, 1.5}), DomainError);
}

TEST_CASE("forward_bound matches the dense recursion") {
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t d = 2 + trial % 25;
    const auto w = oracle::random_matrix(d, trial % 2 ? 0.15 : 0.4, gen);
    for (unsigned k : {0u, 1u, 5u}) {
      for (double alpha : {0.0, 0.5, 0.9, 1.0}) {
        const double expect = oracle::dense_bound(oracle::dense_of(w), d, k, alpha);
        const double got = forward_bound(w, {k, alpha}).bound;
        CHECK(entries_close(got, expect, 1e-12, 1e-14));
      }
    }
  }
}

TEST_CASE("backward_gradient examples") {
  const auto g0 = backward_gradient(forward_bound(SparseMatrix(4, 4), {}), SparseMatrix(4, 4), {});
  CHECK(g0.nnz() == 0);

  const BoundConfig cfg{0, 0.5};
  const auto g = backward_gradient(forward_bound(kTwoCycle, cfg), kTwoCycle, cfg);
  CHECK(g.at(0, 1) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(g.at(1, 0) == doctest::Approx(2.0).epsilon(1e-12));
  const auto fd = oracle::finite_difference(
      kTwoCycle, [&](const SparseMatrix& p) { return forward_bound(p, cfg).bound; }, 1e-6);
  CHECK(fd[0] == doctest::Approx(2.0).epsilon(1e-8));

  const auto single = from_rows(3, {0, 0, 0, 0, 0, 0.7, 0, 0, 0});
  for (unsigned k : {0u, 3u}) {
    const auto t = forward_bound(single, {k, 0.9});
    const auto a = backward_gradient(t, single, {k, 0.9});
    const auto b = backward_gradient_dense_reference(t, single, {k, 0.9});
    CHECK(a.nnz() == 1);
    CHECK(a == b);
  }
}

TEST_CASE("backward_gradient matches finite differences") {
  std::mt19937_64 gen(22);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t d = trial < 10 ? 10 : 3 + trial % 28;
    const BoundConfig cfg{trial < 10 ? 5u : static_cast<unsigned>(trial % 6),
                          trial % 3 == 0 ? 0.5 : 0.9};
    const auto w = oracle::random_matrix(d, 0.3, gen);
    const auto grad = backward_gradient(forward_bound(w, cfg), w, cfg);
    REQUIRE(grad.same_pattern(w));
    // The numerical side uses the independent dense recursion.
    const auto fd = oracle::finite_difference(w, [&](const SparseMatrix& p) {
      return oracle::dense_bound(oracle::dense_of(p), d, cfg.k, cfg.alpha);
    });
    for (std::size_t e = 0; e < w.nnz(); ++e) {
      const double a = grad.values()[e];
      if (std::abs(a) >= 1e-4) {
        CHECK(std::abs(a - fd[e]) / std::abs(a) <= 1e-6);
      } else {
        CHECK(std::abs(a - fd[e]) <= 1e-8);
      }
    }
  }
}

TEST_CASE("masked gradient equals the unmasked dense reference") {
  std::mt19937_64 gen(23);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 2 + trial % 29;
    const BoundConfig cfg{static_cast<unsigned>(trial % 7), trial % 4 * 0.25 + 0.1};
    const auto w = oracle::random_matrix(d, 0.05 + 0.1 * (trial % 5), gen);
    const auto t = forward_bound(w, cfg);
    const auto a = backward_gradient(t, w, cfg);
    const auto b = backward_gradient_dense_reference(t, w, cfg);
    REQUIRE(a.same_pattern(b));
    for (std::size_t e = 0; e < a.nnz(); ++e) {
      CHECK(std::abs(a.values()[e] - b.values()[e]) <= 1e-12 * std::max(1.0, std::abs(b.values()[e])));
    }
  }
  CHECK(backward_gradient_dense_reference(forward_bound(SparseMatrix(3, 3), {}), SparseMatrix(3, 3), {})
            .nnz() == 0);
}

TEST_CASE("trace and config mismatches are rejected") {
  const auto t = forward_bound(kTwoCycle, {2, 0.9});
  CHECK_THROWS_AS(backward_gradient(t, kTwoCycle, {3, 0.9}), std::invalid_argument);
  CHECK_THROWS_AS(backward_gradient(t, kTwoCycle, {2, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(backward_gradient(t, kChain, {2, 0.9}), std::invalid_argument);
  CHECK_THROWS_AS(backward_gradient_dense_reference(t, kChain, {2, 0.9}), std::invalid_argument);
  const auto big = SparseMatrix(kDenseReferenceGuard + 1, kDenseReferenceGuard + 1);
  CHECK_THROWS_AS(backward_gradient_dense_reference(forward_bound(big, {}), big, {}), GuardError);
}

TEST_CASE("the bound is never below the spectral radius") {
  std::mt19937_64 gen(24);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int cases = 0;
  for (double density : {0.05, 0.2, 0.5}) {
    for (int trial = 0; trial < 40; ++trial, ++cases) {
      const std::size_t d = 2 + (trial * 7) % 49;
      const auto w = oracle::random_matrix(d, density, gen, 0.0, 2.0);
      const double rho = spectral_radius_dense(w).value;
      for (unsigned k : {0u, 1u, 5u}) {
        const double alpha = trial % 5 == 0 ? (trial % 2 ? 0.0 : 1.0) : u(gen);
        CHECK(forward_bound(w, {k, alpha}).bound >= rho - 1e-9);
      }
    }
  }
  CHECK(cases >= 100);
}

TEST_CASE("spectral radius oracle") {
  CHECK(spectral_radius_dense(SparseMatrix(3, 3)).value == 0.0);
  CHECK(spectral_radius_dense(kTwoCycle).value == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(spectral_radius_dense(kChain).value == 0.0);
  std::mt19937_64 gen(25);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t d = 2 + trial % 30;
    const auto w = oracle::random_matrix(d, trial % 2 ? 0.1 : 0.3, gen);
    const auto s = hadamard(w, w);
    const auto r = spectral_radius_nonnegative(s);
    CHECK(r.converged);
    const double expect = oracle::spectral_radius(oracle::dense_of(s), d);
    CHECK(std::abs(r.value - expect) <= 1e-8 * std::max(1.0, expect));
  }
  CHECK_THROWS_AS(spectral_radius_dense(SparseMatrix(5, 5), 4), GuardError);
}

TEST_CASE("rescaling preserves the spectral radius when every b is positive") {
  std::mt19937_64 gen(26);
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t d = 3 + trial % 20;
    const auto w = oracle::random_matrix(d, 0.6, gen);
    const BoundConfig cfg{5, 0.9};
    const auto t = forward_bound(w, cfg);
    bool positive = true;
    for (unsigned j = 0; j < cfg.k; ++j)
      for (double b : t.levels[j].b) positive = positive && b > 0.0;
    if (!positive) continue;
    ++checked;
    const double r0 = spectral_radius_nonnegative(t.levels[0].s).value;
    const double rk = spectral_radius_nonnegative(t.levels[cfg.k].s).value;
    CHECK(std::abs(rk - r0) <= 1e-8 * std::max(1.0, r0));
    CHECK(std::abs(r0 - oracle::spectral_radius(oracle::dense_of(t.levels[cfg.k].s), d)) <=
          1e-8 * std::max(1.0, r0));
  }
  CHECK(checked >= 20);
}

TEST_CASE("every small DAG is annihilated within d-1 rescalings") {
  std::mt19937_64 gen(27);
  std::uniform_real_distribution<double> mag(0.2, 2.0);
  for (std::size_t d = 2; d <= 4; ++d) {
    std::vector<std::pair<Index, Index>> slots;
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < d; ++j)
        if (i != j) slots.push_back({i, j});
    std::size_t dags = 0;
    for (std::uint32_t mask = 0; mask < (1u << slots.size()); ++mask) {
      oracle::EdgeSet edges;
      std::vector<Triplet> t;
      for (std::size_t s = 0; s < slots.size(); ++s) {
        if (!(mask >> s & 1u)) continue;
        edges.insert({slots[s].first, slots[s].second});
        t.push_back({slots[s].first, slots[s].second, mag(gen)});
      }
      if (!oracle::acyclic_dfs(edges, d)) continue;
      ++dags;
      const auto w = SparseMatrix::from_triplets(static_cast<Index>(d), static_cast<Index>(d), t);
      for (double alpha : {0.5, 0.9}) {
        bool zero = false;
        for (unsigned k = 0; k + 1 <= d && !zero; ++k) zero = forward_bound(w, {k, alpha}).bound == 0.0;
        CHECK(zero);
      }
    }
    CHECK(dags == (d == 2 ? 3u : d == 3 ? 25u : 543u));  // labelled DAG counts
  }
}

TEST_CASE("random DAGs up to d=20 are annihilated") {
  std::mt19937_64 gen(28);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t d = 5 + trial % 16;
    // Strictly upper triangular in a random relabelling.
    std::vector<Index> perm(d);
    for (std::size_t i = 0; i < d; ++i) perm[i] = static_cast<Index>(i);
    std::shuffle(perm.begin(), perm.end(), gen);
    auto tri = oracle::random_matrix(d, 0.3, gen);
    std::vector<Triplet> t;
    for (const auto& e : tri.to_triplets())
      if (e.row < e.col) t.push_back({perm[e.row], perm[e.col], e.value});
    const auto w = SparseMatrix::from_triplets(static_cast<Index>(d), static_cast<Index>(d), t);
    bool zero = false;
    for (unsigned k = 0; k + 1 <= d && !zero; ++k) zero = forward_bound(w, {k, 0.9}).bound == 0.0;
    CHECK(zero);
  }
}

TEST_CASE("h_exact and g_exact") {
  CHECK(h_exact(kChain) == 0.0);
  CHECK(h_exact(SparseMatrix(4, 4)) == 0.0);
  CHECK(h_exact(kTwoCycle) == doctest::Approx(2.0 * std::cosh(1.0) - 2.0).epsilon(1e-12));
  CHECK(g_exact(kChain) == 0.0);
  CHECK(g_exact(SparseMatrix(4, 4)) == 0.0);
  CHECK(g_exact(kTwoCycle) == 2.0);

  std::mt19937_64 gen(29);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t d = 2 + trial % 15;
    const auto w = oracle::random_matrix(d, 0.3, gen, 0.1, 1.2);
    const auto s = oracle::dense_of(hadamard(w, w));
    const double h = oracle::trace_exp_minus_d(s, d);
    CHECK(std::abs(h_exact(w) - h) <= 1e-10 * std::max(1.0, h));
    const double g = oracle::trace_power_minus_d(s, d);
    CHECK(std::abs(g_exact(w) - g) <= 1e-10 * std::max(1.0, g));
  }

  std::vector<Triplet> huge;
  for (Index i = 0; i < 60; ++i) huge.push_back({i, (i + 1) % 60, 1e5});
  const auto cyc = SparseMatrix::from_triplets(60, 60, huge);
  CHECK(std::isinf(g_exact(cyc)));
  CHECK_THROWS_AS(h_exact(SparseMatrix(10, 10), 5), GuardError);
  CHECK_THROWS_AS(g_exact(SparseMatrix(10, 10), 5), GuardError);
}

TEST_CASE("consistency thresholds") {
  const auto t = consistency_thresholds(1.0, 10, 0.9);
  CHECK(t.h_threshold == doctest::Approx(std::log(1.1)).epsilon(1e-15));
  CHECK(t.h_threshold == doctest::Approx(0.0953).epsilon(1e-3));
  CHECK(t.g_threshold == doctest::Approx(-2.0 / 0.9).epsilon(1e-12));
  CHECK(t.g_threshold_unsatisfiable());
  CHECK(consistency_thresholds(1e6, 10, 0.9).h_threshold > consistency_thresholds(1e3, 10, 0.9).h_threshold);
  CHECK_THROWS_AS(consistency_thresholds(0.0, 10, 0.9), DomainError);
  CHECK_THROWS_AS(consistency_thresholds(1.0, 1, 0.9), DomainError);
  CHECK_THROWS_AS(consistency_thresholds(1.0, 10, 1.0), DomainError);
}

TEST_CASE("a bound below ln(eps/d + 1) keeps h below eps") {
  std::mt19937_64 gen(30);
  std::uniform_real_distribution<double> frac(0.05, 1.0);
  for (double eps : {1e-2, 1e-4}) {
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t d = 2 + trial % 30;
      auto w = oracle::random_matrix(d, 0.3, gen);
      const BoundConfig cfg{static_cast<unsigned>(trial % 6), 0.9};
      const double bound = forward_bound(w, cfg).bound;
      if (bound == 0.0) continue;
      const double target = frac(gen) * consistency_thresholds(eps, d, 0.9).h_threshold;
      // The bound is homogeneous of degree 2 in W.
      const double scale = std::sqrt(target / bound);
      for (auto& v : w.values()) v *= scale;
      REQUIRE(forward_bound(w, cfg).bound <= consistency_thresholds(eps, d, 0.9).h_threshold * (1 + 1e-12));
      CHECK(h_exact(w) <= eps);
    }
  }
}
