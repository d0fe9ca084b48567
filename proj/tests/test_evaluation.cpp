#include <doctest.h>

#include <random>

#include "least/datagen.hpp"
#include "least/errors.hpp"
#include "least/evaluation.hpp"
#include "oracles.hpp"

using namespace least;

namespace {

SparseMatrix graph(Index d, std::initializer_list<std::pair<Index, Index>> edges) {
  std::vector<Triplet> t;
  for (const auto& [i, j] : edges) t.push_back({i, j, 1.0});
  return SparseMatrix::from_triplets(d, d, t);
}

SparseMatrix random_graph(std::size_t d, double p, std::mt19937_64& gen) {
  std::bernoulli_distribution coin(p);
  std::vector<Triplet> t;
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j)
      if (i != j && coin(gen)) t.push_back({i, j, 1.0});
  return SparseMatrix::from_triplets(static_cast<Index>(d), static_cast<Index>(d), t);
}

// At most one direction per pair.
SparseMatrix random_oriented(std::size_t d, double p, std::mt19937_64& gen) {
  std::bernoulli_distribution coin(p), flip(0.5);
  std::vector<Triplet> t;
  for (Index i = 0; i < d; ++i)
    for (Index j = i + 1; j < d; ++j)
      if (coin(gen)) t.push_back(flip(gen) ? Triplet{i, j, 1.0} : Triplet{j, i, 1.0});
  return SparseMatrix::from_triplets(static_cast<Index>(d), static_cast<Index>(d), t);
}

}  // namespace

TEST_CASE("compare_graphs examples") {
  const auto truth = graph(3, {{0, 1}, {1, 2}});
  const auto same = compare_graphs(truth, truth);
  CHECK(same.f1 == 1.0);
  CHECK(same.shd == 0);
  CHECK(same.fdr == 0.0);

  const auto empty = compare_graphs(SparseMatrix(3, 3), truth);
  CHECK(empty.f1 == 0.0);
  CHECK(empty.shd == 2);

  const auto r = compare_graphs(graph(3, {{0, 1}, {2, 1}}), truth);
  CHECK(r.true_positive_edges == 1);
  CHECK(r.reversed == 1);
  CHECK(r.false_negative == 1);
  CHECK(r.false_positive == 0);
  CHECK(r.shd == 1);
  CHECK(r.f1 == 0.5);

  CHECK(compare_graphs(SparseMatrix(3, 3), SparseMatrix(3, 3)).f1 == 1.0);
  CHECK_THROWS_AS(compare_graphs(SparseMatrix(3, 3), SparseMatrix(4, 4)), ShapeError);
  CHECK_THROWS_AS(compare_graphs(graph(3, {{1, 1}}), truth), std::invalid_argument);
}

TEST_CASE("compare_graphs on a Sachs-shaped case") {
  // 17 true edges on 11 nodes; 15 predicted of which 7 match exactly.
  std::vector<std::pair<Index, Index>> truth_edges;
  for (Index i = 0; i < 11 && truth_edges.size() < 17; ++i)
    for (Index j = i + 1; j < 11 && truth_edges.size() < 17; j += 3) truth_edges.push_back({i, j});
  REQUIRE(truth_edges.size() == 17);
  std::vector<Triplet> pred;
  for (std::size_t e = 0; e < 7; ++e) pred.push_back({truth_edges[e].first, truth_edges[e].second, 1.0});
  for (std::size_t e = 7; e < 10; ++e) pred.push_back({truth_edges[e].second, truth_edges[e].first, 1.0});
  std::vector<Triplet> truth_t;
  for (const auto& [i, j] : truth_edges) truth_t.push_back({i, j, 1.0});
  const auto truth = SparseMatrix::from_triplets(11, 11, truth_t);
  for (Index j = 10; pred.size() < 15; --j)
    if (truth.at(0, j) == 0.0 && truth.at(j, 0) == 0.0) pred.push_back({j, 0, 1.0});
  const auto r = compare_graphs(SparseMatrix::from_triplets(11, 11, pred), truth);
  CHECK(r.predicted_edges == 15);
  CHECK(r.true_positive_edges == 7);
  CHECK(r.tpr == doctest::Approx(0.412).epsilon(1e-3));
}

TEST_CASE("compare_graphs agrees with edge-set arithmetic") {
  std::mt19937_64 gen(61);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t d = 2 + trial % 12;
    const auto p = random_graph(d, 0.25, gen);
    const auto t = random_graph(d, 0.2, gen);
    const auto r = compare_graphs(p, t);
    const auto o = oracle::compare_sets(oracle::edges_of(p), oracle::edges_of(t));
    CHECK(r.true_positive_edges == o.tp);
    CHECK(r.reversed == o.reversed);
    CHECK(r.false_positive == o.fp);
    CHECK(r.false_negative == o.fn);
    CHECK(r.missing == o.missing);
    CHECK(r.shd == o.missing + o.fp + o.reversed);
    for (double v : {r.f1, r.fdr, r.tpr, r.fpr}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    const auto po = random_oriented(d, 0.4, gen);
    const auto to = random_oriented(d, 0.3, gen);
    const auto a = compare_graphs(po, to);
    const auto b = compare_graphs(to, po);
    CHECK(a.reversed == b.reversed);
    CHECK(a.missing + a.false_positive == b.missing + b.false_positive);
    CHECK(a.shd == b.shd);
  }
}

TEST_CASE("auc_roc") {
  const auto truth = graph(3, {{0, 1}, {1, 2}});
  CHECK(*auc_roc(SparseMatrix(3, 3), truth) == 0.5);
  const auto perfect = SparseMatrix::from_triplets(3, 3, {{0, 1, 0.9}, {1, 2, -0.8}, {2, 0, 0.1}});
  CHECK(*auc_roc(perfect, truth) == 1.0);
  CHECK_FALSE(auc_roc(perfect, SparseMatrix(3, 3)).has_value());

  std::mt19937_64 gen(62);
  std::uniform_int_distribution<int> level(0, 4);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = 3 + trial % 8;
    const auto t = random_graph(d, 0.3, gen);
    // Coarse values so that ties occur among nonzero scores too.
    std::vector<Triplet> wt;
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < d; ++j)
        if (i != j && level(gen) > 1) wt.push_back({i, j, 0.25 * level(gen) * (trial % 2 ? 1 : -1)});
    const auto w = SparseMatrix::from_triplets(static_cast<Index>(d), static_cast<Index>(d), wt);
    std::vector<double> scores;
    std::vector<bool> positive;
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < d; ++j)
        if (i != j) {
          scores.push_back(std::abs(w.at(i, j)));
          positive.push_back(t.at(i, j) != 0.0);
        }
    const auto got = auc_roc(w, t);
    const std::size_t pos = std::count(positive.begin(), positive.end(), true);
    if (pos == 0 || pos == positive.size()) {
      CHECK_FALSE(got.has_value());
      continue;
    }
    REQUIRE(got.has_value());
    CHECK(std::abs(*got - oracle::auc_threshold_sweep(scores, positive)) <= 1e-12);
  }
}

TEST_CASE("pearson and trace_correlation") {
  CHECK(*pearson({1, 2, 3}, {1, 2, 3}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(*pearson({1, 2, 3}, {2, 4, 6}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(*pearson({1, 2, 3}, {3, 2, 1}) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK_FALSE(pearson({1, 1, 1}, {1, 2, 3}).has_value());
  CHECK_FALSE(pearson({1, 2}, {1, 2}).has_value());

  std::vector<OuterRecord> trace(4);
  for (unsigned i = 0; i < 4; ++i) {
    trace[i].bound = 1.0 / (i + 1);
    if (i != 2) trace[i].h = 2.0 / (i + 1);
  }
  CHECK(*trace_correlation(trace) == doctest::Approx(1.0).epsilon(1e-12));
  trace[1].h.reset();
  CHECK_FALSE(trace_correlation(trace).has_value());
}

TEST_CASE("grid_search") {
  const auto gc = make_graph_case(10, GraphModel::kErdosRenyi, 2.0, NoiseKind::kGaussian, 100, 1);
  LearnConfig cfg;
  cfg.batch_size = 100;
  cfg.stop_on_h = true;
  cfg.t_inner = 100;
  cfg.t_outer = 8;

  const auto one = grid_search(gc.x, gc.adjacency, cfg, {1e-2}, {0.3});
  REQUIRE(one.cells.size() == 1);
  auto single = cfg;
  single.epsilon = 1e-2;
  const auto learned = learn(gc.x, single);
  const auto expect = compare_graphs(post_threshold(learned.w, 0.3), gc.adjacency);
  CHECK(one.best.f1 == expect.f1);
  CHECK(one.best.shd == expect.shd);
  CHECK(one.best_w == post_threshold(learned.w, 0.3));
  CHECK(*one.best.best_epsilon == 1e-2);
  CHECK(*one.best.best_tau == 0.3);

  const auto wide = grid_search(gc.x, gc.adjacency, cfg, {1e-2}, {0.1, 0.3, 0.5});
  CHECK(wide.best.f1 >= one.best.f1);
  CHECK(wide.cells.size() == 3);

  const auto serial = grid_search(gc.x, gc.adjacency, cfg, {1e-1, 1e-2}, {0.1, 0.3}, 1);
  const auto parallel = grid_search(gc.x, gc.adjacency, cfg, {1e-1, 1e-2}, {0.1, 0.3}, 2);
  CHECK(serial.best_w == parallel.best_w);
  REQUIRE(serial.cells.size() == 4);
  CHECK(serial.cells[1].epsilon == 1e-1);
  CHECK(serial.cells[1].tau == 0.3);
  for (std::size_t c = 0; c < 4; ++c) CHECK(serial.cells[c].report.f1 == parallel.cells[c].report.f1);
  CHECK(benchmark_epsilon_grid().size() == 4);
  CHECK(benchmark_tau_grid().size() == 5);
  CHECK_THROWS_AS(grid_search(gc.x, gc.adjacency, cfg, {}, {0.1}), std::invalid_argument);
}
