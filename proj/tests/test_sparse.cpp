#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "least/dense.hpp"
#include "least/errors.hpp"
#include "least/matrix_market.hpp"
#include "least/sparse.hpp"
#include "oracles.hpp"

using namespace least;

namespace {

SparseMatrix dense2(std::initializer_list<double> v, Index rows = 2, Index cols = 2) {
  std::vector<double> a(v);
  return SparseMatrix::from_dense(rows, cols, a);
}

}  // namespace

TEST_CASE("construction validates the CSR invariants") {
  CHECK_NOTHROW(SparseMatrix(2, 3, {0, 1, 2}, {2, 0}, {1.0, 2.0}));
  CHECK_THROWS_AS(SparseMatrix(2, 2, {0, 2, 1}, {0, 1}, {1.0, 1.0}), ShapeError);  // decreasing
  CHECK_THROWS_AS(SparseMatrix(2, 2, {0, 2, 2}, {1, 0}, {1.0, 1.0}), ShapeError);  // unsorted row
  CHECK_THROWS_AS(SparseMatrix(2, 2, {0, 1, 1}, {2}, {1.0}), ShapeError);          // column range
  CHECK_THROWS_AS(SparseMatrix(2, 2, {0, 1}, {0}, {1.0}), ShapeError);             // offsets length
  CHECK_THROWS_AS(SparseMatrix(2, 2, {0, 1, 2}, {0, 0}, {1.0}), ShapeError);       // values length
}

TEST_CASE("from_triplets sorts and sums duplicates") {
  const auto m = SparseMatrix::from_triplets(2, 2, {{1, 0, 2.0}, {0, 1, 1.0}, {1, 0, 0.5}});
  CHECK(m.nnz() == 2);
  CHECK(m.at(1, 0) == 2.5);
  CHECK(m.at(0, 1) == 1.0);
  CHECK(m.at(0, 0) == 0.0);
  CHECK_FALSE(m.contains(0, 0));
  CHECK_THROWS_AS(SparseMatrix::from_triplets(2, 2, {{2, 0, 1.0}}), ShapeError);
}

TEST_CASE("compress removes stored zeros without changing values") {
  SparseMatrix m(2, 2, {0, 2, 3}, {0, 1, 1}, {0.0, 3.0, 0.0});
  const auto before = m.to_dense();
  m.compress();
  CHECK(m.nnz() == 1);
  CHECK(m.to_dense() == before);
}

TEST_CASE("row_sums and col_sums") {
  const auto zero = SparseMatrix(2, 2);
  CHECK(row_sums(zero) == DenseVector{0, 0});
  CHECK(col_sums(zero) == DenseVector{0, 0});
  const auto m = dense2({0, 1, 2, 0});
  CHECK(row_sums(m) == DenseVector{1, 2});
  CHECK(col_sums(m) == DenseVector{2, 1});

  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto r = oracle::random_matrix(10, 0.3, gen);
    const auto a = oracle::dense_of(r);
    DenseVector rows(10, 0.0), cols(10, 0.0);
    for (std::size_t i = 0; i < 10; ++i)
      for (std::size_t j = 0; j < 10; ++j) {
        rows[i] += a[i * 10 + j];
        cols[j] += a[i * 10 + j];
      }
    // Zero entries contribute exactly nothing, so ascending-order sums agree exactly.
    CHECK(row_sums(r) == rows);
    CHECK(col_sums(r) == cols);
  }
}

TEST_CASE("elementwise_pow conventions") {
  CHECK(elementwise_pow(DenseVector{1, 4, 9}, 0.5) == DenseVector{1, 2, 3});
  const auto z = elementwise_pow(DenseVector{0, 2}, 0.9);
  CHECK(z[0] == 0.0);
  CHECK(z[1] == doctest::Approx(std::pow(2.0, 0.9)).epsilon(1e-15));
  CHECK(elementwise_pow(DenseVector{3, 5}, 1.0) == DenseVector{3, 5});
  CHECK(elementwise_pow(DenseVector{0, 7}, 0.0) == DenseVector{1, 1});
  CHECK(elementwise_pow(DenseVector{-2}, 2.0) == DenseVector{4});
  CHECK_THROWS_AS(elementwise_pow(DenseVector{-2}, 0.5), DomainError);
  CHECK(inv_pow0(0.0, 0.5) == 0.0);
  CHECK(inv_pow0(4.0, 0.5) == 0.5);
  CHECK(safe_inverse(0.0) == 0.0);
}

TEST_CASE("hadamard") {
  const auto a = dense2({1, 2, 0, 3});
  CHECK(hadamard(a, SparseMatrix(2, 2)).nnz() == 0);
  const auto h = hadamard(a, dense2({5, 0, 7, 2}));
  CHECK(h.to_dense() == std::vector<double>{5, 0, 0, 6});
  CHECK(h.nnz() == 2);
  CHECK_THROWS_AS(hadamard(a, SparseMatrix(2, 3)), ShapeError);

  std::mt19937_64 gen(12);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = oracle::random_matrix(9, 0.4, gen);
    const auto y = oracle::random_matrix(9, 0.4, gen);
    const auto dx = oracle::dense_of(x), dy = oracle::dense_of(y);
    std::vector<double> expect(81);
    for (int e = 0; e < 81; ++e) expect[e] = dx[e] * dy[e];
    CHECK(hadamard(x, y).to_dense() == expect);
  }
}

TEST_CASE("scale_rows_cols") {
  const auto m = dense2({0, 1, 2, 0});
  CHECK(scale_rows_cols(m, DenseVector{1, 1}, DenseVector{1, 1}) == m);
  auto s = scale_rows_cols(m, DenseVector{0, 1}, DenseVector{1, 1});
  CHECK(s.to_dense() == std::vector<double>{0, 0, 2, 0});
  CHECK(s.nnz() == 2);  // the zeroed entry stays until compress
  s.compress();
  CHECK(s.nnz() == 1);
  CHECK_THROWS_AS(scale_rows_cols(m, DenseVector{1}, DenseVector{1, 1}), ShapeError);

  std::mt19937_64 gen(13);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = oracle::random_matrix(8, 0.4, gen);
    DenseVector b(8);
    for (auto& v : b) v = trial % 3 == 0 && &v == &b[2] ? 0.0 : u(gen);
    DenseVector ib(8);
    for (int i = 0; i < 8; ++i) ib[i] = b[i] == 0.0 ? 0.0 : 1.0 / b[i];
    const auto dx = oracle::dense_of(x);
    std::vector<double> expect(64);
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) expect[i * 8 + j] = ib[i] * dx[i * 8 + j] * b[j];
    const auto got = scale_rows_cols(x, ib, b).to_dense();
    for (int e = 0; e < 64; ++e) CHECK(got[e] == doctest::Approx(expect[e]).epsilon(1e-15));
  }
}

TEST_CASE("support_mask") {
  CHECK(support_mask(SparseMatrix(2, 2)).nnz() == 0);
  const auto m = dense2({0, 3, -2, 0});
  const auto mask = support_mask(m);
  CHECK(mask.to_dense() == std::vector<double>{0, 1, 1, 0});
  CHECK(support_mask(mask) == mask);
}

TEST_CASE("transpose and drop_below") {
  const auto m = dense2({0, 0.05, -0.2, 0});
  CHECK(transpose(m).to_dense() == std::vector<double>{0, -0.2, 0.05, 0});
  CHECK(drop_below(m, 0.1).to_dense() == std::vector<double>{0, 0, -0.2, 0});
  CHECK(drop_below(m, 0.0) == m);
}

TEST_CASE("kernels are bit-identical across calls") {
  std::mt19937_64 gen(14);
  const auto x = oracle::random_matrix(30, 0.2, gen);
  CHECK(row_sums(x) == row_sums(x));
  CHECK(col_sums(x) == col_sums(x));
  CHECK(hadamard(x, x) == hadamard(x, x));
}

TEST_CASE("matrix market round trip is bit exact") {
  std::mt19937_64 gen(15);
  auto m = oracle::random_matrix(12, 0.3, gen);
  m.values()[0] = 0.1 + 0.2;  // not a short decimal
  m.values()[1] = 1e-300;
  m.values()[2] = -std::numeric_limits<double>::max();
  std::stringstream ss;
  write_matrix_market(ss, m);
  CHECK(ss.str().rfind("%%MatrixMarket matrix coordinate real general", 0) == 0);
  const auto back = read_matrix_market(ss);
  CHECK(back == m);
}

TEST_CASE("matrix market reader") {
  std::stringstream pattern("%%MatrixMarket matrix coordinate pattern general\n% comment\n2 2 2\n1 2\n2 1\n");
  CHECK(read_matrix_market(pattern).to_dense() == std::vector<double>{0, 1, 1, 0});
  std::stringstream dup("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.5\n1 1 2\n");
  CHECK(read_matrix_market(dup).at(0, 0) == 3.5);

  const char* bad[] = {
      "",
      "%%MatrixMarket matrix array real general\n2 2\n",
      "%%MatrixMarket matrix coordinate real symmetric\n2 2 0\n",
      "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n",
      "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n",
      "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 abc\n",
      "%%MatrixMarket matrix coordinate real general\n2 x 1\n1 1 1\n",
  };
  for (const char* text : bad) {
    std::stringstream s(text);
    CHECK_THROWS_AS(read_matrix_market(s), ParseError);
  }
}

TEST_CASE("csv round trip and errors") {
  DenseMatrix x(3, 2, std::vector<double>{0.1, -2, 3e-9, 4, 1.0 / 3.0, 6});
  std::stringstream ss;
  write_csv(ss, x);
  CHECK(read_csv(ss) == x);
  std::stringstream ragged("1,2\n3\n");
  CHECK_THROWS_AS(read_csv(ragged), ParseError);
  std::stringstream junk("1,x\n");
  CHECK_THROWS_AS(read_csv(junk), ParseError);
  CHECK_THROWS_AS(read_csv(std::filesystem::path("/nonexistent/file.csv")), ParseError);
}

TEST_CASE("center_columns") {
  DenseMatrix x(2, 2, std::vector<double>{1, 10, 3, 20});
  center_columns(x);
  CHECK(x == DenseMatrix(2, 2, std::vector<double>{-1, -5, 1, 5}));
}
