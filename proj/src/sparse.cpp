#include "least/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "least/errors.hpp"

namespace least {

SparseMatrix::SparseMatrix(Index rows, Index cols)
    : rows_(rows), cols_(cols), row_offsets_(static_cast<std::size_t>(rows) + 1, 0) {}

SparseMatrix::SparseMatrix(Index rows, Index cols, std::vector<Index> row_offsets,
                           std::vector<Index> col_indices, std::vector<double> values)
    : rows_(rows),
      cols_(cols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)) {
  validate();
}

void SparseMatrix::validate() const {
  if (row_offsets_.size() != static_cast<std::size_t>(rows_) + 1) {
    throw ShapeError("row_offsets must have rows+1 entries");
  }
  if (col_indices_.size() != values_.size()) {
    throw ShapeError("col_indices and values differ in length");
  }
  if (row_offsets_.front() != 0 || row_offsets_.back() != values_.size()) {
    throw ShapeError("row_offsets must start at 0 and end at nnz");
  }
  for (Index i = 0; i < rows_; ++i) {
    if (row_offsets_[i] > row_offsets_[i + 1]) {
      throw ShapeError("row_offsets must be non-decreasing");
    }
    for (Index e = row_offsets_[i]; e < row_offsets_[i + 1]; ++e) {
      if (col_indices_[e] >= cols_) {
        throw ShapeError("column index out of range in row " + std::to_string(i));
      }
      if (e > row_offsets_[i] && col_indices_[e] <= col_indices_[e - 1]) {
        throw ShapeError("column indices not strictly increasing in row " + std::to_string(i));
      }
    }
  }
}

SparseMatrix SparseMatrix::from_triplets(Index rows, Index cols, std::vector<Triplet> triplets) {
  for (const auto& t : triplets) {
    if (t.row >= rows || t.col >= cols) {
      throw ShapeError("triplet index out of range");
    }
  }
  std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<Index> offsets(static_cast<std::size_t>(rows) + 1, 0);
  std::vector<Index> cols_out;
  std::vector<double> vals;
  cols_out.reserve(triplets.size());
  vals.reserve(triplets.size());
  for (std::size_t t = 0; t < triplets.size(); ++t) {
    const auto& tr = triplets[t];
    if (t > 0 && triplets[t - 1].row == tr.row && triplets[t - 1].col == tr.col) {
      vals.back() += tr.value;
      continue;
    }
    cols_out.push_back(tr.col);
    vals.push_back(tr.value);
    ++offsets[tr.row + 1];
  }
  for (Index i = 0; i < rows; ++i) offsets[i + 1] += offsets[i];
  return SparseMatrix(rows, cols, std::move(offsets), std::move(cols_out), std::move(vals));
}

SparseMatrix SparseMatrix::from_dense(Index rows, Index cols, std::span<const double> row_major) {
  if (row_major.size() != static_cast<std::size_t>(rows) * cols) {
    throw ShapeError("dense array size does not match shape");
  }
  std::vector<Index> offsets(static_cast<std::size_t>(rows) + 1, 0);
  std::vector<Index> cols_out;
  std::vector<double> vals;
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      const double v = row_major[static_cast<std::size_t>(i) * cols + j];
      if (v != 0.0) {
        cols_out.push_back(j);
        vals.push_back(v);
      }
    }
    offsets[i + 1] = static_cast<Index>(vals.size());
  }
  return SparseMatrix(rows, cols, std::move(offsets), std::move(cols_out), std::move(vals));
}

double SparseMatrix::at(Index row, Index col) const {
  if (row >= rows_ || col >= cols_) throw ShapeError("index out of range");
  const auto cols = row_cols(row);
  const auto it = std::lower_bound(cols.begin(), cols.end(), col);
  if (it == cols.end() || *it != col) return 0.0;
  return values_[row_offsets_[row] + static_cast<std::size_t>(it - cols.begin())];
}

bool SparseMatrix::contains(Index row, Index col) const {
  if (row >= rows_ || col >= cols_) return false;
  const auto cols = row_cols(row);
  return std::binary_search(cols.begin(), cols.end(), col);
}

std::vector<double> SparseMatrix::to_dense() const {
  std::vector<double> out(static_cast<std::size_t>(rows_) * cols_, 0.0);
  for (Index i = 0; i < rows_; ++i) {
    for (Index e = row_offsets_[i]; e < row_offsets_[i + 1]; ++e) {
      out[static_cast<std::size_t>(i) * cols_ + col_indices_[e]] = values_[e];
    }
  }
  return out;
}

std::vector<Triplet> SparseMatrix::to_triplets() const {
  std::vector<Triplet> out;
  out.reserve(nnz());
  for (Index i = 0; i < rows_; ++i) {
    for (Index e = row_offsets_[i]; e < row_offsets_[i + 1]; ++e) {
      out.push_back({i, col_indices_[e], values_[e]});
    }
  }
  return out;
}

void SparseMatrix::compress() {
  Index write = 0;
  Index read_begin = 0;
  for (Index i = 0; i < rows_; ++i) {
    const Index read_end = row_offsets_[i + 1];
    for (Index e = read_begin; e < read_end; ++e) {
      if (values_[e] != 0.0) {
        col_indices_[write] = col_indices_[e];
        values_[write] = values_[e];
        ++write;
      }
    }
    read_begin = read_end;
    row_offsets_[i + 1] = write;
  }
  col_indices_.resize(write);
  values_.resize(write);
}

SparseMatrix SparseMatrix::compressed() const {
  SparseMatrix out = *this;
  out.compress();
  return out;
}

bool SparseMatrix::same_pattern(const SparseMatrix& other) const {
  return rows_ == other.rows_ && cols_ == other.cols_ && row_offsets_ == other.row_offsets_ &&
         col_indices_ == other.col_indices_;
}

std::size_t SparseMatrix::storage_bytes() const {
  return row_offsets_.capacity() * sizeof(Index) + col_indices_.capacity() * sizeof(Index) +
         values_.capacity() * sizeof(double);
}

DenseVector row_sums(const SparseMatrix& m) {
  DenseVector out(m.rows(), 0.0);
  const auto offsets = m.row_offsets();
  const auto vals = m.values();
  for (Index i = 0; i < m.rows(); ++i) {
    double acc = 0.0;
    for (Index e = offsets[i]; e < offsets[i + 1]; ++e) acc += vals[e];
    out[i] = acc;
  }
  return out;
}

DenseVector col_sums(const SparseMatrix& m) {
  // Single row-major pass with a scatter accumulator: each column is summed in
  // ascending row order.
  DenseVector out(m.cols(), 0.0);
  const auto cols = m.col_indices();
  const auto vals = m.values();
  for (std::size_t e = 0; e < vals.size(); ++e) out[cols[e]] += vals[e];
  return out;
}

double pow0(double base, double exponent) {
  if (exponent == 0.0) return 1.0;
  if (base == 0.0) return 0.0;
  if (exponent == 1.0) return base;
  if (base < 0.0 && std::trunc(exponent) != exponent) {
    throw DomainError("negative base with fractional exponent");
  }
  return std::pow(base, exponent);
}

double inv_pow0(double base, double exponent) {
  if (exponent == 0.0) return 1.0;
  if (base == 0.0) return 0.0;
  return 1.0 / pow0(base, exponent);
}

DenseVector elementwise_pow(std::span<const double> v, double a) {
  DenseVector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = pow0(v[i], a);
  return out;
}

SparseMatrix hadamard(const SparseMatrix& a, const SparseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError("hadamard: shape mismatch");
  }
  std::vector<Index> offsets(static_cast<std::size_t>(a.rows()) + 1, 0);
  std::vector<Index> cols;
  std::vector<double> vals;
  cols.reserve(std::min(a.nnz(), b.nnz()));
  vals.reserve(std::min(a.nnz(), b.nnz()));
  for (Index i = 0; i < a.rows(); ++i) {
    const auto ac = a.row_cols(i);
    const auto av = a.row_values(i);
    const auto bc = b.row_cols(i);
    const auto bv = b.row_values(i);
    std::size_t p = 0;
    std::size_t q = 0;
    while (p < ac.size() && q < bc.size()) {
      if (ac[p] < bc[q]) {
        ++p;
      } else if (bc[q] < ac[p]) {
        ++q;
      } else {
        cols.push_back(ac[p]);
        vals.push_back(av[p] * bv[q]);
        ++p;
        ++q;
      }
    }
    offsets[i + 1] = static_cast<Index>(vals.size());
  }
  return SparseMatrix(a.rows(), a.cols(), std::move(offsets), std::move(cols), std::move(vals));
}

SparseMatrix scale_rows_cols(const SparseMatrix& m, std::span<const double> left,
                             std::span<const double> right) {
  if (left.size() != m.rows() || right.size() != m.cols()) {
    throw ShapeError("scale_rows_cols: scaling vectors do not conform");
  }
  SparseMatrix out = m;
  auto vals = out.values();
  const auto offsets = m.row_offsets();
  const auto cols = m.col_indices();
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index e = offsets[i]; e < offsets[i + 1]; ++e) {
      vals[e] = left[i] * vals[e] * right[cols[e]];
    }
  }
  return out;
}

SparseMatrix support_mask(const SparseMatrix& m) {
  SparseMatrix out = m;
  std::fill(out.values().begin(), out.values().end(), 1.0);
  return out;
}

SparseMatrix transpose(const SparseMatrix& m) {
  std::vector<Index> offsets(static_cast<std::size_t>(m.cols()) + 1, 0);
  for (Index c : m.col_indices()) ++offsets[c + 1];
  for (Index j = 0; j < m.cols(); ++j) offsets[j + 1] += offsets[j];
  std::vector<Index> next(offsets.begin(), offsets.end() - 1);
  std::vector<Index> rows(m.nnz());
  std::vector<double> vals(m.nnz());
  for (Index i = 0; i < m.rows(); ++i) {
    const auto c = m.row_cols(i);
    const auto v = m.row_values(i);
    for (std::size_t e = 0; e < c.size(); ++e) {
      const Index slot = next[c[e]]++;
      rows[slot] = i;
      vals[slot] = v[e];
    }
  }
  return SparseMatrix(m.cols(), m.rows(), std::move(offsets), std::move(rows), std::move(vals));
}

SparseMatrix drop_below(const SparseMatrix& m, double theta) {
  std::vector<Index> offsets(static_cast<std::size_t>(m.rows()) + 1, 0);
  std::vector<Index> cols;
  std::vector<double> vals;
  cols.reserve(m.nnz());
  vals.reserve(m.nnz());
  for (Index i = 0; i < m.rows(); ++i) {
    const auto c = m.row_cols(i);
    const auto v = m.row_values(i);
    for (std::size_t e = 0; e < c.size(); ++e) {
      if (!(std::abs(v[e]) < theta)) {
        cols.push_back(c[e]);
        vals.push_back(v[e]);
      }
    }
    offsets[i + 1] = static_cast<Index>(vals.size());
  }
  return SparseMatrix(m.rows(), m.cols(), std::move(offsets), std::move(cols), std::move(vals));
}

}  // namespace least
