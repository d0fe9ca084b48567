#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace least {

using Index = std::uint32_t;
using DenseVector = std::vector<double>;

struct Triplet {
  Index row;
  Index col;
  double value;
};

/// Compressed sparse-row matrix of doubles.
///
/// Invariants (checked on construction from raw arrays):
///  - row_offsets has rows+1 entries, starts at 0, is non-decreasing and ends at nnz;
///  - column indices are strictly increasing within a row and below cols.
/// Explicitly stored zeros are allowed until compress() is called.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(Index rows, Index cols);
  SparseMatrix(Index rows, Index cols, std::vector<Index> row_offsets,
               std::vector<Index> col_indices, std::vector<double> values);

  /// Builds from unordered triplets. Duplicate positions are summed.
  static SparseMatrix from_triplets(Index rows, Index cols, std::vector<Triplet> triplets);
  /// Builds from a row-major dense array, keeping only non-zero entries.
  static SparseMatrix from_dense(Index rows, Index cols, std::span<const double> row_major);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }
  bool is_square() const { return rows_ == cols_; }

  std::span<const Index> row_offsets() const { return row_offsets_; }
  std::span<const Index> col_indices() const { return col_indices_; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  std::span<const Index> row_cols(Index row) const {
    return std::span<const Index>(col_indices_).subspan(
        row_offsets_[row], row_offsets_[row + 1] - row_offsets_[row]);
  }
  std::span<const double> row_values(Index row) const {
    return std::span<const double>(values_).subspan(
        row_offsets_[row], row_offsets_[row + 1] - row_offsets_[row]);
  }

  /// Value at (row, col); 0 when the position is not stored.
  double at(Index row, Index col) const;
  bool contains(Index row, Index col) const;

  /// Row-major dense copy.
  std::vector<double> to_dense() const;
  std::vector<Triplet> to_triplets() const;

  /// Removes explicitly stored zeros. Never changes the dense interpretation.
  void compress();
  SparseMatrix compressed() const;

  /// Same shape and the same stored positions.
  bool same_pattern(const SparseMatrix& other) const;

  /// Approximate heap footprint of the three arrays.
  std::size_t storage_bytes() const;

  friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

 private:
  void validate() const;

  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<Index> row_offsets_{0};
  std::vector<Index> col_indices_;
  std::vector<double> values_;
};

// Kernels. All accumulate in ascending index order without compensation, so
// repeated calls on identical inputs are bit-identical.

DenseVector row_sums(const SparseMatrix& m);
DenseVector col_sums(const SparseMatrix& m);

/// out[i] = v[i]^a with 0^a = 0 for a > 0 and 0^0 = 1.
/// Throws DomainError for a negative base with a non-integer exponent.
DenseVector elementwise_pow(std::span<const double> v, double a);

/// Entrywise product; the result support is the intersection of supports.
SparseMatrix hadamard(const SparseMatrix& a, const SparseMatrix& b);

/// out[i,j] = left[i] * m[i,j] * right[j]. Keeps the pattern of m.
SparseMatrix scale_rows_cols(const SparseMatrix& m, std::span<const double> left,
                             std::span<const double> right);

/// Same pattern as m with every stored value set to 1.
SparseMatrix support_mask(const SparseMatrix& m);

SparseMatrix transpose(const SparseMatrix& m);

/// Entries with |value| < theta are removed structurally; others are kept bit-exact.
SparseMatrix drop_below(const SparseMatrix& m, double theta);

/// Scalar power with the zero conventions of elementwise_pow.
double pow0(double base, double exponent);
/// base^-exponent, defined as 0 when base is 0 and exponent > 0 (and 1 when exponent is 0).
double inv_pow0(double base, double exponent);
/// 1/x, or 0 when x is 0.
inline double safe_inverse(double x) { return x == 0.0 ? 0.0 : 1.0 / x; }

}  // namespace least
