#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "adaptcs/dense_matrix.hpp"

namespace adaptcs {

using Index = std::uint32_t;

struct Triplet {
  Index row;
  Index col;
  double value;
};

/// Entries with magnitude at or below this are treated as explicit zeros.
inline constexpr double kExplicitZero = 1e-15;

/// CSR-form real sparse matrix.
///
/// Invariants: row_offsets nondecreasing with size rows+1 and back() == nnz; column
/// indices strictly increasing within each row; all stored values finite.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(std::size_t rows, std::size_t cols);
  /// Takes ownership of CSR arrays; throws InvalidInput when they break the invariants.
  SparseMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_offsets,
               std::vector<Index> col_indices, std::vector<double> values);

  /// Duplicate (row, col) entries are summed; zeros are dropped.
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols,
                                    std::vector<Triplet> triplets);
  static SparseMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t nnz() const noexcept { return col_indices_.size(); }

  std::span<const std::size_t> row_offsets() const noexcept { return row_offsets_; }
  std::span<const Index> col_indices() const noexcept { return col_indices_; }
  std::span<const double> values() const noexcept { return values_; }

  std::span<const Index> row_cols(std::size_t r) const noexcept {
    return {col_indices_.data() + row_offsets_[r], row_offsets_[r + 1] - row_offsets_[r]};
  }
  std::span<const double> row_values(std::size_t r) const noexcept {
    return {values_.data() + row_offsets_[r], row_offsets_[r + 1] - row_offsets_[r]};
  }
  std::size_t row_nnz(std::size_t r) const noexcept {
    return row_offsets_[r + 1] - row_offsets_[r];
  }

  /// Stored value at (r, c), or 0.
  double at(std::size_t r, std::size_t c) const;
  bool contains(std::size_t r, std::size_t c) const;

  SparseMatrix transpose() const;
  bool same_pattern(const SparseMatrix& other) const noexcept;
  bool is_symmetric_pattern_and_values() const;

  /// this * x
  DenseMatrix multiply(const DenseMatrix& x) const;
  /// this^T * x
  DenseMatrix multiply_transposed(const DenseMatrix& x) const;
  std::vector<double> multiply(std::span<const double> x) const;
  std::vector<double> row_sums() const;

  friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_offsets_ = {0};
  std::vector<Index> col_indices_;
  std::vector<double> values_;
};

/// Removes entries with |v| <= threshold.
SparseMatrix compact(const SparseMatrix& a, double threshold = kExplicitZero);

/// Exact sparse product. Entries that cancel to within roundoff of their absolute
/// contribution sum are removed.
SparseMatrix spgemm(const SparseMatrix& a, const SparseMatrix& b);

/// D^{-1/2} (A + I) D^{-1/2} with D the degree matrix of A + I.
/// Requires a square, symmetric, binary matrix with an empty diagonal.
SparseMatrix sym_normalize(const SparseMatrix& a);

/// Rescales nonempty rows to sum to one; empty rows stay empty.
SparseMatrix row_normalize(const SparseMatrix& a);

/// Entrywise max(a - b, 0), compacted.
SparseMatrix relu_sub(const SparseMatrix& a, const SparseMatrix& b);

/// alpha * a + beta * b, compacted.
SparseMatrix sparse_add(const SparseMatrix& a, const SparseMatrix& b, double alpha = 1.0,
                        double beta = 1.0);

/// Keeps entries of x whose position is not stored in `exclude`.
SparseMatrix mask_out(const SparseMatrix& x, const SparseMatrix& exclude);

/// Spectral radius estimate by power iteration on a symmetric matrix.
double spectral_radius(const SparseMatrix& a, int iterations = 500, std::uint64_t seed = 7);

}  // namespace adaptcs
