#include "adaptcs/sparse_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "adaptcs/errors.hpp"

namespace adaptcs {
namespace {

// Residue left by exact cancellation is a few ulps of the absolute contribution sum.
constexpr double kCancellation = 64.0 * std::numeric_limits<double>::epsilon();

void require_same_shape(const SparseMatrix& a, const SparseMatrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidInput(std::string(op) + ": shape mismatch");
  }
}

// Merges two sorted rows, calling emit(col, a_value, b_value) per union entry.
template <typename Emit>
void merge_rows(const SparseMatrix& a, const SparseMatrix& b, std::size_t r, Emit&& emit) {
  auto ac = a.row_cols(r);
  auto av = a.row_values(r);
  auto bc = b.row_cols(r);
  auto bv = b.row_values(r);
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < ac.size() || j < bc.size()) {
    if (j == bc.size() || (i < ac.size() && ac[i] < bc[j])) {
      emit(ac[i], av[i], 0.0);
      ++i;
    } else if (i == ac.size() || bc[j] < ac[i]) {
      emit(bc[j], 0.0, bv[j]);
      ++j;
    } else {
      emit(ac[i], av[i], bv[j]);
      ++i;
      ++j;
    }
  }
}

}  // namespace

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), row_offsets_(rows + 1, 0) {}

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_offsets,
                           std::vector<Index> col_indices, std::vector<double> values)
    : rows_(rows),
      cols_(cols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)) {
  if (row_offsets_.size() != rows_ + 1 || row_offsets_.front() != 0 ||
      row_offsets_.back() != col_indices_.size() || col_indices_.size() != values_.size()) {
    throw InvalidInput("SparseMatrix: inconsistent CSR array sizes");
  }
  for (std::size_t r = 0; r < rows_; ++r) {
    if (row_offsets_[r] > row_offsets_[r + 1]) {
      throw InvalidInput("SparseMatrix: row offsets decrease at row " + std::to_string(r));
    }
    for (std::size_t k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
      if (col_indices_[k] >= cols_) throw InvalidInput("SparseMatrix: column index out of range");
      if (k > row_offsets_[r] && col_indices_[k] <= col_indices_[k - 1]) {
        throw InvalidInput("SparseMatrix: columns not strictly increasing in row " +
                           std::to_string(r));
      }
      if (!std::isfinite(values_[k])) throw InvalidInput("SparseMatrix: non-finite value");
    }
  }
}

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols,
                                         std::vector<Triplet> triplets) {
  for (const auto& t : triplets) {
    if (t.row >= rows || t.col >= cols) throw InvalidInput("from_triplets: index out of range");
  }
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& x, const Triplet& y) {
    return x.row != y.row ? x.row < y.row : x.col < y.col;
  });
  std::vector<std::size_t> offsets(rows + 1, 0);
  std::vector<Index> cols_out;
  std::vector<double> vals;
  cols_out.reserve(triplets.size());
  vals.reserve(triplets.size());
  std::size_t i = 0;
  while (i < triplets.size()) {
    std::size_t j = i;
    double sum = 0.0;
    while (j < triplets.size() && triplets[j].row == triplets[i].row &&
           triplets[j].col == triplets[i].col) {
      sum += triplets[j].value;
      ++j;
    }
    if (sum != 0.0) {
      cols_out.push_back(triplets[i].col);
      vals.push_back(sum);
      ++offsets[triplets[i].row + 1];
    }
    i = j;
  }
  for (std::size_t r = 0; r < rows; ++r) offsets[r + 1] += offsets[r];
  return SparseMatrix(rows, cols, std::move(offsets), std::move(cols_out), std::move(vals));
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  std::vector<std::size_t> offsets(n + 1);
  std::vector<Index> cols(n);
  for (std::size_t i = 0; i <= n; ++i) offsets[i] = i;
  for (std::size_t i = 0; i < n; ++i) cols[i] = static_cast<Index>(i);
  return SparseMatrix(n, n, std::move(offsets), std::move(cols), std::vector<double>(n, 1.0));
}

double SparseMatrix::at(std::size_t r, std::size_t c) const {
  auto cols = row_cols(r);
  auto it = std::lower_bound(cols.begin(), cols.end(), static_cast<Index>(c));
  if (it == cols.end() || *it != c) return 0.0;
  return values_[row_offsets_[r] + static_cast<std::size_t>(it - cols.begin())];
}

bool SparseMatrix::contains(std::size_t r, std::size_t c) const {
  auto cols = row_cols(r);
  return std::binary_search(cols.begin(), cols.end(), static_cast<Index>(c));
}

SparseMatrix SparseMatrix::transpose() const {
  std::vector<std::size_t> offsets(cols_ + 1, 0);
  for (Index c : col_indices_) ++offsets[c + 1];
  for (std::size_t c = 0; c < cols_; ++c) offsets[c + 1] += offsets[c];
  std::vector<Index> out_cols(nnz());
  std::vector<double> out_vals(nnz());
  std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
      const std::size_t dst = cursor[col_indices_[k]]++;
      out_cols[dst] = static_cast<Index>(r);
      out_vals[dst] = values_[k];
    }
  }
  return SparseMatrix(cols_, rows_, std::move(offsets), std::move(out_cols), std::move(out_vals));
}

bool SparseMatrix::same_pattern(const SparseMatrix& other) const noexcept {
  return rows_ == other.rows_ && cols_ == other.cols_ && row_offsets_ == other.row_offsets_ &&
         col_indices_ == other.col_indices_;
}

bool SparseMatrix::is_symmetric_pattern_and_values() const {
  if (rows_ != cols_) return false;
  return *this == transpose();
}

DenseMatrix SparseMatrix::multiply(const DenseMatrix& x) const {
  if (x.rows() != cols_) throw InvalidInput("SparseMatrix::multiply: dimension mismatch");
  DenseMatrix out(rows_, x.cols());
  const std::size_t d = x.cols();
  for (std::size_t r = 0; r < rows_; ++r) {
    double* dst = out.data() + r * d;
    for (std::size_t k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
      const double v = values_[k];
      const double* src = x.data() + static_cast<std::size_t>(col_indices_[k]) * d;
      for (std::size_t j = 0; j < d; ++j) dst[j] += v * src[j];
    }
  }
  return out;
}

DenseMatrix SparseMatrix::multiply_transposed(const DenseMatrix& x) const {
  if (x.rows() != rows_) {
    throw InvalidInput("SparseMatrix::multiply_transposed: dimension mismatch");
  }
  DenseMatrix out(cols_, x.cols());
  const std::size_t d = x.cols();
  for (std::size_t r = 0; r < rows_; ++r) {
    const double* src = x.data() + r * d;
    for (std::size_t k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
      const double v = values_[k];
      double* dst = out.data() + static_cast<std::size_t>(col_indices_[k]) * d;
      for (std::size_t j = 0; j < d; ++j) dst[j] += v * src[j];
    }
  }
  return out;
}

std::vector<double> SparseMatrix::multiply(std::span<const double> x) const {
  if (x.size() != cols_) throw InvalidInput("SparseMatrix::multiply: dimension mismatch");
  std::vector<double> out(rows_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    double s = 0.0;
    for (std::size_t k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
      s += values_[k] * x[col_indices_[k]];
    }
    out[r] = s;
  }
  return out;
}

std::vector<double> SparseMatrix::row_sums() const {
  std::vector<double> out(rows_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r)
    for (double v : row_values(r)) out[r] += v;
  return out;
}

SparseMatrix compact(const SparseMatrix& a, double threshold) {
  std::vector<std::size_t> offsets(a.rows() + 1, 0);
  std::vector<Index> cols;
  std::vector<double> vals;
  cols.reserve(a.nnz());
  vals.reserve(a.nnz());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto rc = a.row_cols(r);
    auto rv = a.row_values(r);
    for (std::size_t k = 0; k < rc.size(); ++k) {
      if (std::abs(rv[k]) > threshold) {
        cols.push_back(rc[k]);
        vals.push_back(rv[k]);
      }
    }
    offsets[r + 1] = cols.size();
  }
  return SparseMatrix(a.rows(), a.cols(), std::move(offsets), std::move(cols), std::move(vals));
}

SparseMatrix spgemm(const SparseMatrix& a, const SparseMatrix& b) {
  if (a.cols() != b.rows()) {
    throw InvalidInput("spgemm: a.cols (" + std::to_string(a.cols()) + ") != b.rows (" +
                       std::to_string(b.rows()) + ")");
  }
  const std::size_t n_out = b.cols();
  std::vector<double> acc(n_out, 0.0);
  std::vector<double> mass(n_out, 0.0);
  std::vector<char> seen(n_out, 0);
  std::vector<Index> touched;

  std::vector<std::size_t> offsets(a.rows() + 1, 0);
  std::vector<Index> cols;
  std::vector<double> vals;

  for (std::size_t r = 0; r < a.rows(); ++r) {
    touched.clear();
    auto ac = a.row_cols(r);
    auto av = a.row_values(r);
    for (std::size_t k = 0; k < ac.size(); ++k) {
      const double s = av[k];
      auto bc = b.row_cols(ac[k]);
      auto bv = b.row_values(ac[k]);
      for (std::size_t t = 0; t < bc.size(); ++t) {
        const Index c = bc[t];
        if (!seen[c]) {
          seen[c] = 1;
          touched.push_back(c);
        }
        const double term = s * bv[t];
        acc[c] += term;
        mass[c] += std::abs(term);
      }
    }
    std::sort(touched.begin(), touched.end());
    for (Index c : touched) {
      const double v = acc[c];
      if (v != 0.0 && std::abs(v) > kCancellation * mass[c]) {
        cols.push_back(c);
        vals.push_back(v);
      }
      acc[c] = 0.0;
      mass[c] = 0.0;
      seen[c] = 0;
    }
    offsets[r + 1] = cols.size();
  }
  return SparseMatrix(a.rows(), n_out, std::move(offsets), std::move(cols), std::move(vals));
}

SparseMatrix sym_normalize(const SparseMatrix& a) {
  if (a.rows() != a.cols()) throw InvalidInput("sym_normalize: matrix is not square");
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (double v : a.row_values(r)) {
      if (v != 1.0) throw InvalidInput("sym_normalize: adjacency must be binary");
    }
    if (a.contains(r, r)) {
      throw InvalidInput("sym_normalize: nonzero diagonal at row " + std::to_string(r) +
                         " (self-loops are added internally)");
    }
  }
  if (!a.is_symmetric_pattern_and_values()) throw InvalidInput("sym_normalize: asymmetric input");

  const std::size_t n = a.rows();
  std::vector<double> inv_sqrt(n);
  for (std::size_t r = 0; r < n; ++r) {
    inv_sqrt[r] = 1.0 / std::sqrt(static_cast<double>(a.row_nnz(r) + 1));
  }
  std::vector<std::size_t> offsets(n + 1, 0);
  std::vector<Index> cols;
  std::vector<double> vals;
  cols.reserve(a.nnz() + n);
  vals.reserve(a.nnz() + n);
  for (std::size_t r = 0; r < n; ++r) {
    bool diag_done = false;
    for (Index c : a.row_cols(r)) {
      if (!diag_done && c > r) {
        cols.push_back(static_cast<Index>(r));
        vals.push_back(inv_sqrt[r] * inv_sqrt[r]);
        diag_done = true;
      }
      cols.push_back(c);
      vals.push_back(inv_sqrt[r] * inv_sqrt[c]);
    }
    if (!diag_done) {
      cols.push_back(static_cast<Index>(r));
      vals.push_back(inv_sqrt[r] * inv_sqrt[r]);
    }
    offsets[r + 1] = cols.size();
  }
  return SparseMatrix(n, n, std::move(offsets), std::move(cols), std::move(vals));
}

SparseMatrix row_normalize(const SparseMatrix& a) {
  std::vector<double> vals(a.values().begin(), a.values().end());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    double s = 0.0;
    for (std::size_t k = a.row_offsets()[r]; k < a.row_offsets()[r + 1]; ++k) {
      if (vals[k] < 0.0) throw InvalidInput("row_normalize: negative entry in row " + std::to_string(r));
      s += vals[k];
    }
    if (s > 0.0) {
      for (std::size_t k = a.row_offsets()[r]; k < a.row_offsets()[r + 1]; ++k) vals[k] /= s;
    }
  }
  return SparseMatrix(a.rows(), a.cols(),
                      std::vector<std::size_t>(a.row_offsets().begin(), a.row_offsets().end()),
                      std::vector<Index>(a.col_indices().begin(), a.col_indices().end()),
                      std::move(vals));
}

SparseMatrix relu_sub(const SparseMatrix& a, const SparseMatrix& b) {
  require_same_shape(a, b, "relu_sub");
  std::vector<std::size_t> offsets(a.rows() + 1, 0);
  std::vector<Index> cols;
  std::vector<double> vals;
  cols.reserve(a.nnz());
  vals.reserve(a.nnz());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    merge_rows(a, b, r, [&](Index c, double x, double y) {
      const double d = x - y;
      const double scale = std::max(std::abs(x), std::abs(y));
      if (d > kExplicitZero && d > kCancellation * scale) {
        cols.push_back(c);
        vals.push_back(d);
      }
    });
    offsets[r + 1] = cols.size();
  }
  return SparseMatrix(a.rows(), a.cols(), std::move(offsets), std::move(cols), std::move(vals));
}

SparseMatrix sparse_add(const SparseMatrix& a, const SparseMatrix& b, double alpha, double beta) {
  require_same_shape(a, b, "sparse_add");
  std::vector<std::size_t> offsets(a.rows() + 1, 0);
  std::vector<Index> cols;
  std::vector<double> vals;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    merge_rows(a, b, r, [&](Index c, double x, double y) {
      const double v = alpha * x + beta * y;
      const double scale = std::abs(alpha * x) + std::abs(beta * y);
      if (std::abs(v) > kExplicitZero && std::abs(v) > kCancellation * scale) {
        cols.push_back(c);
        vals.push_back(v);
      }
    });
    offsets[r + 1] = cols.size();
  }
  return SparseMatrix(a.rows(), a.cols(), std::move(offsets), std::move(cols), std::move(vals));
}

SparseMatrix mask_out(const SparseMatrix& x, const SparseMatrix& exclude) {
  require_same_shape(x, exclude, "mask_out");
  std::vector<std::size_t> offsets(x.rows() + 1, 0);
  std::vector<Index> cols;
  std::vector<double> vals;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto xc = x.row_cols(r);
    auto xv = x.row_values(r);
    auto ec = exclude.row_cols(r);
    std::size_t j = 0;
    for (std::size_t i = 0; i < xc.size(); ++i) {
      while (j < ec.size() && ec[j] < xc[i]) ++j;
      if (j < ec.size() && ec[j] == xc[i]) continue;
      cols.push_back(xc[i]);
      vals.push_back(xv[i]);
    }
    offsets[r + 1] = cols.size();
  }
  return SparseMatrix(x.rows(), x.cols(), std::move(offsets), std::move(cols), std::move(vals));
}

double spectral_radius(const SparseMatrix& a, int iterations, std::uint64_t seed) {
  if (a.rows() != a.cols()) throw InvalidInput("spectral_radius: matrix is not square");
  if (a.rows() == 0) return 0.0;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.5, 1.5);
  std::vector<double> x(a.rows());
  for (double& v : x) v = dist(rng);
  double estimate = 0.0;
  for (int it = 0; it < iterations; ++it) {
    double norm_x = std::sqrt(dot(x, x));
    if (norm_x == 0.0) return 0.0;
    for (double& v : x) v /= norm_x;
    x = a.multiply(std::span<const double>(x));
    estimate = std::sqrt(dot(x, x));
  }
  return estimate;
}

}  // namespace adaptcs
