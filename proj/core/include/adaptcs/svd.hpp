#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "adaptcs/dense_matrix.hpp"
#include "adaptcs/sparse_matrix.hpp"

namespace adaptcs {

/// Rank-r factorization a ≈ u diag(sigma) v^T.
struct SvdFactors {
  DenseMatrix u;              // rows x r
  std::vector<double> sigma;  // descending, nonnegative
  DenseMatrix v;              // cols x r

  std::size_t rank() const noexcept { return sigma.size(); }
};

struct SvdOptions {
  std::size_t oversampling = 10;
  int power_iterations = 4;
  // Converged when max_i ||A v_i - sigma_i u_i|| <= tolerance * sigma_1.
  double tolerance = 1e-10;
  int max_iterations = 2000;
};

/// Randomized subspace iteration for the top-r singular triplets, seeded and
/// deterministic. Throws ConvergenceError when the residual stays above tolerance.
SvdFactors truncated_svd(const SparseMatrix& a, std::size_t r, std::uint64_t seed,
                         const SvdOptions& options = {});

/// max_i ||A v_i - sigma_i u_i|| / sigma_1 for the given factors.
double svd_residual(const SparseMatrix& a, const SvdFactors& f);

}  // namespace adaptcs
