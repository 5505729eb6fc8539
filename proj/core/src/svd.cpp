#include "adaptcs/svd.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "adaptcs/errors.hpp"
#include "eigen_bridge.hpp"

namespace adaptcs {
namespace {

using Eigen::MatrixXd;

MatrixXd to_eigen(const DenseMatrix& m) { return detail::view(m); }

MatrixXd orthonormal_basis(const MatrixXd& y) {
  Eigen::HouseholderQR<MatrixXd> qr(y);
  return qr.householderQ() * MatrixXd::Identity(y.rows(), y.cols());
}

MatrixXd apply(const SparseMatrix& a, const MatrixXd& x) {
  return to_eigen(a.multiply(detail::to_dense(x)));
}

MatrixXd apply_transposed(const SparseMatrix& a, const MatrixXd& x) {
  return to_eigen(a.multiply_transposed(detail::to_dense(x)));
}

double max_residual(const SparseMatrix& a, const MatrixXd& u, const Eigen::VectorXd& s,
                    const MatrixXd& v, std::size_t r) {
  if (r == 0 || s(0) <= 0.0) return 0.0;
  const MatrixXd av = apply(a, v.leftCols(static_cast<Eigen::Index>(r)));
  double worst = 0.0;
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(r); ++i) {
    worst = std::max(worst, (av.col(i) - s(i) * u.col(i)).norm());
  }
  return worst / s(0);
}

}  // namespace

SvdFactors truncated_svd(const SparseMatrix& a, std::size_t r, std::uint64_t seed,
                         const SvdOptions& options) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  const std::size_t full = std::min(m, n);
  if (r == 0 || r > full) {
    throw InvalidInput("truncated_svd: rank " + std::to_string(r) + " outside [1, " +
                       std::to_string(full) + "]");
  }
  for (double v : a.values()) {
    if (!std::isfinite(v)) throw InvalidInput("truncated_svd: non-finite entry");
  }
  const std::size_t l = std::min(r + options.oversampling, full);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  MatrixXd omega(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(l));
  for (Eigen::Index j = 0; j < omega.cols(); ++j)
    for (Eigen::Index i = 0; i < omega.rows(); ++i) omega(i, j) = gauss(rng);

  MatrixXd q = orthonormal_basis(apply(a, omega));
  for (int it = 0; it < options.power_iterations; ++it) {
    q = orthonormal_basis(apply(a, orthonormal_basis(apply_transposed(a, q))));
  }

  MatrixXd u;
  MatrixXd v;
  Eigen::VectorXd s;
  double residual = 0.0;
  for (int iter = 0;; ++iter) {
    // B = Q^T A; factor B^T = Q2 R, then R = Ur S Vr^T gives B = Vr S (Q2 Ur)^T.
    const MatrixXd bt = apply_transposed(a, q);
    Eigen::HouseholderQR<MatrixXd> qr(bt);
    const MatrixXd q2 = qr.householderQ() * MatrixXd::Identity(bt.rows(), bt.cols());
    const MatrixXd rr = qr.matrixQR().topRows(bt.cols()).triangularView<Eigen::Upper>();
    Eigen::JacobiSVD<MatrixXd> small(rr, Eigen::ComputeFullU | Eigen::ComputeFullV);
    s = small.singularValues();
    u = q * small.matrixV();
    v = q2 * small.matrixU();

    residual = max_residual(a, u, s, v, r);
    if (residual <= options.tolerance) break;
    if (iter >= options.max_iterations) {
      throw ConvergenceError("truncated_svd: subspace iteration did not converge after " +
                                 std::to_string(iter) + " iterations",
                             residual);
    }
    q = orthonormal_basis(apply(a, v));
  }

  SvdFactors out;
  out.u = DenseMatrix(m, r);
  out.v = DenseMatrix(n, r);
  out.sigma.resize(r);
  for (std::size_t i = 0; i < r; ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    Eigen::Index pivot = 0;
    u.col(col).cwiseAbs().maxCoeff(&pivot);
    const double sign = u(pivot, col) < 0.0 ? -1.0 : 1.0;
    out.sigma[i] = std::max(0.0, s(col));
    for (std::size_t row = 0; row < m; ++row) {
      out.u(row, i) = sign * u(static_cast<Eigen::Index>(row), col);
    }
    for (std::size_t row = 0; row < n; ++row) {
      out.v(row, i) = sign * v(static_cast<Eigen::Index>(row), col);
    }
  }
  return out;
}

double svd_residual(const SparseMatrix& a, const SvdFactors& f) {
  if (f.rank() == 0 || f.sigma[0] <= 0.0) return 0.0;
  const DenseMatrix av = a.multiply(f.v);
  double worst = 0.0;
  for (std::size_t i = 0; i < f.rank(); ++i) {
    double s = 0.0;
    for (std::size_t row = 0; row < av.rows(); ++row) {
      const double d = av(row, i) - f.sigma[i] * f.u(row, i);
      s += d * d;
    }
    worst = std::max(worst, std::sqrt(s));
  }
  return worst / f.sigma[0];
}

}  // namespace adaptcs
