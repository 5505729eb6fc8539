#include "adaptcs/lowrank.hpp"

#include <cmath>
#include <string>

#include "adaptcs/errors.hpp"

namespace adaptcs {
namespace {

void check_hop(const LatentHopPlan& plan, int k) {
  if (k < 1 || k > plan.k_max) {
    throw InvalidInput("latent hop " + std::to_string(k) + " outside [1, " +
                       std::to_string(plan.k_max) + "]");
  }
}

}  // namespace

LatentHopPlan make_latent_plan(SvdFactors svd, const DenseMatrix& x, int k_max) {
  if (k_max < 1) throw InvalidInput("latent plan: K must be >= 1");
  if (svd.v.rows() != x.rows() || svd.u.rows() != x.rows()) {
    throw InvalidInput("latent plan: factor rows do not match feature rows");
  }
  const std::size_t r = svd.rank();
  LatentHopPlan plan;
  plan.k_max = k_max;
  plan.projected_features = matmul_tn(svd.v, x);

  // C S with C = V^T U.
  DenseMatrix cs = matmul_tn(svd.v, svd.u);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < r; ++j) cs(i, j) *= svd.sigma[j];
  }
  DenseMatrix m_prev(r, r);
  for (std::size_t i = 0; i < r; ++i) m_prev(i, i) = svd.sigma[i];
  plan.delta.resize(static_cast<std::size_t>(k_max) + 1);
  plan.delta[1] = m_prev;
  for (int k = 2; k <= k_max; ++k) {
    DenseMatrix m = matmul(m_prev, cs);
    plan.delta[static_cast<std::size_t>(k)] = m - m_prev;
    m_prev = std::move(m);
  }
  plan.svd = std::move(svd);
  return plan;
}

DenseMatrix latent_hop_block(const LatentHopPlan& plan, int k) {
  check_hop(plan, k);
  return matmul(plan.delta[static_cast<std::size_t>(k)], plan.projected_features);
}

DenseMatrix latent_hop_features(const LatentHopPlan& plan, int k) {
  return matmul(plan.svd.u, latent_hop_block(plan, k));
}

std::vector<double> global_renorm_weights(const LatentHopPlan& plan, int k) {
  check_hop(plan, k);
  const std::size_t r = plan.svd.rank();
  const DenseMatrix& v = plan.svd.v;
  std::vector<double> vt1(r, 0.0);
  for (std::size_t i = 0; i < v.rows(); ++i) {
    auto row = v.row(i);
    for (std::size_t j = 0; j < r; ++j) vt1[j] += row[j];
  }
  const DenseMatrix& d = plan.delta[static_cast<std::size_t>(k)];
  std::vector<double> dv(r, 0.0);
  for (std::size_t i = 0; i < r; ++i) dv[i] = dot(d.row(i), vt1);
  std::vector<double> w(plan.svd.u.rows());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double s = dot(plan.svd.u.row(i), dv);
    w[i] = s >= 0 ? 1.0 / (1.0 + std::exp(-s)) : std::exp(s) / (1.0 + std::exp(s));
  }
  return w;
}

DenseMatrix global_renorm(const LatentHopPlan& plan, int k, const DenseMatrix& features) {
  if (features.rows() != plan.svd.u.rows()) {
    throw InvalidInput("global_renorm: feature rows do not match the plan");
  }
  return scale_rows(features, global_renorm_weights(plan, k));
}

}  // namespace adaptcs
