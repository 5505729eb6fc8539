#pragma once

#include <vector>

#include "adaptcs/dense_matrix.hpp"
#include "adaptcs/svd.hpp"

namespace adaptcs {

/// Rank-r latent hop propagation.
///
/// With A ≈ U S V^T and C = V^T U, powers factor as A^k ≈ U M_k V^T where
/// M_1 = S and M_k = M_{k-1} C S. Hop k uses the r x r difference
/// D_k = M_k - M_{k-1} (D_1 = S). When U = V this is S^k - S^(k-1).
struct LatentHopPlan {
  SvdFactors svd;
  DenseMatrix projected_features;  // V^T X, r x d
  std::vector<DenseMatrix> delta;  // D_k at index k; index 0 unused
  int k_max = 0;
};

LatentHopPlan make_latent_plan(SvdFactors svd, const DenseMatrix& x, int k_max);

/// U D_k (V^T X). Throws InvalidInput unless 1 <= k <= K.
DenseMatrix latent_hop_features(const LatentHopPlan& plan, int k);

/// D_k (V^T X), the r x d latent block that latent_hop_features lifts by U.
DenseMatrix latent_hop_block(const LatentHopPlan& plan, int k);

/// sigmoid(U D_k V^T 1), one weight per node.
std::vector<double> global_renorm_weights(const LatentHopPlan& plan, int k);

/// Row i of features scaled by the hop-k global weight of node i.
DenseMatrix global_renorm(const LatentHopPlan& plan, int k, const DenseMatrix& features);

}  // namespace adaptcs
