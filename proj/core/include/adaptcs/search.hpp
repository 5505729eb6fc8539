#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include "adaptcs/community.hpp"
#include "adaptcs/dataset.hpp"
#include "adaptcs/dense_matrix.hpp"
#include "adaptcs/graph.hpp"

namespace adaptcs {

struct SearchConfig {
  double tau_sign = 0.9;    // SCS edge-sign threshold
  double tau_weight = 0.9;  // ACS similarity weight
  double lambda_bonus = 1.0;
  double lambda_penalty = 1.0;
  double alpha_top = 2.0;   // candidate pool factor
  std::size_t community_size = 30;
  /// When set, tau_sign is replaced by this quantile of sampled edge cosines.
  std::optional<double> tau_quantile;

  void validate() const;
};

/// Original edges whose endpoint cosine is at least tau_sign.
Graph build_positive_graph(const Graph& g, const DenseMatrix& unit_hidden, double tau_sign);

/// p-quantile of endpoint cosines over up to `samples` seeded edges (all edges when
/// m <= samples).
double quantile_tau(const Graph& g, const DenseMatrix& unit_hidden, double p,
                    std::size_t samples = 10000, std::uint64_t seed = 1);

/// BFS over the positive graph from q; on a stalled frontier, teleports to the
/// unvisited node most similar to q (ties by id). Returns q plus community_size others.
CommunityResult scs_on_positive(const Graph& positive, const DenseMatrix& unit_hidden, NodeId q,
                                std::size_t community_size);

/// Builds the positive graph (honouring tau_quantile) and runs SCS.
CommunityResult scs(const Graph& g, const DenseMatrix& unit_hidden, NodeId q,
                    const SearchConfig& config);

struct HomophilyEstimate {
  double value = 0.5;
  std::size_t edges_used = 0;
  bool fallback = false;  // no train-train edges; value is the neutral 0.5
};

/// Edge homophily over edges with both endpoints in the train split.
HomophilyEstimate estimate_homophily(const Graph& g, const DataSet& ds);

/// Bonus/penalty weight of the adjacency term for homophily h.
double acs_adjacency_weight(double h, double lambda_bonus, double lambda_penalty) noexcept;

/// Ranks the ceil(alpha_top * K) most similar candidates by
/// tau_w * S_qu + (1 - tau_w) * A_qu * w(h); ties by higher S_qu, then lower id.
CommunityResult acs(const Graph& g, const DenseMatrix& unit_hidden, NodeId q,
                    const SearchConfig& config, double h_est);

/// Positive graph and homophily estimate are computed once; queries reuse them.
class CommunitySearcher {
 public:
  CommunitySearcher(const Graph& g, const DenseMatrix& unit_hidden, const SearchConfig& config,
                    double h_est);

  CommunityResult scs(NodeId q) const;
  CommunityResult acs(NodeId q) const;

  const Graph& positive_graph() const noexcept { return positive_; }
  double tau_sign() const noexcept { return tau_sign_; }

 private:
  const Graph* graph_;
  const DenseMatrix* unit_;
  SearchConfig config_;
  double h_est_;
  double tau_sign_;
  Graph positive_;
};

}  // namespace adaptcs
