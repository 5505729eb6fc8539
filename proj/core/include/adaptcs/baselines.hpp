#pragma once

#include <cstddef>
#include <vector>

#include "adaptcs/community.hpp"
#include "adaptcs/dataset.hpp"
#include "adaptcs/graph.hpp"

namespace adaptcs {

/// Core number of every node (bucket peeling, O(n + m)).
std::vector<int> core_numbers(const Graph& g);

/// Triangle support |N(u) ∩ N(v)| of every edge, indexed by edge id.
std::vector<int> edge_supports(const Graph& g);

/// Truss number of every edge: the largest k such that the edge survives in the
/// k-truss (each edge in >= k-2 triangles). Edges in no triangle get 2.
std::vector<int> truss_numbers(const Graph& g);

/// Community of `community_size` nodes including q, taken from q's highest core by
/// BFS distance (ties by id), padded from lower cores.
CommunityResult k_core_community(const Graph& g, NodeId q, std::size_t community_size);
CommunityResult k_core_community(const Graph& g, std::span<const int> core, NodeId q,
                                 std::size_t community_size);

/// Same contract with the maximal truss containing q, closest truss first.
CommunityResult k_truss_community(const Graph& g, NodeId q, std::size_t community_size);
CommunityResult k_truss_community(const Graph& g, std::span<const int> truss, NodeId q,
                                  std::size_t community_size);

/// Clamped propagation of train one-hot labels with the row-normalized adjacency.
class LabelPropagation {
 public:
  LabelPropagation(const DataSet& ds, int iterations = 50);

  /// Top community_size-1 reachable nodes by score in q's predicted class, plus q.
  /// Falls back to feature cosine when q receives no mass.
  CommunityResult community(NodeId q, std::size_t community_size) const;

  const DenseMatrix& scores() const noexcept { return scores_; }

 private:
  const DataSet* ds_;
  DenseMatrix scores_;  // n x c
};

CommunityResult label_propagation_community(const DataSet& ds, NodeId q,
                                            std::size_t community_size, int iterations = 50);

}  // namespace adaptcs
