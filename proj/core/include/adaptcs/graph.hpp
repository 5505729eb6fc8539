#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "adaptcs/sparse_matrix.hpp"

namespace adaptcs {

using NodeId = std::uint32_t;
using EdgeId = std::uint32_t;

struct Edge {
  NodeId u;  // u < v
  NodeId v;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Simple undirected graph: no self-loops, no parallel edges.
class Graph {
 public:
  Graph() = default;

  /// Symmetrizes and deduplicates; throws InvalidInput on self-loops or ids >= n.
  static Graph from_edges(std::size_t n, std::span<const std::pair<NodeId, NodeId>> edges);

  std::size_t n() const noexcept { return n_; }
  std::size_t m() const noexcept { return edges_.size(); }
  std::span<const Edge> edges() const noexcept { return edges_; }
  /// Binary symmetric adjacency with an empty diagonal.
  const SparseMatrix& adjacency() const noexcept { return adjacency_; }

  std::size_t degree(NodeId u) const noexcept { return adjacency_.row_nnz(u); }
  std::span<const NodeId> neighbors(NodeId u) const noexcept { return adjacency_.row_cols(u); }
  /// Edge ids parallel to neighbors(u).
  std::span<const EdgeId> incident_edges(NodeId u) const noexcept {
    return {csr_edge_ids_.data() + adjacency_.row_offsets()[u], degree(u)};
  }
  bool has_edge(NodeId u, NodeId v) const { return adjacency_.contains(u, v); }
  /// Id of edge {u, v}, or -1 when absent.
  std::int64_t edge_id(NodeId u, NodeId v) const;

  /// Subgraph on the same node set keeping edges whose flag is set.
  Graph edge_subgraph(std::span<const char> keep) const;

  /// FNV-1a over n and the sorted edge list.
  std::uint64_t hash() const noexcept;

 private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  SparseMatrix adjacency_;
  std::vector<EdgeId> csr_edge_ids_;
};

inline constexpr int kUnreachable = -1;

/// Hop distances from source; kUnreachable for other components.
std::vector<int> bfs_distances(const Graph& g, NodeId source);

/// Fraction of edges whose endpoints share a label. Throws UndefinedMetric when m == 0.
double edge_homophily(const Graph& g, std::span<const int> labels);

}  // namespace adaptcs
