#include "adaptcs/graph.hpp"

#include <algorithm>
#include <deque>
#include <string>

#include "adaptcs/errors.hpp"

namespace adaptcs {
namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

void fnv_mix(std::uint64_t& h, std::uint64_t value) {
  for (int i = 0; i < 8; ++i) {
    h ^= (value >> (8 * i)) & 0xffU;
    h *= kFnvPrime;
  }
}

}  // namespace

Graph Graph::from_edges(std::size_t n, std::span<const std::pair<NodeId, NodeId>> edges) {
  Graph g;
  g.n_ = n;
  g.edges_.reserve(edges.size());
  for (auto [a, b] : edges) {
    if (a >= n || b >= n) {
      throw InvalidInput("Graph: edge (" + std::to_string(a) + ", " + std::to_string(b) +
                         ") references a node >= n = " + std::to_string(n));
    }
    if (a == b) throw InvalidInput("Graph: self-loop at node " + std::to_string(a));
    g.edges_.push_back(a < b ? Edge{a, b} : Edge{b, a});
  }
  std::sort(g.edges_.begin(), g.edges_.end(),
            [](const Edge& x, const Edge& y) { return x.u != y.u ? x.u < y.u : x.v < y.v; });
  g.edges_.erase(std::unique(g.edges_.begin(), g.edges_.end()), g.edges_.end());

  std::vector<std::size_t> offsets(n + 1, 0);
  for (const Edge& e : g.edges_) {
    ++offsets[e.u + 1];
    ++offsets[e.v + 1];
  }
  for (std::size_t i = 0; i < n; ++i) offsets[i + 1] += offsets[i];
  std::vector<std::pair<NodeId, EdgeId>> slots(offsets.back());
  std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
  for (EdgeId id = 0; id < g.edges_.size(); ++id) {
    const Edge& e = g.edges_[id];
    slots[cursor[e.u]++] = {e.v, id};
    slots[cursor[e.v]++] = {e.u, id};
  }
  std::vector<Index> cols(slots.size());
  g.csr_edge_ids_.resize(slots.size());
  for (std::size_t r = 0; r < n; ++r) {
    std::sort(slots.begin() + static_cast<std::ptrdiff_t>(offsets[r]),
              slots.begin() + static_cast<std::ptrdiff_t>(offsets[r + 1]));
    for (std::size_t k = offsets[r]; k < offsets[r + 1]; ++k) {
      cols[k] = slots[k].first;
      g.csr_edge_ids_[k] = slots[k].second;
    }
  }
  g.adjacency_ = SparseMatrix(n, n, std::move(offsets), std::move(cols),
                              std::vector<double>(slots.size(), 1.0));
  return g;
}

std::int64_t Graph::edge_id(NodeId u, NodeId v) const {
  auto nb = neighbors(u);
  auto it = std::lower_bound(nb.begin(), nb.end(), v);
  if (it == nb.end() || *it != v) return -1;
  return incident_edges(u)[static_cast<std::size_t>(it - nb.begin())];
}

Graph Graph::edge_subgraph(std::span<const char> keep) const {
  if (keep.size() != edges_.size()) throw InvalidInput("edge_subgraph: flag count != m");
  std::vector<std::pair<NodeId, NodeId>> kept;
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    if (keep[i]) kept.emplace_back(edges_[i].u, edges_[i].v);
  }
  return from_edges(n_, kept);
}

std::uint64_t Graph::hash() const noexcept {
  std::uint64_t h = kFnvOffset;
  fnv_mix(h, n_);
  for (const Edge& e : edges_) {
    fnv_mix(h, e.u);
    fnv_mix(h, e.v);
  }
  return h;
}

std::vector<int> bfs_distances(const Graph& g, NodeId source) {
  std::vector<int> dist(g.n(), kUnreachable);
  std::deque<NodeId> frontier{source};
  dist[source] = 0;
  while (!frontier.empty()) {
    const NodeId u = frontier.front();
    frontier.pop_front();
    for (NodeId w : g.neighbors(u)) {
      if (dist[w] == kUnreachable) {
        dist[w] = dist[u] + 1;
        frontier.push_back(w);
      }
    }
  }
  return dist;
}

double edge_homophily(const Graph& g, std::span<const int> labels) {
  if (labels.size() != g.n()) throw InvalidInput("edge_homophily: label count != n");
  if (g.m() == 0) throw UndefinedMetric("edge_homophily: graph has no edges");
  std::size_t same = 0;
  for (const Edge& e : g.edges()) same += labels[e.u] == labels[e.v] ? 1 : 0;
  return static_cast<double>(same) / static_cast<double>(g.m());
}

}  // namespace adaptcs
