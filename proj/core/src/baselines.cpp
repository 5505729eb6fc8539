#include "adaptcs/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <functional>
#include <queue>

#include "adaptcs/errors.hpp"

namespace adaptcs {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void check_query(const Graph& g, NodeId q) {
  if (q >= g.n()) throw InvalidInput("query node " + std::to_string(q) + " out of range");
}

// BFS from q over edges accepted by `keep_edge`, returning nodes sorted by
// (distance, id) excluding q.
std::vector<NodeId> bfs_order(const Graph& g, NodeId q,
                              const std::function<bool(NodeId, EdgeId)>& keep_edge) {
  std::vector<int> dist(g.n(), kUnreachable);
  std::vector<NodeId> level{q};
  std::vector<NodeId> out;
  dist[q] = 0;
  while (!level.empty()) {
    std::vector<NodeId> next;
    for (NodeId u : level) {
      auto nbrs = g.neighbors(u);
      auto eids = g.incident_edges(u);
      for (std::size_t i = 0; i < nbrs.size(); ++i) {
        const NodeId v = nbrs[i];
        if (dist[v] != kUnreachable || !keep_edge(v, eids[i])) continue;
        dist[v] = dist[u] + 1;
        next.push_back(v);
      }
    }
    std::sort(next.begin(), next.end());
    out.insert(out.end(), next.begin(), next.end());
    level = std::move(next);
  }
  return out;
}

// Fills members level by level: for each threshold from `top` down to `bottom`,
// BFS-order the nodes reachable under that threshold and append unseen ones.
CommunityResult layered_community(const Graph& g, NodeId q, std::size_t community_size,
                                  int top, int bottom, const char* algorithm,
                                  const std::function<bool(NodeId, EdgeId, int)>& keep) {
  CommunityResult res;
  res.query = q;
  res.algorithm = algorithm;
  res.members.push_back(q);
  res.scores.push_back(static_cast<double>(top));
  std::vector<char> taken(g.n(), 0);
  taken[q] = 1;
  for (int level = top; level >= bottom && res.members.size() < community_size; --level) {
    auto order = bfs_order(g, q, [&](NodeId v, EdgeId e) { return keep(v, e, level); });
    for (NodeId v : order) {
      if (res.members.size() >= community_size) break;
      if (taken[v]) continue;
      taken[v] = 1;
      res.members.push_back(v);
      res.scores.push_back(static_cast<double>(level));
    }
  }
  return res;
}

}  // namespace

std::vector<int> core_numbers(const Graph& g) {
  const std::size_t n = g.n();
  std::vector<int> deg(n);
  int max_deg = 0;
  for (NodeId u = 0; u < n; ++u) {
    deg[u] = static_cast<int>(g.degree(u));
    max_deg = std::max(max_deg, deg[u]);
  }
  // Batagelj-Zaversnik bucket ordering.
  std::vector<std::size_t> bin(static_cast<std::size_t>(max_deg) + 1, 0);
  for (int d : deg) ++bin[static_cast<std::size_t>(d)];
  std::size_t start = 0;
  for (auto& b : bin) {
    const std::size_t count = b;
    b = start;
    start += count;
  }
  std::vector<NodeId> vert(n);
  std::vector<std::size_t> pos(n);
  for (NodeId u = 0; u < n; ++u) {
    pos[u] = bin[static_cast<std::size_t>(deg[u])]++;
    vert[pos[u]] = u;
  }
  for (std::size_t d = bin.size() - 1; d > 0; --d) bin[d] = bin[d - 1];
  if (!bin.empty()) bin[0] = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const NodeId v = vert[i];
    for (NodeId u : g.neighbors(v)) {
      if (deg[u] > deg[v]) {
        const auto du = static_cast<std::size_t>(deg[u]);
        const std::size_t pu = pos[u];
        const std::size_t pw = bin[du];
        const NodeId w = vert[pw];
        if (u != w) {
          std::swap(vert[pu], vert[pw]);
          pos[u] = pw;
          pos[w] = pu;
        }
        ++bin[du];
        --deg[u];
      }
    }
  }
  return deg;
}

std::vector<int> edge_supports(const Graph& g) {
  std::vector<int> sup(g.m(), 0);
  const auto edges = g.edges();
  for (EdgeId e = 0; e < edges.size(); ++e) {
    auto a = g.neighbors(edges[e].u);
    auto b = g.neighbors(edges[e].v);
    std::size_t i = 0;
    std::size_t j = 0;
    int count = 0;
    while (i < a.size() && j < b.size()) {
      if (a[i] < b[j]) {
        ++i;
      } else if (b[j] < a[i]) {
        ++j;
      } else {
        ++count;
        ++i;
        ++j;
      }
    }
    sup[e] = count;
  }
  return sup;
}

std::vector<int> truss_numbers(const Graph& g) {
  std::vector<int> sup = edge_supports(g);
  std::vector<int> truss(g.m(), 2);
  std::vector<char> alive(g.m(), 1);
  using Item = std::pair<int, EdgeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  for (EdgeId e = 0; e < g.m(); ++e) heap.emplace(sup[e], e);
  const auto edges = g.edges();
  int level = 0;
  while (!heap.empty()) {
    auto [s, e] = heap.top();
    heap.pop();
    if (!alive[e] || s != sup[e]) continue;
    level = std::max(level, s);
    truss[e] = level + 2;
    alive[e] = 0;
    NodeId u = edges[e].u;
    NodeId v = edges[e].v;
    if (g.degree(u) > g.degree(v)) std::swap(u, v);
    auto nbrs = g.neighbors(u);
    auto eids = g.incident_edges(u);
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
      const NodeId w = nbrs[i];
      const EdgeId uw = eids[i];
      if (w == v || !alive[uw]) continue;
      const std::int64_t vw = g.edge_id(v, w);
      if (vw < 0 || !alive[static_cast<EdgeId>(vw)]) continue;
      for (EdgeId f : {uw, static_cast<EdgeId>(vw)}) {
        if (sup[f] > level) {
          --sup[f];
          heap.emplace(sup[f], f);
        }
      }
    }
  }
  return truss;
}

CommunityResult k_core_community(const Graph& g, NodeId q, std::size_t community_size) {
  return k_core_community(g, core_numbers(g), q, community_size);
}

CommunityResult k_core_community(const Graph& g, std::span<const int> core, NodeId q,
                                 std::size_t community_size) {
  check_query(g, q);
  const auto start = Clock::now();
  auto res = layered_community(g, q, community_size, core[q], 0, "k-core",
                               [&](NodeId v, EdgeId, int level) { return core[v] >= level; });
  res.elapsed_s = seconds_since(start);
  return res;
}

CommunityResult k_truss_community(const Graph& g, NodeId q, std::size_t community_size) {
  return k_truss_community(g, truss_numbers(g), q, community_size);
}

CommunityResult k_truss_community(const Graph& g, std::span<const int> truss, NodeId q,
                                  std::size_t community_size) {
  check_query(g, q);
  const auto start = Clock::now();
  int top = 2;
  for (EdgeId e : g.incident_edges(q)) top = std::max(top, truss[e]);
  auto res = layered_community(g, q, community_size, top, 2, "k-truss",
                               [&](NodeId, EdgeId e, int level) { return truss[e] >= level; });
  res.elapsed_s = seconds_since(start);
  return res;
}

LabelPropagation::LabelPropagation(const DataSet& ds, int iterations)
    : ds_(&ds), scores_(ds.graph.n(), static_cast<std::size_t>(ds.num_classes)) {
  if (iterations < 0) throw InvalidInput("label propagation: iterations must be >= 0");
  const std::size_t n = ds.graph.n();
  DenseMatrix clamp(n, static_cast<std::size_t>(ds.num_classes));
  std::vector<char> is_train(n, 0);
  for (NodeId u : ds.nodes_in(Split::train)) {
    clamp(u, static_cast<std::size_t>(ds.labels[u])) = 1.0;
    is_train[u] = 1;
  }
  const SparseMatrix p = row_normalize(ds.graph.adjacency());
  scores_ = clamp;
  for (int it = 0; it < iterations; ++it) {
    scores_ = p.multiply(scores_);
    for (std::size_t u = 0; u < n; ++u) {
      if (!is_train[u]) continue;
      auto dst = scores_.row(u);
      auto src = clamp.row(u);
      std::copy(src.begin(), src.end(), dst.begin());
    }
  }
}

CommunityResult LabelPropagation::community(NodeId q, std::size_t community_size) const {
  const Graph& g = ds_->graph;
  check_query(g, q);
  const auto start = Clock::now();
  CommunityResult res;
  res.query = q;
  res.algorithm = "lp";
  res.members.push_back(q);

  auto sq = scores_.row(q);
  const auto best = std::max_element(sq.begin(), sq.end());
  const bool has_mass = best != sq.end() && *best > 0.0;
  const std::size_t want = community_size > 0 ? community_size - 1 : 0;

  std::vector<std::pair<NodeId, double>> ranked;
  std::vector<int> dist;
  if (has_mass) {
    const auto c = static_cast<std::size_t>(best - sq.begin());
    res.scores.push_back(*best);
    dist = bfs_distances(g, q);
    for (NodeId u = 0; u < g.n(); ++u) {
      if (u != q && dist[u] != kUnreachable) ranked.emplace_back(u, scores_(u, c));
    }
  } else {
    // No propagated mass: rank by feature cosine instead.
    res.algorithm = "lp-cosine-fallback";
    res.scores.push_back(1.0);
    const DenseMatrix unit = row_normalized(ds_->features);
    auto xq = unit.row(q);
    for (NodeId u = 0; u < g.n(); ++u) {
      if (u != q) ranked.emplace_back(u, dot(xq, unit.row(u)));
    }
  }
  const std::size_t take = std::min(want, ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(take), ranked.end(),
                    [&](const auto& a, const auto& b) {
                      if (a.second != b.second) return a.second > b.second;
                      if (!dist.empty() && dist[a.first] != dist[b.first]) {
                        return dist[a.first] < dist[b.first];
                      }
                      return a.first < b.first;
                    });
  for (std::size_t i = 0; i < take; ++i) {
    res.members.push_back(ranked[i].first);
    res.scores.push_back(ranked[i].second);
  }
  res.elapsed_s = seconds_since(start);
  return res;
}

CommunityResult label_propagation_community(const DataSet& ds, NodeId q,
                                            std::size_t community_size, int iterations) {
  return LabelPropagation(ds, iterations).community(q, community_size);
}

}  // namespace adaptcs
