#include "adaptcs/search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <numeric>
#include <random>

#include "adaptcs/errors.hpp"

namespace adaptcs {
namespace {

using Clock = std::chrono::steady_clock;

void check_query(const DenseMatrix& unit, NodeId q) {
  if (q >= unit.rows()) throw InvalidInput("query node " + std::to_string(q) + " out of range");
}

std::vector<double> similarities(const DenseMatrix& unit, NodeId q) {
  std::vector<double> s(unit.rows());
  auto uq = unit.row(q);
  for (std::size_t u = 0; u < s.size(); ++u) s[u] = dot(uq, unit.row(u));
  return s;
}

}  // namespace

void SearchConfig::validate() const {
  if (!(tau_weight >= 0.0 && tau_weight <= 1.0)) throw InvalidInput("tau_weight must lie in [0, 1]");
  if (!(lambda_bonus >= 0.0) || !(lambda_penalty >= 0.0)) {
    throw InvalidInput("lambda_bonus and lambda_penalty must be >= 0");
  }
  if (!(alpha_top >= 1.0)) throw InvalidInput("alpha_top must be >= 1");
  if (!std::isfinite(tau_sign)) throw InvalidInput("tau_sign must be finite");
  if (tau_quantile && !(*tau_quantile >= 0.0 && *tau_quantile <= 1.0)) {
    throw InvalidInput("tau_quantile must lie in [0, 1]");
  }
}

Graph build_positive_graph(const Graph& g, const DenseMatrix& unit_hidden, double tau_sign) {
  if (unit_hidden.rows() != g.n()) throw InvalidInput("embedding rows do not match the graph");
  const auto edges = g.edges();
  std::vector<char> keep(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    keep[e] = dot(unit_hidden.row(edges[e].u), unit_hidden.row(edges[e].v)) >= tau_sign;
  }
  return g.edge_subgraph(keep);
}

double quantile_tau(const Graph& g, const DenseMatrix& unit_hidden, double p, std::size_t samples,
                    std::uint64_t seed) {
  if (g.m() == 0) throw UndefinedMetric("quantile_tau: graph has no edges");
  const auto edges = g.edges();
  std::vector<double> cos;
  if (edges.size() <= samples) {
    for (const Edge& e : edges) cos.push_back(dot(unit_hidden.row(e.u), unit_hidden.row(e.v)));
  } else {
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < samples; ++i) {
      const Edge& e = edges[rng() % edges.size()];
      cos.push_back(dot(unit_hidden.row(e.u), unit_hidden.row(e.v)));
    }
  }
  std::sort(cos.begin(), cos.end());
  const double pos = p * static_cast<double>(cos.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, cos.size() - 1);
  return cos[lo] + (pos - static_cast<double>(lo)) * (cos[hi] - cos[lo]);
}

CommunityResult scs_on_positive(const Graph& positive, const DenseMatrix& unit_hidden, NodeId q,
                                std::size_t community_size) {
  check_query(unit_hidden, q);
  if (positive.n() != unit_hidden.rows()) throw InvalidInput("embedding rows do not match the graph");
  const auto start = Clock::now();
  const std::size_t n = positive.n();
  const std::size_t target = std::min(community_size + 1, n);
  CommunityResult res;
  res.query = q;
  res.algorithm = "scs";
  std::vector<char> visited(n, 0);
  auto uq = unit_hidden.row(q);
  auto add = [&](NodeId v) {
    visited[v] = 1;
    res.members.push_back(v);
    res.scores.push_back(dot(uq, unit_hidden.row(v)));
  };
  add(q);
  std::deque<NodeId> frontier{q};
  std::vector<NodeId> teleport_order;  // built on the first stall
  std::size_t cursor = 0;
  while (res.members.size() < target) {
    if (frontier.empty()) {
      if (teleport_order.empty()) {
        const std::vector<double> sim = similarities(unit_hidden, q);
        teleport_order.resize(n);
        std::iota(teleport_order.begin(), teleport_order.end(), NodeId{0});
        std::sort(teleport_order.begin(), teleport_order.end(), [&](NodeId a, NodeId b) {
          return sim[a] != sim[b] ? sim[a] > sim[b] : a < b;
        });
      }
      while (cursor < teleport_order.size() && visited[teleport_order[cursor]]) ++cursor;
      if (cursor == teleport_order.size()) break;
      const NodeId v = teleport_order[cursor];
      add(v);
      ++res.teleports;
      frontier.push_back(v);
      continue;
    }
    const NodeId u = frontier.front();
    frontier.pop_front();
    for (NodeId v : positive.neighbors(u)) {
      if (visited[v]) continue;
      add(v);
      frontier.push_back(v);
      if (res.members.size() >= target) break;
    }
  }
  res.elapsed_s = std::chrono::duration<double>(Clock::now() - start).count();
  return res;
}

CommunityResult scs(const Graph& g, const DenseMatrix& unit_hidden, NodeId q,
                    const SearchConfig& config) {
  config.validate();
  const double tau = config.tau_quantile ? quantile_tau(g, unit_hidden, *config.tau_quantile)
                                         : config.tau_sign;
  return scs_on_positive(build_positive_graph(g, unit_hidden, tau), unit_hidden, q,
                         config.community_size);
}

HomophilyEstimate estimate_homophily(const Graph& g, const DataSet& ds) {
  if (ds.split.size() != g.n() || ds.labels.size() != g.n()) {
    throw InvalidInput("dataset does not match the graph");
  }
  HomophilyEstimate est;
  std::size_t same = 0;
  for (const Edge& e : g.edges()) {
    if (ds.split[e.u] != Split::train || ds.split[e.v] != Split::train) continue;
    ++est.edges_used;
    same += ds.labels[e.u] == ds.labels[e.v];
  }
  if (est.edges_used == 0) {
    est.fallback = true;
    est.value = 0.5;
  } else {
    est.value = static_cast<double>(same) / static_cast<double>(est.edges_used);
  }
  return est;
}

double acs_adjacency_weight(double h, double lambda_bonus, double lambda_penalty) noexcept {
  return h >= 0.5 ? h * lambda_bonus : -(1.0 - h) * lambda_penalty;
}

CommunityResult acs(const Graph& g, const DenseMatrix& unit_hidden, NodeId q,
                    const SearchConfig& config, double h_est) {
  check_query(unit_hidden, q);
  if (g.n() != unit_hidden.rows()) throw InvalidInput("embedding rows do not match the graph");
  const auto start = Clock::now();
  const std::size_t n = g.n();
  CommunityResult res;
  res.query = q;
  res.algorithm = "acs";
  res.members.push_back(q);
  res.scores.push_back(1.0);

  const std::vector<double> sim = similarities(unit_hidden, q);
  const std::size_t others = n - 1;
  const std::size_t k = std::min(config.community_size, others);
  const auto pool_size = std::min<std::size_t>(
      others, static_cast<std::size_t>(std::ceil(config.alpha_top * static_cast<double>(k))));
  std::vector<NodeId> pool;
  pool.reserve(others);
  for (NodeId u = 0; u < n; ++u) {
    if (u != q) pool.push_back(u);
  }
  auto by_sim = [&](NodeId a, NodeId b) { return sim[a] != sim[b] ? sim[a] > sim[b] : a < b; };
  std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(pool_size), pool.end(), by_sim);
  pool.resize(pool_size);

  const double w = acs_adjacency_weight(h_est, config.lambda_bonus, config.lambda_penalty);
  const double tw = config.tau_weight;
  auto nq = g.neighbors(q);
  std::vector<std::pair<double, NodeId>> scored;
  scored.reserve(pool.size());
  for (NodeId u : pool) {
    const double a = std::binary_search(nq.begin(), nq.end(), u) ? 1.0 : 0.0;
    scored.emplace_back(tw * sim[u] + (1.0 - tw) * a * w, u);
  }
  std::sort(scored.begin(), scored.end(), [&](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first > y.first;
    return by_sim(x.second, y.second);
  });
  for (std::size_t i = 0; i < k && i < scored.size(); ++i) {
    res.members.push_back(scored[i].second);
    res.scores.push_back(scored[i].first);
  }
  res.elapsed_s = std::chrono::duration<double>(Clock::now() - start).count();
  return res;
}

CommunitySearcher::CommunitySearcher(const Graph& g, const DenseMatrix& unit_hidden,
                                     const SearchConfig& config, double h_est)
    : graph_(&g), unit_(&unit_hidden), config_(config), h_est_(h_est) {
  config_.validate();
  tau_sign_ = config_.tau_quantile ? quantile_tau(g, unit_hidden, *config_.tau_quantile)
                                   : config_.tau_sign;
  positive_ = build_positive_graph(g, unit_hidden, tau_sign_);
}

CommunityResult CommunitySearcher::scs(NodeId q) const {
  return scs_on_positive(positive_, *unit_, q, config_.community_size);
}

CommunityResult CommunitySearcher::acs(NodeId q) const {
  return adaptcs::acs(*graph_, *unit_, q, config_, h_est_);
}

}  // namespace adaptcs
