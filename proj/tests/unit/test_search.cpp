#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "adaptcs/errors.hpp"
#include "adaptcs/generators.hpp"
#include "adaptcs/graph.hpp"
#include "adaptcs/search.hpp"
#include "oracles.hpp"

using namespace adaptcs;

namespace {

// Unit vector in the plane whose cosine with (1, 0) is c.
std::vector<double> unit2(double c) { return {c, std::sqrt(1.0 - c * c)}; }

DenseMatrix plane_embeddings(const std::vector<double>& cosines) {
  DenseMatrix m(cosines.size(), 2);
  for (std::size_t i = 0; i < cosines.size(); ++i) {
    const auto v = unit2(cosines[i]);
    m(i, 0) = v[0];
    m(i, 1) = v[1];
  }
  return m;
}

std::set<NodeId> as_set(const std::vector<NodeId>& v) { return {v.begin(), v.end()}; }

SearchConfig with_size(std::size_t k) {
  SearchConfig c;
  c.community_size = k;
  return c;
}

DataSet labelled(Graph g, std::vector<int> labels, std::vector<Split> split) {
  DataSet ds;
  ds.graph = std::move(g);
  ds.features = DenseMatrix(labels.size(), 1, 1.0);
  ds.num_classes = *std::max_element(labels.begin(), labels.end()) + 1;
  ds.labels = std::move(labels);
  ds.split = std::move(split);
  return ds;
}

}  // namespace

TEST(PositiveGraph, ThresholdExtremes) {
  const Graph g = oracle::random_graph(25, 0.3, 2);
  const DenseMatrix unit = row_normalized(clustered_embeddings(25, 6, 3, 0.3, 9));
  const Graph all = build_positive_graph(g, unit, -1.0);
  EXPECT_EQ(all.adjacency(), g.adjacency());
  EXPECT_EQ(build_positive_graph(g, unit, 1.0 + 1e-9).m(), 0u);
}

TEST(PositiveGraph, KeepsOnlyOriginalEdges) {
  const Graph g = oracle::random_graph(30, 0.2, 5);
  const DenseMatrix unit = row_normalized(clustered_embeddings(30, 4, 2, 0.5, 1));
  const Graph pos = build_positive_graph(g, unit, 0.3);
  for (const Edge& e : pos.edges()) {
    EXPECT_TRUE(g.has_edge(e.u, e.v));
    EXPECT_GE(dot(unit.row(e.u), unit.row(e.v)), 0.3);
  }
  for (const Edge& e : g.edges()) {
    if (dot(unit.row(e.u), unit.row(e.v)) >= 0.3) EXPECT_TRUE(pos.has_edge(e.u, e.v));
  }
}

TEST(PositiveGraph, RaisesHomophilyOnPlantedToy) {
  const std::vector<std::size_t> blocks{10, 10};
  const Graph g = stochastic_block_model(blocks, 0.3, 0.3, 4);
  std::vector<int> labels(20);
  for (std::size_t i = 10; i < 20; ++i) labels[i] = 1;
  DenseMatrix emb(20, 4);
  for (std::size_t i = 0; i < 20; ++i) {
    emb(i, 0) = labels[i] == 0 ? 1.0 : 0.0;
    emb(i, 1) = labels[i] == 1 ? 1.0 : 0.0;
    emb(i, 2) = 0.4 * std::sin(1.7 * static_cast<double>(i));
    emb(i, 3) = 0.4 * std::cos(2.3 * static_cast<double>(i));
  }
  const DenseMatrix unit = row_normalized(emb);
  const Graph pos = build_positive_graph(g, unit, 0.5);
  ASSERT_GT(pos.m(), 0u);
  EXPECT_GT(edge_homophily(pos, labels), edge_homophily(g, labels));
}

TEST(Scs, ZeroSizeReturnsQueryAlone) {
  const Graph g = oracle::clique(5);
  const DenseMatrix unit = row_normalized(clustered_embeddings(5, 3, 1, 0.1, 2));
  const CommunityResult r = scs(g, unit, 2, with_size(0));
  EXPECT_EQ(r.members, std::vector<NodeId>{2});
  EXPECT_EQ(r.scores.size(), 1u);
  EXPECT_EQ(r.teleports, 0u);
  EXPECT_EQ(r.algorithm, "scs");
}

TEST(Scs, IsolatedQueryTeleportsByCosine) {
  // cosines to q = 0: node 2 and 4 tie at 0.8 (lower id first), then node 3 at 0.5
  const DenseMatrix unit = plane_embeddings({1.0, 0.1, 0.8, 0.5, 0.8, -0.3});
  const Graph g = oracle::make_graph(6, {{1, 5}});
  SearchConfig cfg = with_size(3);
  cfg.tau_sign = 0.99;
  const CommunityResult r = scs(g, unit, 0, cfg);
  EXPECT_EQ(r.members, (std::vector<NodeId>{0, 2, 4, 3}));
  EXPECT_EQ(r.teleports, 3u);
  ASSERT_EQ(r.scores.size(), 4u);
  EXPECT_NEAR(r.scores[1], 0.8, 1e-12);
  EXPECT_NEAR(r.scores[3], 0.5, 1e-12);
}

TEST(Scs, CliqueNeedsNoTeleport) {
  // nodes 0..4 form a clique of identical embeddings; 5..7 are attached elsewhere
  Graph g = oracle::make_graph(8, {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {1, 2}, {1, 3}, {1, 4},
                                   {2, 3}, {2, 4}, {3, 4}, {5, 6}, {6, 7}, {7, 4}});
  DenseMatrix emb(8, 2);
  for (std::size_t i = 0; i < 5; ++i) emb(i, 0) = 1.0;
  for (std::size_t i = 5; i < 8; ++i) emb(i, 1) = 1.0;
  const CommunityResult r = scs(g, emb, 1, with_size(3));
  EXPECT_EQ(r.teleports, 0u);
  ASSERT_EQ(r.members.size(), 4u);
  for (NodeId v : r.members) EXPECT_LT(v, 5u);
}

TEST(Scs, ExhaustsSmallGraph) {
  const Graph g = oracle::path(4);
  const DenseMatrix unit = row_normalized(clustered_embeddings(4, 3, 2, 0.2, 3));
  const CommunityResult r = scs(g, unit, 0, with_size(50));
  EXPECT_EQ(as_set(r.members), (std::set<NodeId>{0, 1, 2, 3}));
}

TEST(Scs, NonTeleportMembersConnectThroughEarlierMembers) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Graph g = oracle::random_graph(60, 0.06, seed);
    const DenseMatrix unit = row_normalized(clustered_embeddings(60, 5, 3, 0.4, seed + 100));
    SearchConfig cfg = with_size(25);
    cfg.tau_sign = 0.6;
    const Graph pos = build_positive_graph(g, unit, cfg.tau_sign);
    const NodeId q = static_cast<NodeId>(seed % 60);
    const CommunityResult r = scs_on_positive(pos, unit, q, cfg.community_size);
    ASSERT_EQ(r.members.size(), 26u);
    ASSERT_EQ(r.members.front(), q);
    std::size_t entries = 0;
    for (std::size_t i = 1; i < r.members.size(); ++i) {
      bool linked = false;
      for (std::size_t j = 0; j < i && !linked; ++j) linked = pos.has_edge(r.members[i], r.members[j]);
      entries += !linked;
    }
    EXPECT_EQ(entries, r.teleports) << "seed " << seed;
    EXPECT_EQ(as_set(r.members).size(), r.members.size());
  }
}

TEST(Scs, OutOfRangeQuery) {
  const Graph g = oracle::path(3);
  const DenseMatrix unit = row_normalized(clustered_embeddings(3, 2, 1, 0.1, 1));
  EXPECT_THROW(scs(g, unit, 3, with_size(1)), InvalidInput);
}

TEST(Homophily, TrainTrainEdgesOnly) {
  const Graph g = oracle::make_graph(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}});
  // train = {0, 1, 2, 4}: edges (0,1) and (1,2) count, both homophilic
  const DataSet ds = labelled(g, {0, 0, 0, 1, 0},
                              {Split::train, Split::train, Split::train, Split::test, Split::train});
  const HomophilyEstimate est = estimate_homophily(ds.graph, ds);
  EXPECT_DOUBLE_EQ(est.value, 1.0);
  EXPECT_EQ(est.edges_used, 2u);
  EXPECT_FALSE(est.fallback);
}

TEST(Homophily, FallsBackWithoutTrainTrainEdges) {
  const Graph g = oracle::path(4);
  const DataSet ds = labelled(g, {0, 1, 0, 1}, {Split::train, Split::test, Split::train, Split::val});
  const HomophilyEstimate est = estimate_homophily(ds.graph, ds);
  EXPECT_TRUE(est.fallback);
  EXPECT_DOUBLE_EQ(est.value, 0.5);
  EXPECT_EQ(est.edges_used, 0u);
}

TEST(Homophily, MatchesBruteForce) {
  PlantedOptions opt;
  opt.nodes_per_class = 30;
  opt.num_classes = 3;
  opt.p_in = 0.1;
  opt.p_out = 0.15;
  const DataSet ds = planted_partition_dataset(opt);
  std::size_t used = 0;
  std::size_t same = 0;
  const std::size_t n = ds.graph.n();
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      if (!ds.graph.has_edge(u, v) || ds.split[u] != Split::train || ds.split[v] != Split::train) continue;
      ++used;
      same += ds.labels[u] == ds.labels[v];
    }
  }
  ASSERT_GT(used, 0u);
  const HomophilyEstimate est = estimate_homophily(ds.graph, ds);
  EXPECT_EQ(est.edges_used, used);
  EXPECT_DOUBLE_EQ(est.value, static_cast<double>(same) / static_cast<double>(used));
}

TEST(Acs, AdjacencyWeightBranches) {
  EXPECT_DOUBLE_EQ(acs_adjacency_weight(0.5, 1.0, 1.0), 0.5);
  EXPECT_DOUBLE_EQ(acs_adjacency_weight(0.8, 2.0, 1.0), 1.6);
  EXPECT_DOUBLE_EQ(acs_adjacency_weight(0.2, 1.0, 1.0), -0.8);
  EXPECT_DOUBLE_EQ(acs_adjacency_weight(0.2, 1.0, 0.5), -0.4);
}

TEST(Acs, PenaltyDemotesHeterophilicNeighbour) {
  // q = 0; node 1 is a neighbour with cosine 0.9, node 2 a non-neighbour with cosine 0.2
  const DenseMatrix unit = plane_embeddings({1.0, 0.9, 0.2, -0.5, -0.6, -0.7});
  const Graph g = oracle::make_graph(6, {{0, 1}, {3, 4}, {4, 5}});
  SearchConfig cfg = with_size(1);
  cfg.tau_weight = 0.5;
  cfg.lambda_penalty = 1.0;
  const CommunityResult r = acs(g, unit, 0, cfg, 0.2);
  ASSERT_EQ(r.members.size(), 2u);
  EXPECT_EQ(r.members[1], 2u);
  EXPECT_NEAR(r.scores[1], 0.10, 1e-12);

  SearchConfig two = cfg;
  two.community_size = 2;
  const CommunityResult both = acs(g, unit, 0, two, 0.2);
  ASSERT_EQ(both.members.size(), 3u);
  EXPECT_EQ(both.members[2], 1u);
  EXPECT_NEAR(both.scores[2], 0.05, 1e-12);
}

TEST(Acs, BoundaryHomophilyTakesBonusBranch) {
  // neighbour 2 has lower cosine than non-neighbour 1; the bonus lifts it
  const DenseMatrix unit = plane_embeddings({1.0, 0.6, 0.5, 0.1, 0.0});
  const Graph g = oracle::make_graph(5, {{0, 2}});
  SearchConfig cfg = with_size(1);
  cfg.tau_weight = 0.5;
  const CommunityResult r = acs(g, unit, 0, cfg, 0.5);
  EXPECT_EQ(r.members, (std::vector<NodeId>{0, 2}));
  EXPECT_NEAR(r.scores[1], 0.5 * 0.5 + 0.5 * 0.5, 1e-12);
}

TEST(Acs, PureSimilarityAtUnitWeight) {
  const Graph g = oracle::random_graph(80, 0.1, 3);
  const DenseMatrix unit = row_normalized(clustered_embeddings(80, 6, 4, 0.3, 8));
  SearchConfig cfg = with_size(12);
  cfg.tau_weight = 1.0;
  for (NodeId q = 0; q < 80; q += 7) {
    std::vector<NodeId> order;
    for (NodeId u = 0; u < 80; ++u) {
      if (u != q) order.push_back(u);
    }
    std::stable_sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
      return dot(unit.row(q), unit.row(a)) > dot(unit.row(q), unit.row(b));
    });
    order.resize(12);
    const CommunityResult r = acs(g, unit, q, cfg, 0.1);
    EXPECT_EQ(std::vector<NodeId>(r.members.begin() + 1, r.members.end()), order);
  }
}

TEST(Acs, ScoresSortedAndMonotoneTransformKeepsOrder) {
  const Graph g = oracle::random_graph(50, 0.15, 6);
  const DenseMatrix unit = row_normalized(clustered_embeddings(50, 4, 3, 0.5, 2));
  SearchConfig cfg = with_size(15);
  cfg.tau_weight = 0.7;
  const CommunityResult r = acs(g, unit, 4, cfg, 0.3);
  ASSERT_EQ(r.members.size(), 16u);
  std::vector<std::size_t> idx(15);
  std::iota(idx.begin(), idx.end(), 1);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return std::exp(3.0 * r.scores[a]) + 1.0 > std::exp(3.0 * r.scores[b]) + 1.0;
  });
  for (std::size_t i = 0; i < idx.size(); ++i) EXPECT_EQ(idx[i], i + 1);
  EXPECT_TRUE(std::is_sorted(r.scores.begin() + 1, r.scores.end(), std::greater<>()));
}

TEST(Acs, MembersComeFromSimilarityPool) {
  const Graph g = oracle::random_graph(60, 0.2, 7);
  const DenseMatrix unit = row_normalized(clustered_embeddings(60, 4, 3, 0.6, 5));
  SearchConfig cfg = with_size(10);
  cfg.tau_weight = 0.2;
  cfg.alpha_top = 1.5;
  const NodeId q = 9;
  std::vector<NodeId> order;
  for (NodeId u = 0; u < 60; ++u) {
    if (u != q) order.push_back(u);
  }
  std::stable_sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
    return dot(unit.row(q), unit.row(a)) > dot(unit.row(q), unit.row(b));
  });
  const std::set<NodeId> pool(order.begin(), order.begin() + 15);
  const CommunityResult r = acs(g, unit, q, cfg, 0.9);
  for (std::size_t i = 1; i < r.members.size(); ++i) EXPECT_TRUE(pool.count(r.members[i]));
}

TEST(Acs, BonusSweepAddsNeighbours) {
  const Graph g = oracle::random_graph(70, 0.12, 10);
  const DenseMatrix unit = row_normalized(clustered_embeddings(70, 4, 3, 0.5, 11));
  std::size_t previous = 0;
  for (double lambda : {0.0, 0.25, 0.5, 1.0, 2.0, 4.0}) {
    SearchConfig cfg = with_size(10);
    cfg.tau_weight = 0.5;
    cfg.lambda_bonus = lambda;
    const CommunityResult r = acs(g, unit, 3, cfg, 0.8);
    std::size_t adjacent = 0;
    for (std::size_t i = 1; i < r.members.size(); ++i) adjacent += g.has_edge(3, r.members[i]);
    EXPECT_GE(adjacent, previous) << "lambda " << lambda;
    previous = adjacent;
  }
}

TEST(Acs, SizeClampsToAvailableNodes) {
  const Graph g = oracle::path(4);
  const DenseMatrix unit = row_normalized(clustered_embeddings(4, 2, 1, 0.2, 1));
  const CommunityResult r = acs(g, unit, 1, with_size(10), 0.5);
  EXPECT_EQ(as_set(r.members), (std::set<NodeId>{0, 1, 2, 3}));
  EXPECT_EQ(r.algorithm, "acs");
}

TEST(SearchConfig, Validation) {
  SearchConfig c;
  c.tau_weight = 1.5;
  EXPECT_THROW(c.validate(), InvalidInput);
  c = {};
  c.alpha_top = 0.5;
  EXPECT_THROW(c.validate(), InvalidInput);
  c = {};
  c.lambda_bonus = -1.0;
  EXPECT_THROW(c.validate(), InvalidInput);
  c = {};
  c.tau_quantile = 2.0;
  EXPECT_THROW(c.validate(), InvalidInput);
}

TEST(QuantileTau, MatchesSortedCosines) {
  const Graph g = oracle::random_graph(30, 0.2, 12);
  const DenseMatrix unit = row_normalized(clustered_embeddings(30, 3, 2, 0.5, 13));
  std::vector<double> cos;
  for (const Edge& e : g.edges()) cos.push_back(dot(unit.row(e.u), unit.row(e.v)));
  std::sort(cos.begin(), cos.end());
  EXPECT_DOUBLE_EQ(quantile_tau(g, unit, 0.0), cos.front());
  EXPECT_DOUBLE_EQ(quantile_tau(g, unit, 1.0), cos.back());
  const double pos = 0.5 * static_cast<double>(cos.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  EXPECT_NEAR(quantile_tau(g, unit, 0.5), cos[lo] + (pos - lo) * (cos[lo + 1] - cos[lo]), 1e-15);
  EXPECT_THROW(quantile_tau(oracle::make_graph(3, {}), row_normalized(clustered_embeddings(3, 2, 1, 0.1, 1)), 0.5),
               UndefinedMetric);
}

TEST(Searcher, MatchesFreeFunctionsAndIsDeterministic) {
  const Graph g = oracle::random_graph(90, 0.08, 14);
  const DenseMatrix unit = row_normalized(clustered_embeddings(90, 8, 3, 0.4, 15));
  SearchConfig cfg = with_size(20);
  cfg.tau_quantile = 0.4;
  const CommunitySearcher s(g, unit, cfg, 0.35);
  EXPECT_DOUBLE_EQ(s.tau_sign(), quantile_tau(g, unit, 0.4));
  for (NodeId q : {0u, 17u, 89u}) {
    EXPECT_EQ(s.scs(q).members, scs(g, unit, q, cfg).members);
    EXPECT_EQ(s.acs(q).members, acs(g, unit, q, cfg, 0.35).members);
    EXPECT_EQ(s.acs(q).scores, s.acs(q).scores);
    EXPECT_EQ(s.scs(q).teleports, s.scs(q).teleports);
  }
}
