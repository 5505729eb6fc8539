#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>

#include "adaptcs/baselines.hpp"
#include "adaptcs/dataset.hpp"
#include "adaptcs/errors.hpp"
#include "adaptcs/generators.hpp"
#include "adaptcs/graph.hpp"
#include "adaptcs/metrics.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"

using namespace adaptcs;
using testing_support::TempDir;

namespace {

const std::string kTriangleFeatures = "1,0\n0,1\n1,1\n";
const std::string kTriangleLabels = "node_id,label\n0,0\n1,1\n2,0\n";

std::set<NodeId> as_set(const std::vector<NodeId>& v) { return {v.begin(), v.end()}; }

}  // namespace

TEST(Graph, InvariantsAndDegrees) {
  const Graph g = oracle::random_graph(30, 0.2, 4);
  EXPECT_EQ(g.adjacency().transpose(), g.adjacency());
  for (NodeId u = 0; u < g.n(); ++u) {
    EXPECT_FALSE(g.has_edge(u, u));
    EXPECT_EQ(g.degree(u), g.adjacency().row_nnz(u));
  }
  EXPECT_THROW(oracle::make_graph(3, {{0, 0}}), InvalidInput);
  EXPECT_THROW(oracle::make_graph(3, {{0, 3}}), InvalidInput);
}

TEST(LoadDataset, TriangleFiles) {
  TempDir dir;
  const auto g = dir.write("graph.tsv", "# triangle\n0\t1\n1\t2\n2\t0\n");
  const auto f = dir.write("features.csv", kTriangleFeatures);
  const auto l = dir.write("labels.csv", kTriangleLabels);
  const DataSet ds = load_dataset(g, f, l, 1);
  EXPECT_EQ(ds.graph.n(), 3u);
  EXPECT_EQ(ds.graph.m(), 3u);
  EXPECT_EQ(ds.num_classes, 2);
  EXPECT_EQ(ds.features.cols(), 2u);
}

TEST(LoadDataset, DuplicateDirectionsCollapse) {
  TempDir dir;
  const auto g = dir.write("graph.tsv", "0 1\n1 0\n1\t2\n");
  const DataSet ds = load_dataset(g, dir.write("f.csv", kTriangleFeatures), dir.write("l.csv", kTriangleLabels), 1);
  EXPECT_EQ(ds.graph.m(), 2u);
}

TEST(LoadDataset, SelfLoopsCountedAndDropped) {
  TempDir dir;
  const auto g = dir.write("graph.tsv", "0\t0\n0\t1\n");
  const DataSet ds = load_dataset(g, dir.write("f.csv", kTriangleFeatures), dir.write("l.csv", kTriangleLabels), 1);
  EXPECT_EQ(ds.dropped_self_loops, 1u);
  EXPECT_EQ(ds.graph.m(), 1u);
}

TEST(LoadDataset, MalformedLineReportsLineNumber) {
  TempDir dir;
  const auto g = dir.write("graph.tsv", "0\t1\n# c\n1\tx\n");
  try {
    load_dataset(g, dir.write("f.csv", kTriangleFeatures), dir.write("l.csv", kTriangleLabels), 1);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(LoadDataset, RejectsNonFiniteFeatures) {
  TempDir dir;
  const auto g = dir.write("graph.tsv", "0\t1\n");
  EXPECT_THROW(load_dataset(g, dir.write("f.csv", "1,0\nnan,1\n1,1\n"), dir.write("l.csv", kTriangleLabels), 1),
               ParseError);
  EXPECT_THROW(load_dataset(g, dir.write("f2.csv", "1,0\ninf,1\n1,1\n"), dir.write("l.csv", kTriangleLabels), 1),
               ParseError);
}

TEST(LoadDataset, ValidationErrors) {
  TempDir dir;
  const auto g = dir.write("graph.tsv", "0\t1\n1\t2\n");
  const auto f = dir.write("f.csv", kTriangleFeatures);
  // Negative label.
  EXPECT_THROW(load_dataset(g, f, dir.write("neg.csv", "0,0\n1,-1\n2,0\n"), 1), ValidationError);
  // Label 3 leaves classes 1 and 2 empty: out of range for a dense label space.
  EXPECT_THROW(load_dataset(g, f, dir.write("gap.csv", "0,0\n1,3\n2,0\n"), 1), ValidationError);
  // Feature rows != n.
  EXPECT_THROW(load_dataset(g, dir.write("short.csv", "1,0\n0,1\n"), dir.write("l.csv", kTriangleLabels), 1),
               ValidationError);
  // Missing label.
  EXPECT_THROW(load_dataset(g, f, dir.write("miss.csv", "0,0\n1,1\n"), 1), ValidationError);
  EXPECT_THROW(load_dataset(dir.path() / "nope.tsv", f, f, 1), ValidationError);
}

TEST(LoadDataset, GeomGcnAndLinqsLayouts) {
  TempDir dir;
  dir.write("geom/out1_graph_edges.txt", "node_id\tnode_id\n0\t1\n1\t2\n");
  dir.write("geom/out1_node_feature_label.txt", "node_id\tfeature\tlabel\n0\t1,0\t0\n1\t0,1\t1\n2\t1,1\t0\n");
  const DataSet a = load_dataset_dir(dir.path() / "geom", 3);
  EXPECT_EQ(a.graph.n(), 3u);
  EXPECT_EQ(a.graph.m(), 2u);
  EXPECT_EQ(a.num_classes, 2);

  dir.write("linqs/toy.content", "p1 1 0 A\np2 0 1 B\np3 1 1 A\n");
  dir.write("linqs/toy.cites", "p1 p2\np2 p3\np3 missing\n");
  const DataSet b = load_dataset_dir(dir.path() / "linqs", 3);
  EXPECT_EQ(b.graph.n(), 3u);
  EXPECT_EQ(b.graph.m(), 2u);
  EXPECT_EQ(b.num_classes, 2);

  EXPECT_THROW(load_dataset_dir(dir.path(), 3), ValidationError);
}

TEST(LoadDataset, NativeRoundTrip) {
  PlantedOptions po;
  const DataSet ds = planted_partition_dataset(po);
  TempDir dir;
  write_native_dataset(ds, dir.path() / "native");
  const DataSet back = load_dataset_dir(dir.path() / "native", po.seed);
  EXPECT_EQ(back.hash(), ds.hash());
  EXPECT_EQ(back.split, ds.split);
}

TEST(Split, StratifiedSixtyTwentyTwenty) {
  std::vector<int> labels;
  for (int c = 0; c < 5; ++c)
    for (int i = 0; i < 17 + 9 * c; ++i) labels.push_back(c);
  const auto split = stratified_split(labels, 5, 9);
  for (int c = 0; c < 5; ++c) {
    std::map<Split, int> count;
    int total = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] != c) continue;
      ++count[split[i]];
      ++total;
    }
    EXPECT_LE(std::abs(count[Split::train] - 0.6 * total), 1.0);
    EXPECT_LE(std::abs(count[Split::val] - 0.2 * total), 1.0);
    EXPECT_LE(std::abs(count[Split::test] - 0.2 * total), 1.0);
    EXPECT_GE(count[Split::train], 1);
  }
  EXPECT_EQ(split, stratified_split(labels, 5, 9));
  EXPECT_NE(split, stratified_split(labels, 5, 10));
}

TEST(Split, TinyClassStillTrains) {
  const std::vector<int> labels = {0, 1, 1, 1};
  const auto split = stratified_split(labels, 2, 1);
  EXPECT_EQ(split[0], Split::train);
}

TEST(EdgeHomophily, Examples) {
  const Graph tri = oracle::clique(3);
  EXPECT_DOUBLE_EQ(edge_homophily(tri, std::vector<int>{2, 2, 2}), 1.0);
  const Graph bip = oracle::make_graph(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
  EXPECT_DOUBLE_EQ(edge_homophily(bip, std::vector<int>{0, 1, 0, 1}), 0.0);
  EXPECT_DOUBLE_EQ(edge_homophily(oracle::path(3), std::vector<int>{0, 0, 1}), 0.5);
  EXPECT_THROW(edge_homophily(Graph::from_edges(3, {}), std::vector<int>{0, 1, 0}), UndefinedMetric);
}

TEST(EdgeHomophily, PermutationInvariantUnderRelabeling) {
  const Graph g = oracle::random_graph(40, 0.15, 2);
  std::vector<int> labels(40);
  for (std::size_t i = 0; i < 40; ++i) labels[i] = static_cast<int>((i * 7) % 4);
  std::vector<int> relabeled(40);
  const int perm[4] = {2, 0, 3, 1};
  for (std::size_t i = 0; i < 40; ++i) relabeled[i] = perm[labels[i]];
  EXPECT_DOUBLE_EQ(edge_homophily(g, labels), edge_homophily(g, relabeled));
}

TEST(KCore, Examples) {
  EXPECT_EQ(as_set(k_core_community(oracle::clique(3), 0, 3).members), (std::set<NodeId>{0, 1, 2}));
  const CommunityResult star = k_core_community(oracle::star(4), 0, 2);
  EXPECT_EQ(star.members, (std::vector<NodeId>{0, 1}));
  // clique(4) plus a pendant 4 attached to node 0.
  const Graph g = oracle::make_graph(5, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}, {0, 4}});
  EXPECT_EQ(as_set(k_core_community(g, 1, 4).members), (std::set<NodeId>{0, 1, 2, 3}));
  // Isolated query.
  const CommunityResult iso = k_core_community(oracle::make_graph(3, {{1, 2}}), 0, 3);
  EXPECT_EQ(iso.members, (std::vector<NodeId>{0}));
}

TEST(KCore, PadsFromLowerCoreNearestFirst) {
  const Graph g = oracle::make_graph(6, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}, {0, 4}, {4, 5}});
  const CommunityResult r = k_core_community(g, 1, 5);
  EXPECT_EQ(r.members.front(), 1u);
  EXPECT_EQ(as_set(r.members), (std::set<NodeId>{0, 1, 2, 3, 4}));
}

TEST(KCore, MatchesPeelingOracle) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const Graph g = oracle::random_graph(5 + seed % 26, 0.05 + 0.02 * static_cast<double>(seed % 15), seed);
    EXPECT_EQ(core_numbers(g), oracle::core_numbers(g)) << "seed " << seed;
  }
}

TEST(KTruss, Examples) {
  EXPECT_EQ(as_set(k_truss_community(oracle::clique(4), 2, 4).members), (std::set<NodeId>{0, 1, 2, 3}));
  // Tree: every edge has truss 2; returns the BFS-nearest nodes.
  const Graph tree = oracle::make_graph(7, {{0, 1}, {0, 2}, {1, 3}, {1, 4}, {2, 5}, {2, 6}});
  EXPECT_EQ(k_truss_community(tree, 0, 3).members, (std::vector<NodeId>{0, 1, 2}));
  // Two triangles sharing node 0.
  const Graph bow = oracle::make_graph(5, {{0, 1}, {0, 2}, {1, 2}, {0, 3}, {0, 4}, {3, 4}});
  EXPECT_EQ(as_set(k_truss_community(bow, 0, 5).members), (std::set<NodeId>{0, 1, 2, 3, 4}));
}

TEST(KTruss, SupportsAndTrussMatchOracle) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Graph g = oracle::random_graph(6 + seed % 25, 0.1 + 0.02 * static_cast<double>(seed % 12), seed + 500);
    EXPECT_EQ(edge_supports(g), oracle::edge_supports(g)) << "seed " << seed;
    EXPECT_EQ(truss_numbers(g), oracle::truss_numbers(g)) << "seed " << seed;
  }
}

TEST(Baselines, SizeIsMinOfKAndReachable) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Graph g = oracle::random_graph(25, 0.08, seed + 77);
    const auto dist = oracle::hop_distances(g);
    for (NodeId q = 0; q < g.n(); q += 6) {
      std::size_t reachable = 0;
      for (std::size_t v = 0; v < g.n(); ++v) reachable += dist[q][v] >= 0;
      for (std::size_t k : {1u, 4u, 10u, 30u}) {
        const auto expect = std::min(k, reachable);
        for (const auto& r : {k_core_community(g, q, k), k_truss_community(g, q, k)}) {
          EXPECT_EQ(r.members.size(), expect);
          EXPECT_EQ(r.members.front(), q);
          EXPECT_EQ(as_set(r.members).size(), r.members.size());
          EXPECT_EQ(r.scores.size(), r.members.size());
        }
      }
    }
  }
}

TEST(LabelPropagation, NeighbourOfTrainClassDominates) {
  // q = 0 adjacent to train nodes 1, 2 of class 1; class 0 nodes elsewhere.
  DataSet ds;
  ds.graph = oracle::make_graph(6, {{0, 1}, {0, 2}, {1, 2}, {3, 4}, {4, 5}, {2, 3}});
  ds.features = DenseMatrix(6, 2, 1.0);
  ds.labels = {1, 1, 1, 0, 0, 0};
  ds.num_classes = 2;
  ds.split = {Split::test, Split::train, Split::train, Split::train, Split::train, Split::test};
  const CommunityResult r = label_propagation_community(ds, 0, 3);
  EXPECT_EQ(r.algorithm, "lp");
  EXPECT_EQ(as_set(r.members), (std::set<NodeId>{0, 1, 2}));
}

TEST(LabelPropagation, DisconnectedQueryFallsBackToCosine) {
  DataSet ds;
  ds.graph = oracle::make_graph(5, {{1, 2}, {2, 3}, {3, 4}});
  ds.features = DenseMatrix{{1, 0}, {0.9, 0.1}, {0, 1}, {1, 0.05}, {0, 1}};
  ds.labels = {0, 0, 1, 0, 1};
  ds.num_classes = 2;
  ds.split = {Split::test, Split::train, Split::train, Split::test, Split::train};
  const CommunityResult r = label_propagation_community(ds, 0, 3);
  EXPECT_EQ(r.algorithm, "lp-cosine-fallback");
  EXPECT_EQ(r.members, (std::vector<NodeId>{0, 3, 1}));
}

TEST(LabelPropagation, PlantedBlocksRecovered) {
  PlantedOptions po;
  po.nodes_per_class = 20;
  po.p_in = 0.5;
  po.p_out = 0.02;
  po.seed = 5;
  const DataSet ds = planted_partition_dataset(po);
  const LabelPropagation lp(ds);
  double total = 0;
  const auto test = ds.nodes_in(Split::test);
  for (NodeId q : test) total += community_f1(lp.community(q, 20).members, ds.labels, q).f1;
  EXPECT_GE(total / static_cast<double>(test.size()), 0.9);
}
