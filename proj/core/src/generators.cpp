#include "adaptcs/generators.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "adaptcs/errors.hpp"

namespace adaptcs {
namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

Graph erdos_renyi(std::size_t n, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      if (uniform01(rng) < p) edges.emplace_back(u, v);
    }
  }
  return Graph::from_edges(n, edges);
}

Graph stochastic_block_model(std::span<const std::size_t> block_sizes, double p_in, double p_out,
                             std::uint64_t seed) {
  std::vector<std::size_t> block;
  for (std::size_t b = 0; b < block_sizes.size(); ++b) block.insert(block.end(), block_sizes[b], b);
  const std::size_t n = block.size();
  std::mt19937_64 rng(seed);
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      if (uniform01(rng) < (block[u] == block[v] ? p_in : p_out)) edges.emplace_back(u, v);
    }
  }
  return Graph::from_edges(n, edges);
}

Graph random_sparse_graph(std::size_t n, std::size_t m, std::uint64_t seed) {
  if (n < 2) return Graph::from_edges(n, {});
  std::mt19937_64 rng(seed);
  std::vector<std::pair<NodeId, NodeId>> edges;
  edges.reserve(m);
  while (edges.size() < m) {
    const auto u = static_cast<NodeId>(rng() % n);
    const auto v = static_cast<NodeId>(rng() % n);
    if (u != v) edges.emplace_back(u, v);
  }
  return Graph::from_edges(n, edges);
}

DenseMatrix clustered_embeddings(std::size_t n, std::size_t dim, std::size_t clusters, double noise,
                                 std::uint64_t seed) {
  if (clusters == 0) throw InvalidInput("clustered_embeddings: need at least one cluster");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  DenseMatrix centroids(clusters, dim);
  for (double& v : centroids.values()) v = gauss(rng);
  centroids = row_normalized(centroids);
  DenseMatrix out(n, dim);
  for (std::size_t i = 0; i < n; ++i) {
    auto c = centroids.row(rng() % clusters);
    auto row = out.row(i);
    for (std::size_t j = 0; j < dim; ++j) row[j] = c[j] + noise * gauss(rng);
  }
  return out;
}

DataSet planted_partition_dataset(const PlantedOptions& o) {
  if (o.num_classes < 1 || o.nodes_per_class == 0) throw InvalidInput("planted partition: empty");
  const std::vector<std::size_t> sizes(static_cast<std::size_t>(o.num_classes), o.nodes_per_class);
  DataSet ds;
  ds.graph = stochastic_block_model(sizes, o.p_in, o.p_out, o.seed);
  const std::size_t n = ds.graph.n();
  ds.num_classes = o.num_classes;
  ds.labels.resize(n);
  for (std::size_t u = 0; u < n; ++u) ds.labels[u] = static_cast<int>(u / o.nodes_per_class);
  std::mt19937_64 rng(o.seed ^ 0x5eedULL);
  std::normal_distribution<double> gauss(0.0, 1.0);
  DenseMatrix centroids(static_cast<std::size_t>(o.num_classes), o.feature_dim);
  for (double& v : centroids.values()) v = gauss(rng);
  ds.features = DenseMatrix(n, o.feature_dim);
  for (std::size_t u = 0; u < n; ++u) {
    auto c = centroids.row(static_cast<std::size_t>(ds.labels[u]));
    auto row = ds.features.row(u);
    for (std::size_t j = 0; j < o.feature_dim; ++j) row[j] = c[j] + o.feature_noise * gauss(rng);
  }
  ds.split = stratified_split(ds.labels, ds.num_classes, o.seed);
  return ds;
}

}  // namespace adaptcs
