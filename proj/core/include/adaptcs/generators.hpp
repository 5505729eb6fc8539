#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "adaptcs/dataset.hpp"
#include "adaptcs/graph.hpp"

namespace adaptcs {

/// G(n, p), seeded.
Graph erdos_renyi(std::size_t n, double p, std::uint64_t seed);

/// Stochastic block model; block b has block_sizes[b] consecutive node ids.
Graph stochastic_block_model(std::span<const std::size_t> block_sizes, double p_in, double p_out,
                             std::uint64_t seed);

/// Roughly m distinct uniform random edges on n nodes; O(m log m), for large ladders.
Graph random_sparse_graph(std::size_t n, std::size_t m, std::uint64_t seed);

struct PlantedOptions {
  std::size_t nodes_per_class = 20;
  int num_classes = 2;
  double p_in = 0.3;
  double p_out = 0.05;
  std::size_t feature_dim = 8;
  double feature_noise = 0.5;  // std of Gaussian noise around a class centroid
  std::uint64_t seed = 1;
};

/// SBM graph with Gaussian class-clustered features and a stratified split.
DataSet planted_partition_dataset(const PlantedOptions& options);

/// Rows drawn around one of `clusters` random unit centroids, seeded.
DenseMatrix clustered_embeddings(std::size_t n, std::size_t dim, std::size_t clusters, double noise,
                                 std::uint64_t seed);

}  // namespace adaptcs
