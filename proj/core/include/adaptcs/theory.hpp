#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adaptcs/dataset.hpp"
#include "adaptcs/dense_matrix.hpp"
#include "adaptcs/graph.hpp"
#include "adaptcs/hop_channels.hpp"

namespace adaptcs {

struct TheoryCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct TheoryReport {
  std::vector<TheoryCheck> checks;
  std::size_t violations() const noexcept;
  std::string to_json() const;
};

/// L X X^T L^T with L = D - A and X the one-hot label matrix.
DenseMatrix laplacian_similarity(const Graph& g, std::span<const int> labels, int num_classes);

struct ToyGraph {
  Graph graph;
  std::vector<int> labels;
  int num_classes = 0;
};

/// Complete bipartite graph between two classes of `per_class` nodes.
ToyGraph binary_flip_toy(std::size_t per_class = 3);
/// Classes 0..c-1 on a cycle; every node links to all nodes of the adjacent classes.
ToyGraph cycle_flip_toy(int num_classes = 4, std::size_t per_class = 3);

/// DataSet view of a toy: one-hot label features and a seeded split.
DataSet toy_dataset(const ToyGraph& toy, std::uint64_t seed);

struct FlipSummary {
  double max_inter = 0.0;  // largest cross-class similarity
  double min_intra = 0.0;  // smallest same-class similarity
  std::size_t positive_inter = 0;
};

FlipSummary summarize_flip(const DenseMatrix& similarity, std::span<const int> labels);

/// Runs both toys, optionally writing their similarity matrices as CSV into csv_dir,
/// and trains the encoder on the cycle toy to measure HND.
std::vector<TheoryCheck> flip_effect_demo(const std::optional<std::filesystem::path>& csv_dir = {},
                                          std::uint64_t seed = 7);

/// Hop-separation instance: prototypes are scaled one-hots, hop 2 aligns with the
/// true prototype by a margin, hop 1 does not. Checks that a 10x hop temperature
/// raises every node's hop-2 weight and that the fused embeddings reach HND = 1.
TheoryCheck hop_separation_check();

/// Triangle-support audit of one graph as a check.
TheoryCheck triangle_audit_check(const std::string& name, const Graph& g,
                                 bool require_support_shift);

}  // namespace adaptcs
