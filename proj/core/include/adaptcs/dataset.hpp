#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "adaptcs/dense_matrix.hpp"
#include "adaptcs/graph.hpp"

namespace adaptcs {

enum class Split : std::uint8_t { train, val, test };

struct DataSet {
  Graph graph;
  DenseMatrix features;  // n x d
  std::vector<int> labels;
  int num_classes = 0;
  std::vector<Split> split;
  std::size_t dropped_self_loops = 0;

  std::vector<NodeId> nodes_in(Split s) const;
  /// Hash of graph, features, and labels (not the split).
  std::uint64_t hash() const noexcept;
};

struct SplitFractions {
  double train = 0.6;
  double val = 0.2;
};

/// Per-class seeded shuffle, then train/val/test cut. Every nonempty class gets at
/// least one train node.
std::vector<Split> stratified_split(std::span<const int> labels, int num_classes,
                                    std::uint64_t seed, SplitFractions fractions = {});

struct RawGraph {
  std::vector<std::pair<NodeId, NodeId>> edges;
  std::size_t max_node = 0;   // one past the largest id seen
  std::size_t self_loops = 0;
};

/// `u<TAB>v` per line, '#' comments. Self-loops are counted and dropped.
RawGraph read_edge_list(const std::filesystem::path& path);
/// CSV, row i = features of node i.
DenseMatrix read_features_csv(const std::filesystem::path& path);
/// CSV `node_id,label`; an exact `node_id,label` header line is accepted.
std::vector<std::pair<NodeId, int>> read_labels_csv(const std::filesystem::path& path);

/// Validates the pieces and attaches a seeded stratified split.
DataSet assemble_dataset(const RawGraph& raw, DenseMatrix features,
                         const std::vector<std::pair<NodeId, int>>& labels, std::uint64_t seed);

DataSet load_dataset(const std::filesystem::path& graph_path,
                     const std::filesystem::path& features_path,
                     const std::filesystem::path& labels_path, std::uint64_t seed);

/// Loads a dataset directory in any supported layout:
///   native:   graph.tsv, features.csv, labels.csv
///   geom-gcn: out1_graph_edges.txt, out1_node_feature_label.txt
///   LINQS:    <name>.content, <name>.cites
DataSet load_dataset_dir(const std::filesystem::path& dir, std::uint64_t seed);

/// Writes the native three-file layout into dir.
void write_native_dataset(const DataSet& ds, const std::filesystem::path& dir);

/// Scales every feature row to unit L1 mass; zero rows stay zero.
void normalize_feature_rows(DataSet& ds);

}  // namespace adaptcs
