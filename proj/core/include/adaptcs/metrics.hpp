#pragma once

#include <span>
#include <vector>

#include "adaptcs/dense_matrix.hpp"
#include "adaptcs/graph.hpp"

namespace adaptcs {

struct F1Score {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Set F1. Throws InvalidInput on an empty prediction, UndefinedMetric on empty truth.
F1Score f1_score(std::span<const NodeId> predicted, std::span<const NodeId> truth);

/// F1 of a community against every node sharing the query's label.
F1Score community_f1(std::span<const NodeId> members, std::span<const int> labels, NodeId query);

/// Fraction of nodes whose mean cosine to same-class nodes is at least their mean
/// cosine to other-class nodes. Nodes alone in their class are skipped. Throws
/// UndefinedMetric with fewer than two classes.
double hnd_metric(const DenseMatrix& embeddings, std::span<const int> labels);

/// Linear-interpolated percentile, p in [0, 100].
double percentile(std::vector<double> values, double p);

struct Summary {
  double mean = 0.0;
  double stddev = 0.0;  // population
  double p50 = 0.0;
  double p95 = 0.0;
  double max = 0.0;
};

Summary summarize(std::span<const double> values);

}  // namespace adaptcs
