#include "adaptcs/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "adaptcs/errors.hpp"

namespace adaptcs {

F1Score f1_score(std::span<const NodeId> predicted, std::span<const NodeId> truth) {
  if (predicted.empty()) throw InvalidInput("f1: empty prediction");
  if (truth.empty()) throw UndefinedMetric("f1: empty ground truth");
  std::vector<NodeId> p(predicted.begin(), predicted.end());
  std::vector<NodeId> t(truth.begin(), truth.end());
  std::sort(p.begin(), p.end());
  p.erase(std::unique(p.begin(), p.end()), p.end());
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  std::vector<NodeId> common;
  std::set_intersection(p.begin(), p.end(), t.begin(), t.end(), std::back_inserter(common));
  F1Score s;
  s.precision = static_cast<double>(common.size()) / static_cast<double>(p.size());
  s.recall = static_cast<double>(common.size()) / static_cast<double>(t.size());
  s.f1 = common.empty() ? 0.0 : 2.0 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

F1Score community_f1(std::span<const NodeId> members, std::span<const int> labels, NodeId query) {
  if (query >= labels.size()) throw InvalidInput("f1: query out of range");
  std::vector<NodeId> truth;
  for (std::size_t u = 0; u < labels.size(); ++u) {
    if (labels[u] == labels[query]) truth.push_back(static_cast<NodeId>(u));
  }
  return f1_score(members, truth);
}

double hnd_metric(const DenseMatrix& embeddings, std::span<const int> labels) {
  const std::size_t n = embeddings.rows();
  if (labels.size() != n) throw InvalidInput("hnd: label count does not match embeddings");
  if (n == 0) throw UndefinedMetric("hnd: no nodes");
  const int c = *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<std::size_t> size(static_cast<std::size_t>(c), 0);
  for (int l : labels) {
    if (l < 0) throw InvalidInput("hnd: negative label");
    ++size[static_cast<std::size_t>(l)];
  }
  if (std::count_if(size.begin(), size.end(), [](std::size_t s) { return s > 0; }) < 2) {
    throw UndefinedMetric("hnd: needs at least two classes");
  }
  const DenseMatrix unit = row_normalized(embeddings);
  const std::size_t h = unit.cols();
  // Per-class sums of unit rows: mean cosines follow from one dot per class.
  DenseMatrix class_sum(static_cast<std::size_t>(c), h);
  std::vector<double> total(h, 0.0);
  for (std::size_t u = 0; u < n; ++u) {
    auto dst = class_sum.row(static_cast<std::size_t>(labels[u]));
    auto src = unit.row(u);
    for (std::size_t j = 0; j < h; ++j) {
      dst[j] += src[j];
      total[j] += src[j];
    }
  }
  std::size_t counted = 0;
  std::size_t holds = 0;
  for (std::size_t u = 0; u < n; ++u) {
    const auto y = static_cast<std::size_t>(labels[u]);
    if (size[y] < 2) continue;
    auto uu = unit.row(u);
    const double self = dot(uu, uu);
    const double same = dot(uu, class_sum.row(y)) - self;
    const double all = dot(uu, total) - self;
    const double intra = same / static_cast<double>(size[y] - 1);
    const double inter = (all - same) / static_cast<double>(n - size[y]);
    ++counted;
    holds += intra >= inter;
  }
  if (counted == 0) throw UndefinedMetric("hnd: every class is a singleton");
  return static_cast<double>(holds) / static_cast<double>(counted);
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw UndefinedMetric("percentile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(p, 0.0, 100.0) / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

Summary summarize(std::span<const double> values) {
  Summary s;
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double var = 0.0;
  for (double v : values) var += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(var / n);
  std::vector<double> v(values.begin(), values.end());
  s.p50 = percentile(v, 50.0);
  s.p95 = percentile(v, 95.0);
  s.max = *std::max_element(v.begin(), v.end());
  return s;
}

}  // namespace adaptcs
