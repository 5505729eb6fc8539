#include <gtest/gtest.h>

#include <random>

#include "adaptcs/errors.hpp"
#include "adaptcs/metrics.hpp"
#include "oracles.hpp"

using namespace adaptcs;

namespace {

DenseMatrix one_hot(const std::vector<int>& labels, int c, double sign = 1.0) {
  DenseMatrix m(labels.size(), static_cast<std::size_t>(c));
  for (std::size_t i = 0; i < labels.size(); ++i) m(i, static_cast<std::size_t>(labels[i])) = sign;
  return m;
}

}  // namespace

TEST(F1, HandArithmetic) {
  std::vector<NodeId> truth(10);
  for (NodeId i = 0; i < 10; ++i) truth[i] = i;
  const std::vector<NodeId> pred{0, 1, 2, 3, 42};
  const F1Score s = f1_score(pred, truth);
  EXPECT_DOUBLE_EQ(s.precision, 0.8);
  EXPECT_DOUBLE_EQ(s.recall, 0.4);
  EXPECT_NEAR(s.f1, 8.0 / 15.0, 1e-15);
}

TEST(F1, PerfectAndDisjoint) {
  const std::vector<NodeId> a{3, 1, 2};
  const std::vector<NodeId> b{1, 2, 3};
  EXPECT_DOUBLE_EQ(f1_score(a, b).f1, 1.0);
  const std::vector<NodeId> c{7, 8};
  EXPECT_DOUBLE_EQ(f1_score(c, b).f1, 0.0);
}

TEST(F1, DuplicatesCountOnce) {
  const std::vector<NodeId> pred{1, 1, 2};
  const std::vector<NodeId> truth{1, 2, 3, 4};
  const F1Score s = f1_score(pred, truth);
  EXPECT_DOUBLE_EQ(s.precision, 1.0);
  EXPECT_DOUBLE_EQ(s.recall, 0.5);
}

TEST(F1, Errors) {
  const std::vector<NodeId> some{1};
  EXPECT_THROW(f1_score({}, some), InvalidInput);
  EXPECT_THROW(f1_score(some, {}), UndefinedMetric);
  const std::vector<int> labels{0, 1};
  EXPECT_THROW(community_f1(some, labels, 2), InvalidInput);
}

TEST(F1, CommunityTruthIsQueryClass) {
  const std::vector<int> labels{0, 1, 0, 0, 1};
  const std::vector<NodeId> members{0, 2, 1};
  const F1Score s = community_f1(members, labels, 0);
  EXPECT_DOUBLE_EQ(s.precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.recall, 2.0 / 3.0);
}

TEST(Hnd, OneHotLabelsGiveOne) {
  const std::vector<int> labels{0, 1, 2, 0, 1, 2, 2};
  EXPECT_DOUBLE_EQ(hnd_metric(one_hot(labels, 3), labels), 1.0);
}

TEST(Hnd, GlobalSignFlipIsInvisibleToCosine) {
  const std::vector<int> labels{0, 0, 1, 1};
  EXPECT_DOUBLE_EQ(hnd_metric(one_hot(labels, 2, -1.0), labels), 1.0);
  EXPECT_DOUBLE_EQ(oracle::hnd(one_hot(labels, 2, -1.0), labels), 1.0);
}

TEST(Hnd, CrossedEmbeddingsGiveZero) {
  // each node points the same way as one node of the other class
  const std::vector<int> labels{0, 0, 1, 1};
  const DenseMatrix emb{{1, 0}, {0, 1}, {1, 0}, {0, 1}};
  EXPECT_DOUBLE_EQ(hnd_metric(emb, labels), 0.0);
  EXPECT_DOUBLE_EQ(oracle::hnd(emb, labels), 0.0);
}

TEST(Hnd, MatchesBruteForceOnRandomEmbeddings) {
  std::mt19937_64 rng(17);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    std::vector<int> labels(200);
    for (auto& l : labels) l = static_cast<int>(rng() % 4);
    const DenseMatrix emb = oracle::random_dense(200, 6, seed);
    EXPECT_NEAR(hnd_metric(emb, labels), oracle::hnd(emb, labels), 1e-12);
  }
}

TEST(Hnd, SingletonClassesAreSkipped) {
  const std::vector<int> labels{0, 0, 1};
  const DenseMatrix emb{{1, 0}, {1, 0.1}, {0, 1}};
  EXPECT_DOUBLE_EQ(hnd_metric(emb, labels), 1.0);
}

TEST(Hnd, Errors) {
  const std::vector<int> one_class{0, 0, 0};
  EXPECT_THROW(hnd_metric(DenseMatrix(3, 2, 1.0), one_class), UndefinedMetric);
  const std::vector<int> short_labels{0, 1};
  EXPECT_THROW(hnd_metric(DenseMatrix(3, 2, 1.0), short_labels), InvalidInput);
  const std::vector<int> singletons{0, 1};
  EXPECT_THROW(hnd_metric(DenseMatrix{{1, 0}, {0, 1}}, singletons), UndefinedMetric);
}

TEST(Percentile, InterpolatesAndIsMonotone) {
  const std::vector<double> v{4, 1, 3, 2};
  EXPECT_DOUBLE_EQ(percentile(v, 0), 1.0);
  EXPECT_DOUBLE_EQ(percentile(v, 100), 4.0);
  EXPECT_DOUBLE_EQ(percentile(v, 50), 2.5);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> sample(101);
  for (auto& x : sample) x = u(rng);
  double last = -1.0;
  for (double p = 0; p <= 100; p += 2.5) {
    const double q = percentile(sample, p);
    EXPECT_GE(q, last);
    last = q;
  }
  EXPECT_THROW(percentile({}, 50), UndefinedMetric);
}

TEST(Summary, ConsistentFields) {
  const std::vector<double> v{0.3, 0.1, 0.9, 0.5, 0.2, 0.7};
  const Summary s = summarize(v);
  EXPECT_NEAR(s.mean, 2.7 / 6.0, 1e-15);
  double var = 0;
  for (double x : v) var += (x - s.mean) * (x - s.mean);
  EXPECT_NEAR(s.stddev, std::sqrt(var / 6.0), 1e-15);
  EXPECT_LE(s.p50, s.p95);
  EXPECT_LE(s.p95, s.max);
  EXPECT_DOUBLE_EQ(s.max, 0.9);
  EXPECT_DOUBLE_EQ(summarize({}).mean, 0.0);
}
