#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "adaptcs/encoder.hpp"
#include "adaptcs/errors.hpp"
#include "adaptcs/metrics.hpp"
#include "oracles.hpp"
#include "gradcheck.hpp"
#include "toy.hpp"

using namespace adaptcs;
using testing_support::gradient_errors;
using testing_support::inputs_for;
using testing_support::small_config;
using testing_support::small_toy;

namespace {

std::vector<char> all_nodes(std::size_t n) { return std::vector<char>(n, 1); }

struct GradCase {
  FusionMode fusion;
  Weighting weighting;
  MaskMode mask;
  std::size_t rank;
  bool dropout;
};

class GradientCheck : public ::testing::TestWithParam<GradCase> {};

}  // namespace

TEST(NllLoss, Examples) {
  const DenseMatrix uniform(3, 4, 0.7);
  const std::vector<int> labels = {0, 1, 3};
  EXPECT_NEAR(nll_loss(uniform, labels, all_nodes(3)), std::log(4.0), 1e-15);
  DenseMatrix sat(3, 4);
  for (std::size_t i = 0; i < 3; ++i) sat(i, static_cast<std::size_t>(labels[i])) = 20.0;
  EXPECT_LT(nll_loss(sat, labels, all_nodes(3)), 1e-8);
  EXPECT_THROW(nll_loss(uniform, labels, std::vector<char>(3, 0)), InvalidInput);
  EXPECT_THROW(nll_loss(uniform, std::vector<int>{0}, all_nodes(1)), InvalidInput);
}

TEST(NllLoss, MatchesLongDoubleOracle) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const DenseMatrix logits = oracle::random_dense(30, 5, static_cast<std::uint64_t>(trial), 15.0);
    std::vector<int> labels(30);
    std::vector<char> mask(30);
    for (std::size_t i = 0; i < 30; ++i) {
      labels[i] = static_cast<int>(rng() % 5);
      mask[i] = static_cast<char>(rng() % 3 != 0);
    }
    mask[0] = 1;
    const long double expect = oracle::nll(logits, labels, mask);
    EXPECT_NEAR(nll_loss(logits, labels, mask), static_cast<double>(expect), 1e-10);
  }
}

TEST(Forward, ZeroParametersGiveUniformLoss) {
  const DataSet ds = small_toy();
  for (FusionMode f : {FusionMode::bank, FusionMode::mlp}) {
    const EncoderConfig cfg = small_config(f, Weighting::raw);
    const EncoderInputs in = inputs_for(ds, cfg);
    EncoderState s = init_encoder(cfg, ds.features.cols(), ds.num_classes);
    s.params = s.params.zeros_like();
    const EmbeddingTable t = forward(s, in, false);
    for (double v : t.logits.values()) EXPECT_EQ(v, 0.0);
    EXPECT_NEAR(nll_loss(t.logits, ds.labels, all_nodes(ds.graph.n())), std::log(3.0), 1e-15);
  }
}

TEST(Forward, HopZeroMlpIsTwoLayerPerceptron) {
  const DataSet ds = small_toy();
  EncoderConfig cfg = small_config(FusionMode::mlp, Weighting::raw);
  cfg.k_max = 0;
  const EncoderInputs in = inputs_for(ds, cfg);
  EncoderState s = init_encoder(cfg, ds.features.cols(), ds.num_classes);
  const EmbeddingTable t = forward(s, in, false);
  const auto& p = s.params;
  for (std::size_t i = 0; i < ds.graph.n(); ++i) {
    std::vector<double> a(4), b(4), hidden(4);
    for (std::size_t j = 0; j < 4; ++j) {
      for (std::size_t f = 0; f < ds.features.cols(); ++f) {
        a[j] += ds.features(i, f) * p.w_lp(f, j);
        b[j] += ds.features(i, f) * p.w_hp(f, j);
      }
      a[j] = std::max(a[j], 0.0);
      b[j] = std::max(b[j], 0.0);
    }
    double score = 0;
    for (std::size_t j = 0; j < 4; ++j) score += a[j] * p.attn_lp(0, j) - b[j] * p.attn_hp(0, j);
    const double gamma = 1.0 / (1.0 + std::exp(-score));
    for (std::size_t j = 0; j < 4; ++j) hidden[j] = gamma * a[j] + (1 - gamma) * b[j];
    for (std::size_t c = 0; c < 3; ++c) {
      double z = 0;
      for (std::size_t j = 0; j < 4; ++j) z += hidden[j] * p.w_hop(j, c);
      EXPECT_NEAR(t.logits(i, c), std::max(z, 0.0), 1e-12);
      EXPECT_NEAR(t.hidden(i, c), hidden[c], 1e-12);
    }
  }
}

TEST(Forward, DeterministicAndDropoutOnlyInTraining) {
  const DataSet ds = small_toy();
  EncoderConfig cfg = small_config(FusionMode::bank, Weighting::local_attention);
  cfg.dropout = 0.5;
  const EncoderInputs in = inputs_for(ds, cfg);
  EncoderState a = init_encoder(cfg, ds.features.cols(), ds.num_classes);
  EncoderState b = init_encoder(cfg, ds.features.cols(), ds.num_classes);
  EXPECT_EQ(a.params, b.params);
  EXPECT_EQ(forward(a, in, true, 7).logits, forward(b, in, true, 7).logits);
  EXPECT_NE(forward(a, in, true, 7).logits, forward(a, in, true, 8).logits);
  const EmbeddingTable e1 = forward(a, in, false);
  const EmbeddingTable e2 = forward(a, in, false, 99);
  EXPECT_EQ(e1.logits, e2.logits);
  EXPECT_EQ(e1.hidden, e2.hidden);
}

TEST(Forward, UnitHiddenRowsHaveUnitNorm) {
  const DataSet ds = small_toy();
  const EncoderConfig cfg = small_config(FusionMode::bank, Weighting::raw);
  EncoderState s = init_encoder(cfg, ds.features.cols(), ds.num_classes);
  const EmbeddingTable t = forward(s, inputs_for(ds, cfg), false);
  for (std::size_t i = 0; i < t.unit_hidden.rows(); ++i) {
    double nrm = 0, raw = 0;
    for (std::size_t j = 0; j < t.unit_hidden.cols(); ++j) {
      nrm += t.unit_hidden(i, j) * t.unit_hidden(i, j);
      raw += t.hidden(i, j) * t.hidden(i, j);
    }
    if (raw == 0.0) {
      EXPECT_EQ(nrm, 0.0);
    } else {
      EXPECT_NEAR(std::sqrt(nrm), 1.0, 1e-10);
    }
  }
}

TEST(Forward, GateIsConvexAndClassWeightsNormalized) {
  const DataSet ds = small_toy();
  for (Weighting w : {Weighting::raw, Weighting::local_attention, Weighting::global}) {
    const EncoderConfig cfg = small_config(FusionMode::bank, w);
    EncoderState s = init_encoder(cfg, ds.features.cols(), ds.num_classes);
    forward(s, inputs_for(ds, cfg), false);
    const ForwardCache& c = *s.cache;
    for (std::size_t k = 0; k < c.fused.size(); ++k) {
      for (std::size_t i = 0; i < ds.graph.n(); ++i) {
        EXPECT_GE(c.gate[k][i], 0.0);
        EXPECT_LE(c.gate[k][i], 1.0);
        for (std::size_t j = 0; j < 4; ++j) {
          const double lo = std::min(c.act_lp[k](i, j), c.act_hp[k](i, j));
          const double hi = std::max(c.act_lp[k](i, j), c.act_hp[k](i, j));
          EXPECT_GE(c.fused[k](i, j), lo - 1e-15);
          EXPECT_LE(c.fused[k](i, j), hi + 1e-15);
        }
      }
    }
    for (const DenseMatrix* m : {&c.alpha_class, &c.alpha_hop}) {
      for (std::size_t i = 0; i < m->rows(); ++i) {
        double sum = 0;
        for (double v : m->row(i)) sum += v;
        EXPECT_NEAR(sum, 1.0, 1e-12);
      }
    }
  }
}

TEST(Forward, HopCountMismatchRejected) {
  const DataSet ds = small_toy();
  const EncoderConfig cfg = small_config(FusionMode::bank, Weighting::raw);
  EncoderConfig other = cfg;
  other.k_max = 3;
  EncoderState s = init_encoder(cfg, ds.features.cols(), ds.num_classes);
  EXPECT_THROW(forward(s, inputs_for(ds, other), false), InvalidInput);
}

TEST(Forward, NonFiniteActivationsNameTheEpoch) {
  const DataSet ds = small_toy();
  const EncoderConfig cfg = small_config(FusionMode::mlp, Weighting::raw);
  EncoderState s = init_encoder(cfg, ds.features.cols(), ds.num_classes);
  s.params.w_lp(0, 0) = std::numeric_limits<double>::infinity();
  try {
    forward(s, inputs_for(ds, cfg), true, 0, 17);
    FAIL() << "expected DivergenceError";
  } catch (const DivergenceError& e) {
    EXPECT_EQ(e.epoch(), 17);
  }
}

TEST(Grad, RequiresForwardCache) {
  const DataSet ds = small_toy();
  const EncoderConfig cfg = small_config(FusionMode::bank, Weighting::raw);
  const EncoderState s = init_encoder(cfg, ds.features.cols(), ds.num_classes);
  EXPECT_THROW(grad(s, inputs_for(ds, cfg), ds.labels, all_nodes(ds.graph.n())), UsageError);
}

TEST(Grad, ScalingTheLossScalesEveryEntry) {
  const DataSet ds = small_toy();
  const EncoderConfig cfg = small_config(FusionMode::mlp, Weighting::local_attention);
  const EncoderInputs in = inputs_for(ds, cfg);
  EncoderState s = init_encoder(cfg, ds.features.cols(), ds.num_classes);
  forward(s, in, false);
  const auto mask = split_mask(ds, Split::train);
  const EncoderParameters g1 = grad(s, in, ds.labels, mask);
  const EncoderParameters g2 = grad(s, in, ds.labels, mask, 2.0);
  for (std::size_t t = 0; t < EncoderParameters::kTensorCount; ++t) {
    for (std::size_t j = 0; j < g1.tensor(t).size(); ++j) {
      EXPECT_DOUBLE_EQ(g2.tensor(t).values()[j], 2.0 * g1.tensor(t).values()[j]);
    }
  }
}

TEST(Grad, VanishesAtExactMinimum) {
  // Four interchangeable nodes (a 4-cycle with identical features) and balanced labels:
  // the best achievable prediction is uniform, which a zero bank produces exactly.
  DataSet ds;
  ds.graph = oracle::make_graph(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
  ds.features = DenseMatrix(4, 3, 0.5);
  ds.labels = {0, 1, 0, 1};
  ds.num_classes = 2;
  ds.split.assign(4, Split::train);
  const EncoderConfig cfg = small_config(FusionMode::bank, Weighting::raw);
  const EncoderInputs in = inputs_for(ds, cfg);
  EncoderState s = init_encoder(cfg, 3, 2);
  s.params.bank = DenseMatrix(4, 2);
  forward(s, in, false);
  const EncoderParameters g = grad(s, in, ds.labels, all_nodes(4));
  double norm = 0;
  for (std::size_t t = 0; t < EncoderParameters::kTensorCount; ++t)
    for (double v : g.tensor(t).values()) norm += v * v;
  EXPECT_LT(std::sqrt(norm), 1e-6);
}

TEST_P(GradientCheck, MatchesCentralDifferences) {
  const GradCase gc = GetParam();
  const DataSet ds = small_toy(11);
  EncoderConfig cfg = small_config(gc.fusion, gc.weighting, gc.rank);
  cfg.mask = gc.mask;
  if (gc.dropout) cfg.dropout = 0.3;
  const auto errs = gradient_errors(ds, cfg, gc.dropout);
  for (std::size_t t = 0; t < errs.size(); ++t) {
    EXPECT_LT(errs[t], 1e-4) << EncoderParameters::kNames[t];
  }
}

INSTANTIATE_TEST_SUITE_P(
    Encoder, GradientCheck,
    ::testing::Values(GradCase{FusionMode::bank, Weighting::raw, MaskMode::adaptive, 0, false},
                      GradCase{FusionMode::mlp, Weighting::raw, MaskMode::adaptive, 0, false},
                      GradCase{FusionMode::bank, Weighting::local_attention, MaskMode::adaptive, 0, false},
                      GradCase{FusionMode::mlp, Weighting::local_attention, MaskMode::hard, 0, false},
                      GradCase{FusionMode::bank, Weighting::global, MaskMode::hard, 0, false},
                      GradCase{FusionMode::mlp, Weighting::global, MaskMode::adaptive, 0, false},
                      GradCase{FusionMode::bank, Weighting::raw, MaskMode::adaptive, 6, false},
                      GradCase{FusionMode::mlp, Weighting::global, MaskMode::adaptive, 6, false},
                      GradCase{FusionMode::bank, Weighting::local_attention, MaskMode::adaptive, 0, true},
                      GradCase{FusionMode::mlp, Weighting::raw, MaskMode::adaptive, 0, true}));

TEST(BankFusion, HandComputedTwoHops) {
  // One node, h = 2, c = 2, K = 2.
  const DenseMatrix h0{{1.0, 0.0}};
  const DenseMatrix h1{{0.5, 0.5}};
  const DenseMatrix h2{{0.0, 2.0}};
  const DenseMatrix bank{{1.0, 0.0}, {0.0, 1.0}};
  const std::vector<DenseMatrix> hops = {h0, h1, h2};
  const BankFusion f = bank_fusion(hops, bank, 1.0, 1.0);
  const double e = std::exp(1.0);
  const double a0 = e / (e + 1), a1 = 1 / (e + 1);
  EXPECT_NEAR(f.alpha_class(0, 0), a0, 1e-15);
  EXPECT_NEAR(f.class_weight(0, 1), a1, 1e-15);
  const double s1 = 0.5 * a0 + 0.5 * a1, s2 = 2.0 * a1;
  const double w1 = std::exp(s1) / (std::exp(s1) + std::exp(s2));
  EXPECT_NEAR(f.alpha_hop(0, 0), w1, 1e-15);
  EXPECT_NEAR(f.fused(0, 0), w1 * 0.5 * a0, 1e-15);
  EXPECT_NEAR(f.fused(0, 1), w1 * 0.5 * a1 + (1 - w1) * 2.0 * a1, 1e-15);
}

TEST(EncoderConfig, ValidationErrors) {
  EncoderConfig c;
  c.dropout = 1.0;
  EXPECT_THROW(c.validate(), InvalidInput);
  c = {};
  c.hidden = 0;
  EXPECT_THROW(c.validate(), InvalidInput);
  c = {};
  c.k_max = 0;
  EXPECT_THROW(c.validate(), InvalidInput);  // bank fusion needs a hop
  c.fusion = FusionMode::mlp;
  EXPECT_NO_THROW(c.validate());
  c = {};
  c.rank = 4;
  c.weighting = Weighting::local_attention;
  EXPECT_THROW(c.validate(), InvalidInput);
  EXPECT_THROW(parse_fusion_mode("sum"), InvalidInput);
}
