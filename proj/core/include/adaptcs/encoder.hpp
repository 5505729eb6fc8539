#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adaptcs/dataset.hpp"
#include "adaptcs/dense_matrix.hpp"
#include "adaptcs/hop_channels.hpp"
#include "adaptcs/lowrank.hpp"
#include "adaptcs/sparse_matrix.hpp"

namespace adaptcs {

enum class FusionMode { bank, mlp };

std::string_view to_string(FusionMode f) noexcept;
FusionMode parse_fusion_mode(std::string_view s);

struct EncoderConfig {
  int k_max = 5;
  std::size_t hidden = 512;
  MaskMode mask = MaskMode::adaptive;
  Weighting weighting = Weighting::raw;
  FusionMode fusion = FusionMode::bank;
  std::size_t rank = 0;  // 0 selects the exact path
  double dropout = 0.5;
  double learning_rate = 0.01;
  int epochs = 100;
  int patience = 20;
  double beta_class = 1.0;
  double beta_hop = 1.0;
  std::uint64_t seed = 42;
  std::size_t nnz_budget = kDefaultNnzBudget;

  /// Throws InvalidInput on out-of-range values or unsupported combinations.
  void validate() const;
};

/// Propagation inputs shared by every forward pass: raw features plus either the
/// exact hop operators or the latent blocks of the low-rank plan.
struct EncoderInputs {
  DenseMatrix x;
  int k_max = 0;
  Weighting weighting = Weighting::raw;
  std::vector<SparseMatrix> operators;      // exact path, hops 0..K
  std::optional<LatentHopPlan> plan;        // low-rank path
  std::vector<DenseMatrix> latent_blocks;   // D_k V^T X at index k
  std::vector<std::vector<double>> renorm;  // global weights at index k (k >= 1)

  std::size_t n() const noexcept { return x.rows(); }
  bool low_rank() const noexcept { return plan.has_value(); }
};

EncoderInputs make_exact_inputs(std::vector<SparseMatrix> operators, DenseMatrix x,
                                Weighting weighting);
EncoderInputs make_exact_inputs(const HopChannelSet& channels, DenseMatrix x);
EncoderInputs make_lowrank_inputs(LatentHopPlan plan, DenseMatrix x, Weighting weighting);
/// Builds A-hat from the graph and dispatches on config.rank. With a cache directory,
/// hop operators and SVD factors are read from / written to AHOP and ASVD files there.
EncoderInputs prepare_inputs(const DataSet& ds, const EncoderConfig& config,
                             const std::optional<std::filesystem::path>& cache_dir = {});

struct EncoderParameters {
  DenseMatrix w_lp;      // d x h
  DenseMatrix w_hp;      // d x h
  DenseMatrix attn_lp;   // (K+1) x h, frequency gate projections
  DenseMatrix attn_hp;   // (K+1) x h
  DenseMatrix w_hop;     // (K+1)h x c, MLP fusion only
  DenseMatrix bank;      // h x c, bank fusion only
  DenseMatrix w_renorm;  // h x h, local attention only

  static constexpr std::size_t kTensorCount = 7;
  static constexpr const char* kNames[kTensorCount] = {"w_lp",  "w_hp", "attn_lp", "attn_hp",
                                                       "w_hop", "bank", "w_renorm"};
  DenseMatrix& tensor(std::size_t i);
  const DenseMatrix& tensor(std::size_t i) const;

  bool all_finite() const noexcept;
  /// this += scale * other, tensor by tensor.
  void axpy(double scale, const EncoderParameters& other);
  EncoderParameters zeros_like() const;

  friend bool operator==(const EncoderParameters&, const EncoderParameters&) = default;
};

/// Activations kept for the backward pass.
struct ForwardCache {
  DenseMatrix z_lp, z_hp;
  std::vector<DenseMatrix> pre_lp, pre_hp;    // per hop, before ReLU
  std::vector<DenseMatrix> drop_lp, drop_hp;  // per hop dropout scale, empty in eval
  std::vector<DenseMatrix> act_lp, act_hp;    // ReLU(pre) * dropout
  std::vector<std::vector<double>> gate;      // per hop, LP share per node
  std::vector<DenseMatrix> fused;             // H^(k)
  // local attention
  DenseMatrix g;                               // Z_lp W_renorm^T
  std::vector<std::vector<double>> alpha;      // per hop, on operator pattern
  std::vector<SparseMatrix> op_lp, op_hp;      // RN(op * alpha), RN(op * (1 - alpha))
  // bank fusion
  DenseMatrix alpha_class, class_weight, alpha_hop;
  // mlp fusion
  DenseMatrix pre_out;
  DenseMatrix hidden, logits;
};

struct EmbeddingTable {
  DenseMatrix hidden;       // fused pre-classifier embedding
  DenseMatrix logits;       // n x c
  DenseMatrix unit_hidden;  // rows of hidden scaled to unit 2-norm
};

struct EncoderState {
  EncoderConfig config;
  std::size_t input_dim = 0;
  int num_classes = 0;
  EncoderParameters params;
  std::optional<ForwardCache> cache;
};

/// Seeded uniform init in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
EncoderState init_encoder(const EncoderConfig& config, std::size_t input_dim, int num_classes);

/// Runs the encoder and stores the cache in state. In train mode dropout masks are
/// drawn from (config.seed, dropout_stream). Throws DivergenceError naming `epoch`
/// when activations become non-finite.
EmbeddingTable forward(EncoderState& state, const EncoderInputs& inputs, bool train,
                       std::uint64_t dropout_stream = 0, int epoch = -1);

/// Mean -log softmax(logits_i)[y_i] over nodes with mask[i] set.
double nll_loss(const DenseMatrix& logits, std::span<const int> labels, std::span<const char> mask);

/// Reverse-mode gradient of loss_scale * nll_loss at the cached forward pass.
/// Throws UsageError without a cache.
EncoderParameters grad(const EncoderState& state, const EncoderInputs& inputs,
                       std::span<const int> labels, std::span<const char> mask,
                       double loss_scale = 1.0);

/// Fraction of masked nodes whose argmax logit equals the label.
double masked_accuracy(const DenseMatrix& logits, std::span<const int> labels,
                       std::span<const char> mask);

std::vector<char> split_mask(const DataSet& ds, Split s);

struct BankFusion {
  DenseMatrix alpha_class;   // n x c
  DenseMatrix class_weight;  // n x h
  DenseMatrix alpha_hop;     // n x K
  DenseMatrix fused;         // n x h
};

/// Bank fusion of hops 1..K (hops[0] drives the class attention):
/// alpha_class = softmax(beta_c H0 P), w = alpha_class P^T,
/// alpha_hop = softmax_k(beta_h <H^(k), w>), fused = sum_k alpha_hop_k (H^(k) * w).
BankFusion bank_fusion(std::span<const DenseMatrix> hops, const DenseMatrix& bank,
                       double beta_class, double beta_hop);

struct TrainResult {
  EncoderState state;
  EmbeddingTable embeddings;
  std::vector<double> train_losses;
  std::vector<double> val_losses;
  std::vector<double> val_accuracy;
  int best_epoch = -1;
  int epochs_run = 0;
};

/// Full-batch gradient descent with early stopping on validation accuracy. Returns the
/// best-validation parameters and their eval-mode embeddings.
TrainResult train(const DataSet& ds, const EncoderInputs& inputs, const EncoderConfig& config);
TrainResult train(const DataSet& ds, const EncoderConfig& config);

}  // namespace adaptcs
