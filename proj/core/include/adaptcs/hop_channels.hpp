#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "adaptcs/dense_matrix.hpp"
#include "adaptcs/graph.hpp"
#include "adaptcs/sparse_matrix.hpp"

namespace adaptcs {

enum class MaskMode { hard, adaptive };
enum class Weighting { raw, local_attention, global };

std::string_view to_string(MaskMode m) noexcept;
std::string_view to_string(Weighting w) noexcept;
MaskMode parse_mask_mode(std::string_view s);
Weighting parse_weighting(std::string_view s);

/// Default cap on the nnz of any materialized power of A-hat.
inline constexpr std::size_t kDefaultNnzBudget = 50'000'000;

/// Operators [I, A-hat, A-hat^(2), ..., A-hat^(K)] where hop k keeps the entries of
/// A-hat^k not supported by any of hops 1..k-1. Throws BudgetExceeded when a power
/// exceeds nnz_budget.
std::vector<SparseMatrix> hard_mask_channels(const SparseMatrix& a_hat, int k_max,
                                             std::size_t nnz_budget = kDefaultNnzBudget);

/// Operators [I, A-hat, ReLU(A-hat^2 - A-hat), ..., ReLU(A-hat^K - A-hat^(K-1))].
std::vector<SparseMatrix> adaptive_mask_channels(const SparseMatrix& a_hat, int k_max,
                                                 std::size_t nnz_budget = kDefaultNnzBudget);

std::vector<SparseMatrix> hop_operators(const SparseMatrix& a_hat, int k_max, MaskMode mode,
                                        std::size_t nnz_budget = kDefaultNnzBudget);

/// sigmoid(g_i . g_j) for every stored (i, j) of op, in CSR order.
std::vector<double> attention_coefficients(const SparseMatrix& op, const DenseMatrix& g);

/// RN(op ⊙ weights) on the pattern of op. Rows whose weighted sum is zero become all
/// zero but keep their pattern.
SparseMatrix reweight_rows(const SparseMatrix& op, std::span<const double> weights);

struct AttentionOps {
  std::vector<SparseMatrix> lp;
  std::vector<SparseMatrix> hp;
};

/// Low-pass RN(op ⊙ alpha) and high-pass RN(op ⊙ (1 - alpha)) operators with
/// alpha_ij = sigmoid((W h_i) . (W h_j)) evaluated on each operator's support.
AttentionOps local_attention_ops(std::span<const SparseMatrix> operators, const DenseMatrix& h,
                                 const DenseMatrix& w);

/// x - op * x per operator.
std::vector<DenseMatrix> raw_highpass_features(std::span<const SparseMatrix> operators,
                                               const DenseMatrix& x);

/// sigmoid(op * 1), the node-level weights of the global scheme.
std::vector<double> global_weights(const SparseMatrix& op);

struct HopChannelSet {
  int k_max = 0;
  MaskMode mode = MaskMode::adaptive;
  Weighting weighting = Weighting::raw;
  std::vector<SparseMatrix> operators;
  std::vector<DenseMatrix> lp_features;
  std::vector<DenseMatrix> hp_features;
};

/// Builds operators and parameter-free features. With local_attention the features
/// are left empty because they depend on encoder parameters.
HopChannelSet build_hop_channels(const SparseMatrix& a_hat, const DenseMatrix& x, int k_max,
                                 MaskMode mode, Weighting weighting,
                                 std::size_t nnz_budget = kDefaultNnzBudget);

struct TriangleAuditReport {
  std::size_t edges = 0;
  std::size_t retained = 0;
  std::size_t violations = 0;
  std::vector<int> retained_support;  // |CN(u,v)| of retained edges
  std::vector<int> dropped_support;
  std::vector<Edge> violating_edges;
  double mean_retained_support() const noexcept;
  double mean_dropped_support() const noexcept;
};

/// For every edge with (A-hat^2 - A-hat)_uv > 0 checks |CN(u,v)| >= floor(3T) + 1,
/// T = 1 - 1/d_u - 1/d_v with self-looped degrees.
TriangleAuditReport triangle_support_audit(const Graph& g, const SparseMatrix& a_hat);

}  // namespace adaptcs
