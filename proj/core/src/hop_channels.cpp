#include "adaptcs/hop_channels.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "adaptcs/errors.hpp"

namespace adaptcs {
namespace {

// Relative slack for deciding (A^2 - A)_uv > 0 in the audit.
constexpr double kRetainTolerance = 1e-12;

double sigmoid(double x) {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

void check_hops(const SparseMatrix& a_hat, int k_max) {
  if (k_max < 1) throw InvalidInput("hop count K must be >= 1, got " + std::to_string(k_max));
  if (a_hat.rows() != a_hat.cols()) throw InvalidInput("hop operators need a square matrix");
}

SparseMatrix next_power(const SparseMatrix& power, const SparseMatrix& a_hat, int k,
                        std::size_t budget) {
  SparseMatrix p = spgemm(power, a_hat);
  if (p.nnz() > budget) {
    throw BudgetExceeded("A-hat^" + std::to_string(k) + " has " + std::to_string(p.nnz()) +
                         " nonzeros, above the budget of " + std::to_string(budget) +
                         "; lower K or switch to the low-rank path (rank=<r>)");
  }
  return p;
}

void check_operator_shapes(std::span<const SparseMatrix> operators, std::size_t n) {
  for (const auto& op : operators) {
    if (op.rows() != n || op.cols() != n) {
      throw InvalidInput("operator shape " + std::to_string(op.rows()) + "x" +
                         std::to_string(op.cols()) + " does not match " + std::to_string(n) +
                         " feature rows");
    }
  }
}

}  // namespace

std::string_view to_string(MaskMode m) noexcept { return m == MaskMode::hard ? "hard" : "adaptive"; }

std::string_view to_string(Weighting w) noexcept {
  switch (w) {
    case Weighting::raw: return "raw";
    case Weighting::local_attention: return "local_attention";
    case Weighting::global: return "global";
  }
  return "raw";
}

MaskMode parse_mask_mode(std::string_view s) {
  if (s == "hard") return MaskMode::hard;
  if (s == "adaptive") return MaskMode::adaptive;
  throw InvalidInput("unknown mask mode '" + std::string(s) + "' (hard|adaptive)");
}

Weighting parse_weighting(std::string_view s) {
  if (s == "raw") return Weighting::raw;
  if (s == "local_attention" || s == "local") return Weighting::local_attention;
  if (s == "global") return Weighting::global;
  throw InvalidInput("unknown weighting '" + std::string(s) + "' (raw|local_attention|global)");
}

std::vector<SparseMatrix> hard_mask_channels(const SparseMatrix& a_hat, int k_max,
                                             std::size_t nnz_budget) {
  check_hops(a_hat, k_max);
  std::vector<SparseMatrix> ops{SparseMatrix::identity(a_hat.rows()), a_hat};
  SparseMatrix power = a_hat;
  SparseMatrix seen = a_hat;  // support union of hops 1..k-1
  for (int k = 2; k <= k_max; ++k) {
    power = next_power(power, a_hat, k, nnz_budget);
    ops.push_back(mask_out(power, seen));
    seen = sparse_add(seen, ops.back());
  }
  return ops;
}

std::vector<SparseMatrix> adaptive_mask_channels(const SparseMatrix& a_hat, int k_max,
                                                 std::size_t nnz_budget) {
  check_hops(a_hat, k_max);
  std::vector<SparseMatrix> ops{SparseMatrix::identity(a_hat.rows()), a_hat};
  SparseMatrix power = a_hat;
  for (int k = 2; k <= k_max; ++k) {
    SparseMatrix next = next_power(power, a_hat, k, nnz_budget);
    ops.push_back(relu_sub(next, power));
    power = std::move(next);
  }
  return ops;
}

std::vector<SparseMatrix> hop_operators(const SparseMatrix& a_hat, int k_max, MaskMode mode,
                                        std::size_t nnz_budget) {
  return mode == MaskMode::hard ? hard_mask_channels(a_hat, k_max, nnz_budget)
                                : adaptive_mask_channels(a_hat, k_max, nnz_budget);
}

std::vector<double> attention_coefficients(const SparseMatrix& op, const DenseMatrix& g) {
  if (g.rows() != op.rows() || op.rows() != op.cols()) {
    throw InvalidInput("attention: embedding rows do not match operator size");
  }
  std::vector<double> alpha(op.nnz());
  const auto offsets = op.row_offsets();
  const auto cols = op.col_indices();
  for (std::size_t i = 0; i < op.rows(); ++i) {
    auto gi = g.row(i);
    for (std::size_t p = offsets[i]; p < offsets[i + 1]; ++p) {
      alpha[p] = sigmoid(dot(gi, g.row(cols[p])));
    }
  }
  return alpha;
}

SparseMatrix reweight_rows(const SparseMatrix& op, std::span<const double> weights) {
  if (weights.size() != op.nnz()) throw InvalidInput("reweight_rows: weight count != nnz");
  std::vector<double> vals(op.nnz());
  const auto offsets = op.row_offsets();
  const auto src = op.values();
  for (std::size_t i = 0; i < op.rows(); ++i) {
    double sum = 0.0;
    for (std::size_t p = offsets[i]; p < offsets[i + 1]; ++p) {
      vals[p] = src[p] * weights[p];
      sum += vals[p];
    }
    for (std::size_t p = offsets[i]; p < offsets[i + 1]; ++p) vals[p] = sum > 0.0 ? vals[p] / sum : 0.0;
  }
  return SparseMatrix(op.rows(), op.cols(),
                      std::vector<std::size_t>(offsets.begin(), offsets.end()),
                      std::vector<Index>(op.col_indices().begin(), op.col_indices().end()),
                      std::move(vals));
}

AttentionOps local_attention_ops(std::span<const SparseMatrix> operators, const DenseMatrix& h,
                                 const DenseMatrix& w) {
  if (w.rows() != w.cols() || w.cols() != h.cols()) {
    throw InvalidInput("attention: W must be " + std::to_string(h.cols()) + "x" +
                       std::to_string(h.cols()));
  }
  check_operator_shapes(operators, h.rows());
  for (const auto& op : operators) {
    for (double v : op.values()) {
      if (v < 0.0) throw InvalidInput("attention: operators must be nonnegative");
    }
  }
  const DenseMatrix g = matmul_nt(h, w);
  AttentionOps out;
  for (const auto& op : operators) {
    std::vector<double> alpha = attention_coefficients(op, g);
    out.lp.push_back(compact(reweight_rows(op, alpha), 0.0));
    for (double& a : alpha) a = 1.0 - a;
    out.hp.push_back(compact(reweight_rows(op, alpha), 0.0));
  }
  return out;
}

std::vector<DenseMatrix> raw_highpass_features(std::span<const SparseMatrix> operators,
                                               const DenseMatrix& x) {
  check_operator_shapes(operators, x.rows());
  std::vector<DenseMatrix> out;
  out.reserve(operators.size());
  for (const auto& op : operators) out.push_back(x - op.multiply(x));
  return out;
}

std::vector<double> global_weights(const SparseMatrix& op) {
  std::vector<double> w = op.row_sums();
  for (double& v : w) v = sigmoid(v);
  return w;
}

HopChannelSet build_hop_channels(const SparseMatrix& a_hat, const DenseMatrix& x, int k_max,
                                 MaskMode mode, Weighting weighting, std::size_t nnz_budget) {
  if (x.rows() != a_hat.rows()) throw InvalidInput("features do not match the operator size");
  HopChannelSet set;
  set.k_max = k_max;
  set.mode = mode;
  set.weighting = weighting;
  set.operators = hop_operators(a_hat, k_max, mode, nnz_budget);
  if (weighting == Weighting::local_attention) return set;
  for (std::size_t k = 0; k < set.operators.size(); ++k) {
    const auto& op = set.operators[k];
    DenseMatrix lp = op.multiply(x);
    DenseMatrix hp = x - lp;
    if (weighting == Weighting::global && k > 0) {
      const auto w = global_weights(op);
      lp = scale_rows(lp, w);
      hp = scale_rows(hp, w);
    }
    set.lp_features.push_back(std::move(lp));
    set.hp_features.push_back(std::move(hp));
  }
  return set;
}

double TriangleAuditReport::mean_retained_support() const noexcept {
  if (retained_support.empty()) return 0.0;
  return std::accumulate(retained_support.begin(), retained_support.end(), 0.0) /
         static_cast<double>(retained_support.size());
}

double TriangleAuditReport::mean_dropped_support() const noexcept {
  if (dropped_support.empty()) return 0.0;
  return std::accumulate(dropped_support.begin(), dropped_support.end(), 0.0) /
         static_cast<double>(dropped_support.size());
}

TriangleAuditReport triangle_support_audit(const Graph& g, const SparseMatrix& a_hat) {
  if (a_hat.rows() != g.n() || a_hat.cols() != g.n()) {
    throw InvalidInput("audit: A-hat does not match the graph");
  }
  TriangleAuditReport rep;
  rep.edges = g.m();
  for (const Edge& e : g.edges()) {
    // (A-hat^2)_uv by merging rows u and v (A-hat is symmetric).
    auto cu = a_hat.row_cols(e.u);
    auto vu = a_hat.row_values(e.u);
    auto cv = a_hat.row_cols(e.v);
    auto vv = a_hat.row_values(e.v);
    double sq = 0.0;
    for (std::size_t i = 0, j = 0; i < cu.size() && j < cv.size();) {
      if (cu[i] < cv[j]) {
        ++i;
      } else if (cv[j] < cu[i]) {
        ++j;
      } else {
        sq += vu[i] * vv[j];
        ++i;
        ++j;
      }
    }
    const double a_uv = a_hat.at(e.u, e.v);
    auto nu = g.neighbors(e.u);
    auto nv = g.neighbors(e.v);
    int common = 0;
    for (std::size_t i = 0, j = 0; i < nu.size() && j < nv.size();) {
      if (nu[i] < nv[j]) {
        ++i;
      } else if (nv[j] < nu[i]) {
        ++j;
      } else {
        ++common;
        ++i;
        ++j;
      }
    }
    if (sq - a_uv > kRetainTolerance * a_uv) {
      ++rep.retained;
      rep.retained_support.push_back(common);
      // floor(3T) with T = (ab - a - b) / (ab), a, b >= 2 so the numerator is >= 0.
      const long long a = static_cast<long long>(g.degree(e.u)) + 1;
      const long long b = static_cast<long long>(g.degree(e.v)) + 1;
      const long long bound = (3 * (a * b - a - b)) / (a * b) + 1;
      if (common < bound) {
        ++rep.violations;
        rep.violating_edges.push_back(e);
      }
    } else {
      rep.dropped_support.push_back(common);
    }
  }
  return rep;
}

}  // namespace adaptcs
