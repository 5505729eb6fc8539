#include "adaptcs/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "adaptcs/binary_io.hpp"
#include "adaptcs/errors.hpp"
#include "adaptcs/svd.hpp"

namespace adaptcs {
namespace {

double sigmoid(double x) {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

// Row-wise softmax of beta * m.
DenseMatrix softmax_rows(const DenseMatrix& m, double beta) {
  DenseMatrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto src = m.row(i);
    auto dst = out.row(i);
    double mx = -INFINITY;
    for (double v : src) mx = std::max(mx, beta * v);
    double sum = 0.0;
    for (std::size_t j = 0; j < src.size(); ++j) {
      dst[j] = std::exp(beta * src[j] - mx);
      sum += dst[j];
    }
    for (double& v : dst) v /= sum;
  }
  return out;
}

// Backward of a row softmax y = softmax(beta z): dz = beta y * (dy - <y, dy>).
DenseMatrix softmax_rows_backward(const DenseMatrix& y, const DenseMatrix& dy, double beta) {
  DenseMatrix dz(y.rows(), y.cols());
  for (std::size_t i = 0; i < y.rows(); ++i) {
    const double inner = dot(y.row(i), dy.row(i));
    for (std::size_t j = 0; j < y.cols(); ++j) dz(i, j) = beta * y(i, j) * (dy(i, j) - inner);
  }
  return dz;
}

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

DenseMatrix dropout_mask(std::size_t rows, std::size_t cols, double rate, std::mt19937_64& rng) {
  DenseMatrix m(rows, cols);
  const double keep = 1.0 - rate;
  const double scale = 1.0 / keep;
  for (double& v : m.values()) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    v = u < keep ? scale : 0.0;
  }
  return m;
}

void init_uniform(DenseMatrix& m, std::size_t rows, std::size_t cols, std::size_t fan_in,
                  std::mt19937_64& rng) {
  m = DenseMatrix(rows, cols);
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (double& v : m.values()) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    v = (2.0 * u - 1.0) * bound;
  }
}

void check_mask(std::span<const int> labels, std::span<const char> mask, std::size_t n) {
  if (labels.size() != n || mask.size() != n) {
    throw InvalidInput("labels/mask length does not match the logits");
  }
}

// Distributes the gradient of an RN(B) operator back to B on the shared pattern:
// dB_ij = (dA_ij - sum_l A_il dA_il) / r_i.
std::vector<double> row_normalize_backward(const SparseMatrix& op, std::span<const double> weights,
                                           const SparseMatrix& normalized,
                                           std::span<const double> d_normalized) {
  std::vector<double> d_b(op.nnz(), 0.0);
  const auto offsets = op.row_offsets();
  const auto vals = op.values();
  const auto nvals = normalized.values();
  for (std::size_t i = 0; i < op.rows(); ++i) {
    double r = 0.0;
    double inner = 0.0;
    for (std::size_t p = offsets[i]; p < offsets[i + 1]; ++p) {
      r += vals[p] * weights[p];
      inner += nvals[p] * d_normalized[p];
    }
    if (r <= 0.0) continue;
    for (std::size_t p = offsets[i]; p < offsets[i + 1]; ++p) {
      d_b[p] = (d_normalized[p] - inner) / r;
    }
  }
  return d_b;
}

// <dY_i, Z_j> for every stored (i, j) of the pattern: gradient of Y = S Z wrt S.
std::vector<double> pattern_gradient(const SparseMatrix& pattern, const DenseMatrix& d_y,
                                     const DenseMatrix& z) {
  std::vector<double> out(pattern.nnz());
  const auto offsets = pattern.row_offsets();
  const auto cols = pattern.col_indices();
  for (std::size_t i = 0; i < pattern.rows(); ++i) {
    auto dy = d_y.row(i);
    for (std::size_t p = offsets[i]; p < offsets[i + 1]; ++p) out[p] = dot(dy, z.row(cols[p]));
  }
  return out;
}

}  // namespace

std::string_view to_string(FusionMode f) noexcept { return f == FusionMode::bank ? "bank" : "mlp"; }

FusionMode parse_fusion_mode(std::string_view s) {
  if (s == "bank") return FusionMode::bank;
  if (s == "mlp") return FusionMode::mlp;
  throw InvalidInput("unknown fusion mode '" + std::string(s) + "' (bank|mlp)");
}

void EncoderConfig::validate() const {
  if (k_max < 0) throw InvalidInput("K must be >= 0");
  if (fusion == FusionMode::bank && k_max < 1) throw InvalidInput("bank fusion needs K >= 1");
  if (hidden == 0) throw InvalidInput("hidden size must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw InvalidInput("dropout must lie in [0, 1)");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw InvalidInput("learning rate must be finite and >= 0");
  }
  if (epochs < 0) throw InvalidInput("epochs must be >= 0");
  if (patience < 1) throw InvalidInput("patience must be >= 1");
  if (!std::isfinite(beta_class) || !std::isfinite(beta_hop)) {
    throw InvalidInput("temperatures must be finite");
  }
  if (rank > 0 && weighting == Weighting::local_attention) {
    throw InvalidInput("local_attention weighting needs the exact path (rank=0)");
  }
}

EncoderInputs make_exact_inputs(std::vector<SparseMatrix> operators, DenseMatrix x,
                                Weighting weighting) {
  if (operators.empty()) throw InvalidInput("exact inputs need at least the hop-0 operator");
  for (const auto& op : operators) {
    if (op.rows() != x.rows() || op.cols() != x.rows()) {
      throw InvalidInput("operator size does not match the feature rows");
    }
  }
  EncoderInputs in;
  in.k_max = static_cast<int>(operators.size()) - 1;
  in.weighting = weighting;
  if (weighting == Weighting::global) {
    in.renorm.resize(operators.size());
    for (std::size_t k = 1; k < operators.size(); ++k) in.renorm[k] = global_weights(operators[k]);
  }
  in.operators = std::move(operators);
  in.x = std::move(x);
  return in;
}

EncoderInputs make_exact_inputs(const HopChannelSet& channels, DenseMatrix x) {
  return make_exact_inputs(channels.operators, std::move(x), channels.weighting);
}

EncoderInputs make_lowrank_inputs(LatentHopPlan plan, DenseMatrix x, Weighting weighting) {
  if (weighting == Weighting::local_attention) {
    throw InvalidInput("local attention is unavailable on the low-rank path");
  }
  if (plan.svd.u.rows() != x.rows()) throw InvalidInput("plan does not match the feature rows");
  EncoderInputs in;
  in.k_max = plan.k_max;
  in.weighting = weighting;
  in.latent_blocks.resize(static_cast<std::size_t>(plan.k_max) + 1);
  if (weighting == Weighting::global) in.renorm.resize(in.latent_blocks.size());
  for (int k = 1; k <= plan.k_max; ++k) {
    in.latent_blocks[static_cast<std::size_t>(k)] = latent_hop_block(plan, k);
    if (weighting == Weighting::global) {
      in.renorm[static_cast<std::size_t>(k)] = global_renorm_weights(plan, k);
    }
  }
  in.plan = std::move(plan);
  in.x = std::move(x);
  return in;
}

EncoderInputs prepare_inputs(const DataSet& ds, const EncoderConfig& config,
                             const std::optional<std::filesystem::path>& cache_dir) {
  config.validate();
  const SparseMatrix a_hat = sym_normalize(ds.graph.adjacency());
  const std::uint64_t gh = ds.graph.hash();
  if (config.k_max == 0) {
    return make_exact_inputs({SparseMatrix::identity(ds.graph.n())}, ds.features, config.weighting);
  }
  if (config.rank == 0) {
    std::filesystem::path file;
    if (cache_dir) {
      file = *cache_dir / ("hops-" + std::to_string(gh) + "-k" + std::to_string(config.k_max) + "-" +
                           std::string(to_string(config.mask)) + ".ahop");
      if (auto ops = load_hop_cache(file, gh, config.k_max, config.mask)) {
        return make_exact_inputs(std::move(*ops), ds.features, config.weighting);
      }
    }
    auto ops = hop_operators(a_hat, config.k_max, config.mask, config.nnz_budget);
    if (cache_dir) {
      std::filesystem::create_directories(*cache_dir);
      save_hop_cache(file, ops, gh, config.k_max, config.mask);
    }
    return make_exact_inputs(std::move(ops), ds.features, config.weighting);
  }
  std::optional<SvdFactors> svd;
  std::filesystem::path file;
  if (cache_dir) {
    file = *cache_dir / ("svd-" + std::to_string(gh) + "-r" + std::to_string(config.rank) + "-s" +
                         std::to_string(config.seed) + ".asvd");
    svd = load_svd_cache(file, gh, config.rank, config.seed);
  }
  if (!svd) {
    svd = truncated_svd(a_hat, config.rank, config.seed);
    if (cache_dir) {
      std::filesystem::create_directories(*cache_dir);
      save_svd_cache(file, *svd, gh, config.seed);
    }
  }
  return make_lowrank_inputs(make_latent_plan(std::move(*svd), ds.features, config.k_max),
                             ds.features, config.weighting);
}

DenseMatrix& EncoderParameters::tensor(std::size_t i) {
  return const_cast<DenseMatrix&>(std::as_const(*this).tensor(i));
}

const DenseMatrix& EncoderParameters::tensor(std::size_t i) const {
  switch (i) {
    case 0: return w_lp;
    case 1: return w_hp;
    case 2: return attn_lp;
    case 3: return attn_hp;
    case 4: return w_hop;
    case 5: return bank;
    case 6: return w_renorm;
    default: throw InvalidInput("parameter index out of range");
  }
}

bool EncoderParameters::all_finite() const noexcept {
  for (std::size_t i = 0; i < kTensorCount; ++i) {
    if (!tensor(i).all_finite()) return false;
  }
  return true;
}

void EncoderParameters::axpy(double scale, const EncoderParameters& other) {
  for (std::size_t i = 0; i < kTensorCount; ++i) {
    auto dst = tensor(i).values();
    auto src = other.tensor(i).values();
    if (dst.size() != src.size()) throw InvalidInput("parameter shapes differ");
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += scale * src[j];
  }
}

EncoderParameters EncoderParameters::zeros_like() const {
  EncoderParameters z;
  for (std::size_t i = 0; i < kTensorCount; ++i) {
    z.tensor(i) = DenseMatrix(tensor(i).rows(), tensor(i).cols());
  }
  return z;
}

EncoderState init_encoder(const EncoderConfig& config, std::size_t input_dim, int num_classes) {
  config.validate();
  if (input_dim == 0 || num_classes < 1) throw InvalidInput("encoder needs d >= 1 and c >= 1");
  EncoderState s;
  s.config = config;
  s.input_dim = input_dim;
  s.num_classes = num_classes;
  const std::size_t h = config.hidden;
  const auto hops = static_cast<std::size_t>(config.k_max) + 1;
  const auto c = static_cast<std::size_t>(num_classes);
  std::mt19937_64 rng(config.seed);
  auto& p = s.params;
  init_uniform(p.w_lp, input_dim, h, input_dim, rng);
  init_uniform(p.w_hp, input_dim, h, input_dim, rng);
  init_uniform(p.attn_lp, hops, h, h, rng);
  init_uniform(p.attn_hp, hops, h, h, rng);
  if (config.fusion == FusionMode::mlp) {
    init_uniform(p.w_hop, hops * h, c, hops * h, rng);
  } else {
    init_uniform(p.bank, h, c, h, rng);
  }
  if (config.weighting == Weighting::local_attention) init_uniform(p.w_renorm, h, h, h, rng);
  return s;
}

BankFusion bank_fusion(std::span<const DenseMatrix> hops, const DenseMatrix& bank,
                       double beta_class, double beta_hop) {
  if (hops.size() < 2) throw InvalidInput("bank fusion needs hop 0 and at least one more hop");
  const std::size_t n = hops[0].rows();
  const std::size_t h = hops[0].cols();
  if (bank.rows() != h) throw InvalidInput("bank rows must equal the hidden size");
  const std::size_t k_max = hops.size() - 1;
  BankFusion out;
  out.alpha_class = softmax_rows(matmul(hops[0], bank), beta_class);
  out.class_weight = matmul_nt(out.alpha_class, bank);
  DenseMatrix scores(n, k_max);
  for (std::size_t k = 1; k <= k_max; ++k) {
    for (std::size_t i = 0; i < n; ++i) scores(i, k - 1) = dot(hops[k].row(i), out.class_weight.row(i));
  }
  out.alpha_hop = softmax_rows(scores, beta_hop);
  out.fused = DenseMatrix(n, h);
  for (std::size_t k = 1; k <= k_max; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      const double a = out.alpha_hop(i, k - 1);
      auto hk = hops[k].row(i);
      auto w = out.class_weight.row(i);
      auto f = out.fused.row(i);
      for (std::size_t j = 0; j < h; ++j) f[j] += a * hk[j] * w[j];
    }
  }
  return out;
}

EmbeddingTable forward(EncoderState& state, const EncoderInputs& in, bool train,
                       std::uint64_t dropout_stream, int epoch) {
  const EncoderConfig& cfg = state.config;
  const auto& p = state.params;
  if (in.x.cols() != state.input_dim) throw InvalidInput("feature width does not match the encoder");
  if (in.k_max != cfg.k_max) {
    throw InvalidInput("inputs carry K=" + std::to_string(in.k_max) + " but the encoder expects K=" +
                       std::to_string(cfg.k_max));
  }
  if (cfg.weighting == Weighting::local_attention && in.low_rank()) {
    throw InvalidInput("local attention is unavailable on the low-rank path");
  }
  const std::size_t n = in.n();
  const std::size_t h = cfg.hidden;
  const auto hops = static_cast<std::size_t>(cfg.k_max) + 1;
  const bool local = cfg.weighting == Weighting::local_attention;
  const bool global = cfg.weighting == Weighting::global;
  const bool dropout = train && cfg.dropout > 0.0;
  std::mt19937_64 rng(splitmix(cfg.seed ^ splitmix(dropout_stream + 1)));

  ForwardCache c;
  c.z_lp = matmul(in.x, p.w_lp);
  c.z_hp = matmul(in.x, p.w_hp);
  if (local) {
    c.g = matmul_nt(c.z_lp, p.w_renorm);
    c.alpha.resize(hops);
    c.op_lp.resize(hops);
    c.op_hp.resize(hops);
  }
  c.pre_lp.resize(hops);
  c.pre_hp.resize(hops);
  c.drop_lp.resize(hops);
  c.drop_hp.resize(hops);
  c.act_lp.resize(hops);
  c.act_hp.resize(hops);
  c.gate.resize(hops);
  c.fused.resize(hops);

  for (std::size_t k = 0; k < hops; ++k) {
    DenseMatrix& lp = c.pre_lp[k];
    DenseMatrix& hp = c.pre_hp[k];
    if (k == 0) {
      lp = c.z_lp;
      hp = c.z_hp;
    } else if (in.low_rank()) {
      const DenseMatrix& u = in.plan->svd.u;
      lp = matmul(u, matmul(in.latent_blocks[k], p.w_lp));
      hp = c.z_hp - matmul(u, matmul(in.latent_blocks[k], p.w_hp));
    } else if (local) {
      const SparseMatrix& op = in.operators[k];
      c.alpha[k] = attention_coefficients(op, c.g);
      std::vector<double> rest(c.alpha[k].size());
      for (std::size_t j = 0; j < rest.size(); ++j) rest[j] = 1.0 - c.alpha[k][j];
      c.op_lp[k] = reweight_rows(op, c.alpha[k]);
      c.op_hp[k] = reweight_rows(op, rest);
      lp = c.op_lp[k].multiply(c.z_lp);
      hp = c.op_hp[k].multiply(c.z_hp);
    } else {
      lp = in.operators[k].multiply(c.z_lp);
      hp = c.z_hp - in.operators[k].multiply(c.z_hp);
    }
    if (global && k > 0) {
      lp = scale_rows(lp, in.renorm[k]);
      hp = scale_rows(hp, in.renorm[k]);
    }
    if (dropout) {
      c.drop_lp[k] = dropout_mask(n, h, cfg.dropout, rng);
      c.drop_hp[k] = dropout_mask(n, h, cfg.dropout, rng);
    }
    c.act_lp[k] = DenseMatrix(n, h);
    c.act_hp[k] = DenseMatrix(n, h);
    auto a_lp = c.act_lp[k].values();
    auto a_hp = c.act_hp[k].values();
    auto p_lp = lp.values();
    auto p_hp = hp.values();
    for (std::size_t j = 0; j < a_lp.size(); ++j) {
      a_lp[j] = p_lp[j] > 0.0 ? p_lp[j] : 0.0;
      a_hp[j] = p_hp[j] > 0.0 ? p_hp[j] : 0.0;
    }
    if (dropout) {
      auto m_lp = c.drop_lp[k].values();
      auto m_hp = c.drop_hp[k].values();
      for (std::size_t j = 0; j < a_lp.size(); ++j) {
        a_lp[j] *= m_lp[j];
        a_hp[j] *= m_hp[j];
      }
    }
    c.gate[k].resize(n);
    c.fused[k] = DenseMatrix(n, h);
    for (std::size_t i = 0; i < n; ++i) {
      const double s = dot(c.act_lp[k].row(i), p.attn_lp.row(k)) - dot(c.act_hp[k].row(i), p.attn_hp.row(k));
      const double g = sigmoid(s);
      c.gate[k][i] = g;
      auto f = c.fused[k].row(i);
      auto xl = c.act_lp[k].row(i);
      auto xh = c.act_hp[k].row(i);
      for (std::size_t j = 0; j < h; ++j) f[j] = g * xl[j] + (1.0 - g) * xh[j];
    }
  }

  if (cfg.fusion == FusionMode::bank) {
    BankFusion b = bank_fusion(c.fused, p.bank, cfg.beta_class, cfg.beta_hop);
    c.alpha_class = std::move(b.alpha_class);
    c.class_weight = std::move(b.class_weight);
    c.alpha_hop = std::move(b.alpha_hop);
    c.hidden = std::move(b.fused);
    c.logits = matmul(c.hidden, p.bank);
  } else {
    c.hidden = DenseMatrix(n, hops * h);
    for (std::size_t i = 0; i < n; ++i) {
      auto dst = c.hidden.row(i);
      for (std::size_t k = 0; k < hops; ++k) {
        auto src = c.fused[k].row(i);
        std::copy(src.begin(), src.end(), dst.begin() + static_cast<std::ptrdiff_t>(k * h));
      }
    }
    c.pre_out = matmul(c.hidden, p.w_hop);
    c.logits = c.pre_out;
    for (double& v : c.logits.values()) v = v > 0.0 ? v : 0.0;
  }
  if (!c.logits.all_finite() || !c.hidden.all_finite()) {
    throw DivergenceError("non-finite activations in the forward pass", epoch);
  }

  EmbeddingTable table{c.hidden, c.logits, row_normalized(c.hidden)};
  state.cache = std::move(c);
  return table;
}

double nll_loss(const DenseMatrix& logits, std::span<const int> labels, std::span<const char> mask) {
  check_mask(labels, mask, logits.rows());
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    if (!mask[i]) continue;
    auto row = logits.row(i);
    const double mx = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (double v : row) sum += std::exp(v - mx);
    total += mx + std::log(sum) - row[static_cast<std::size_t>(labels[i])];
    ++count;
  }
  if (count == 0) throw InvalidInput("nll_loss: empty mask");
  return total / static_cast<double>(count);
}

double masked_accuracy(const DenseMatrix& logits, std::span<const int> labels,
                       std::span<const char> mask) {
  check_mask(labels, mask, logits.rows());
  std::size_t hit = 0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    if (!mask[i]) continue;
    auto row = logits.row(i);
    const auto best = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
    hit += best == labels[i];
    ++count;
  }
  if (count == 0) throw InvalidInput("masked_accuracy: empty mask");
  return static_cast<double>(hit) / static_cast<double>(count);
}

std::vector<char> split_mask(const DataSet& ds, Split s) {
  std::vector<char> m(ds.split.size(), 0);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = ds.split[i] == s;
  return m;
}

EncoderParameters grad(const EncoderState& state, const EncoderInputs& in,
                       std::span<const int> labels, std::span<const char> mask, double loss_scale) {
  if (!state.cache) throw UsageError("grad: no forward cache; run forward first");
  const ForwardCache& c = *state.cache;
  const EncoderConfig& cfg = state.config;
  const auto& p = state.params;
  const std::size_t n = c.logits.rows();
  const std::size_t h = cfg.hidden;
  const auto hops = static_cast<std::size_t>(cfg.k_max) + 1;
  const bool local = cfg.weighting == Weighting::local_attention;
  const bool global = cfg.weighting == Weighting::global;
  if (in.n() != n) throw UsageError("grad: inputs do not match the cached forward pass");
  check_mask(labels, mask, n);

  EncoderParameters g = p.zeros_like();

  // d loss / d logits
  DenseMatrix d_logits(n, c.logits.cols());
  std::size_t count = 0;
  for (char m : mask) count += m != 0;
  if (count == 0) throw InvalidInput("grad: empty mask");
  const double scale = loss_scale / static_cast<double>(count);
  for (std::size_t i = 0; i < n; ++i) {
    if (!mask[i]) continue;
    auto row = c.logits.row(i);
    const double mx = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (double v : row) sum += std::exp(v - mx);
    for (std::size_t j = 0; j < row.size(); ++j) d_logits(i, j) = scale * std::exp(row[j] - mx) / sum;
    d_logits(i, static_cast<std::size_t>(labels[i])) -= scale;
  }

  std::vector<DenseMatrix> d_fused(hops, DenseMatrix(n, h));
  if (cfg.fusion == FusionMode::bank) {
    const std::size_t k_max = hops - 1;
    const DenseMatrix& w = c.class_weight;
    g.bank += matmul_tn(c.hidden, d_logits);
    const DenseMatrix d_hidden = matmul_nt(d_logits, p.bank);
    DenseMatrix d_alpha_hop(n, k_max);
    DenseMatrix d_w(n, h);
    for (std::size_t k = 1; k <= k_max; ++k) {
      for (std::size_t i = 0; i < n; ++i) {
        const double a = c.alpha_hop(i, k - 1);
        auto hk = c.fused[k].row(i);
        auto wi = w.row(i);
        auto df = d_hidden.row(i);
        auto dh = d_fused[k].row(i);
        auto dw = d_w.row(i);
        double da = 0.0;
        for (std::size_t j = 0; j < h; ++j) {
          da += df[j] * hk[j] * wi[j];
          dh[j] += a * df[j] * wi[j];
          dw[j] += a * df[j] * hk[j];
        }
        d_alpha_hop(i, k - 1) = da;
      }
    }
    const DenseMatrix d_scores = softmax_rows_backward(c.alpha_hop, d_alpha_hop, cfg.beta_hop);
    for (std::size_t k = 1; k <= k_max; ++k) {
      for (std::size_t i = 0; i < n; ++i) {
        const double ds = d_scores(i, k - 1);
        auto hk = c.fused[k].row(i);
        auto wi = w.row(i);
        auto dh = d_fused[k].row(i);
        auto dw = d_w.row(i);
        for (std::size_t j = 0; j < h; ++j) {
          dh[j] += ds * wi[j];
          dw[j] += ds * hk[j];
        }
      }
    }
    // w = alpha_class P^T
    g.bank += matmul_tn(d_w, c.alpha_class);
    const DenseMatrix d_alpha_class = matmul(d_w, p.bank);
    const DenseMatrix d_u = softmax_rows_backward(c.alpha_class, d_alpha_class, cfg.beta_class);
    // u = H0 P; the temperature already sits inside d_u.
    g.bank += matmul_tn(c.fused[0], d_u);
    d_fused[0] += matmul_nt(d_u, p.bank);
  } else {
    DenseMatrix d_pre = d_logits;
    auto dp = d_pre.values();
    auto pre = c.pre_out.values();
    for (std::size_t j = 0; j < dp.size(); ++j) {
      if (!(pre[j] > 0.0)) dp[j] = 0.0;
    }
    g.w_hop = matmul_tn(c.hidden, d_pre);
    const DenseMatrix d_concat = matmul_nt(d_pre, p.w_hop);
    for (std::size_t i = 0; i < n; ++i) {
      auto src = d_concat.row(i);
      for (std::size_t k = 0; k < hops; ++k) {
        auto dst = d_fused[k].row(i);
        std::copy(src.begin() + static_cast<std::ptrdiff_t>(k * h),
                  src.begin() + static_cast<std::ptrdiff_t>((k + 1) * h), dst.begin());
      }
    }
  }

  DenseMatrix d_zlp(n, h);
  DenseMatrix d_zhp(n, h);
  DenseMatrix d_g;
  if (local) d_g = DenseMatrix(n, h);

  for (std::size_t k = 0; k < hops; ++k) {
    // frequency gate
    DenseMatrix d_lp(n, h);
    DenseMatrix d_hp(n, h);
    auto a_lp_k = p.attn_lp.row(k);
    auto a_hp_k = p.attn_hp.row(k);
    auto ga_lp = g.attn_lp.row(k);
    auto ga_hp = g.attn_hp.row(k);
    for (std::size_t i = 0; i < n; ++i) {
      const double gate = c.gate[k][i];
      auto dh = d_fused[k].row(i);
      auto xl = c.act_lp[k].row(i);
      auto xh = c.act_hp[k].row(i);
      double d_gate = 0.0;
      for (std::size_t j = 0; j < h; ++j) d_gate += dh[j] * (xl[j] - xh[j]);
      const double dt = d_gate * gate * (1.0 - gate);
      auto dl = d_lp.row(i);
      auto dhp = d_hp.row(i);
      for (std::size_t j = 0; j < h; ++j) {
        dl[j] = gate * dh[j] + dt * a_lp_k[j];
        dhp[j] = (1.0 - gate) * dh[j] - dt * a_hp_k[j];
        ga_lp[j] += dt * xl[j];
        ga_hp[j] -= dt * xh[j];
      }
    }
    // dropout and ReLU
    {
      auto dl = d_lp.values();
      auto dhp = d_hp.values();
      auto pl = c.pre_lp[k].values();
      auto ph = c.pre_hp[k].values();
      const bool dropped = !c.drop_lp[k].empty();
      for (std::size_t j = 0; j < dl.size(); ++j) {
        dl[j] = pl[j] > 0.0 ? dl[j] * (dropped ? c.drop_lp[k].values()[j] : 1.0) : 0.0;
        dhp[j] = ph[j] > 0.0 ? dhp[j] * (dropped ? c.drop_hp[k].values()[j] : 1.0) : 0.0;
      }
    }
    if (global && k > 0) {
      d_lp = scale_rows(d_lp, in.renorm[k]);
      d_hp = scale_rows(d_hp, in.renorm[k]);
    }
    // propagation
    if (k == 0) {
      d_zlp += d_lp;
      d_zhp += d_hp;
    } else if (in.low_rank()) {
      const DenseMatrix& u = in.plan->svd.u;
      const DenseMatrix& blk = in.latent_blocks[k];
      g.w_lp += matmul_tn(blk, matmul_tn(u, d_lp));
      g.w_hp -= matmul_tn(blk, matmul_tn(u, d_hp));
      d_zhp += d_hp;
    } else if (local) {
      const SparseMatrix& op = in.operators[k];
      d_zlp += c.op_lp[k].multiply_transposed(d_lp);
      d_zhp += c.op_hp[k].multiply_transposed(d_hp);
      const auto d_nlp = pattern_gradient(op, d_lp, c.z_lp);
      const auto d_nhp = pattern_gradient(op, d_hp, c.z_hp);
      std::vector<double> rest(c.alpha[k].size());
      for (std::size_t j = 0; j < rest.size(); ++j) rest[j] = 1.0 - c.alpha[k][j];
      const auto d_blp = row_normalize_backward(op, c.alpha[k], c.op_lp[k], d_nlp);
      const auto d_bhp = row_normalize_backward(op, rest, c.op_hp[k], d_nhp);
      const auto offsets = op.row_offsets();
      const auto cols = op.col_indices();
      const auto vals = op.values();
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t q = offsets[i]; q < offsets[i + 1]; ++q) {
          const double a = c.alpha[k][q];
          const double d_logit = vals[q] * (d_blp[q] - d_bhp[q]) * a * (1.0 - a);
          if (d_logit == 0.0) continue;
          const std::size_t jn = cols[q];
          auto gi = c.g.row(i);
          auto gj = c.g.row(jn);
          auto dgi = d_g.row(i);
          auto dgj = d_g.row(jn);
          for (std::size_t t = 0; t < h; ++t) {
            dgi[t] += d_logit * gj[t];
            dgj[t] += d_logit * gi[t];
          }
        }
      }
    } else {
      const SparseMatrix& op = in.operators[k];
      d_zlp += op.multiply_transposed(d_lp);
      d_zhp += d_hp;
      d_zhp -= op.multiply_transposed(d_hp);
    }
  }

  if (local) {
    // G = Z_lp W^T
    g.w_renorm = matmul_tn(d_g, c.z_lp);
    d_zlp += matmul(d_g, p.w_renorm);
  }
  g.w_lp += matmul_tn(in.x, d_zlp);
  g.w_hp += matmul_tn(in.x, d_zhp);
  return g;
}

}  // namespace adaptcs
