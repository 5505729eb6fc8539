#include "adaptcs/theory.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "adaptcs/encoder.hpp"
#include "adaptcs/errors.hpp"
#include "adaptcs/metrics.hpp"

namespace adaptcs {
namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

void write_csv(const std::filesystem::path& path, const DenseMatrix& m) {
  std::ofstream out(path);
  out.precision(10);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) out << (j ? "," : "") << m(i, j);
    out << '\n';
  }
  if (!out) throw ValidationError("cannot write " + path.string());
}

}  // namespace

std::size_t TheoryReport::violations() const noexcept {
  std::size_t v = 0;
  for (const auto& c : checks) v += !c.passed;
  return v;
}

std::string TheoryReport::to_json() const {
  nlohmann::json j;
  j["violations"] = violations();
  j["checks"] = nlohmann::json::array();
  for (const auto& c : checks) {
    j["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  }
  return j.dump(2);
}

DenseMatrix laplacian_similarity(const Graph& g, std::span<const int> labels, int num_classes) {
  if (labels.size() != g.n()) throw InvalidInput("labels do not cover the graph");
  const auto c = static_cast<std::size_t>(num_classes);
  DenseMatrix lx(g.n(), c);
  for (NodeId u = 0; u < g.n(); ++u) {
    lx(u, static_cast<std::size_t>(labels[u])) += static_cast<double>(g.degree(u));
    for (NodeId v : g.neighbors(u)) lx(u, static_cast<std::size_t>(labels[v])) -= 1.0;
  }
  return matmul_nt(lx, lx);
}

ToyGraph binary_flip_toy(std::size_t per_class) {
  ToyGraph t;
  t.num_classes = 2;
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId u = 0; u < per_class; ++u) {
    for (NodeId v = 0; v < per_class; ++v) edges.emplace_back(u, static_cast<NodeId>(per_class + v));
  }
  t.graph = Graph::from_edges(2 * per_class, edges);
  for (std::size_t u = 0; u < 2 * per_class; ++u) t.labels.push_back(u < per_class ? 0 : 1);
  return t;
}

ToyGraph cycle_flip_toy(int num_classes, std::size_t per_class) {
  if (num_classes < 3) throw InvalidInput("cycle toy needs at least 3 classes");
  ToyGraph t;
  t.num_classes = num_classes;
  const auto c = static_cast<std::size_t>(num_classes);
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (std::size_t a = 0; a < c; ++a) {
    const std::size_t b = (a + 1) % c;
    for (std::size_t i = 0; i < per_class; ++i) {
      for (std::size_t j = 0; j < per_class; ++j) {
        edges.emplace_back(static_cast<NodeId>(a * per_class + i), static_cast<NodeId>(b * per_class + j));
      }
    }
  }
  t.graph = Graph::from_edges(c * per_class, edges);
  for (std::size_t u = 0; u < c * per_class; ++u) t.labels.push_back(static_cast<int>(u / per_class));
  return t;
}

DataSet toy_dataset(const ToyGraph& toy, std::uint64_t seed) {
  DataSet ds;
  ds.graph = toy.graph;
  ds.labels = toy.labels;
  ds.num_classes = toy.num_classes;
  ds.features = DenseMatrix(toy.graph.n(), static_cast<std::size_t>(toy.num_classes));
  for (std::size_t u = 0; u < toy.graph.n(); ++u) ds.features(u, static_cast<std::size_t>(toy.labels[u])) = 1.0;
  ds.split = stratified_split(ds.labels, ds.num_classes, seed);
  return ds;
}

FlipSummary summarize_flip(const DenseMatrix& s, std::span<const int> labels) {
  FlipSummary f;
  f.max_inter = -INFINITY;
  f.min_intra = INFINITY;
  for (std::size_t i = 0; i < s.rows(); ++i) {
    for (std::size_t j = 0; j < s.cols(); ++j) {
      if (labels[i] == labels[j]) {
        f.min_intra = std::min(f.min_intra, s(i, j));
      } else {
        f.max_inter = std::max(f.max_inter, s(i, j));
        f.positive_inter += s(i, j) > 0.0;
      }
    }
  }
  return f;
}

std::vector<TheoryCheck> flip_effect_demo(const std::optional<std::filesystem::path>& csv_dir,
                                          std::uint64_t seed) {
  std::vector<TheoryCheck> out;
  const ToyGraph binary = binary_flip_toy();
  const ToyGraph cycle = cycle_flip_toy();
  const DenseMatrix s2 = laplacian_similarity(binary.graph, binary.labels, binary.num_classes);
  const DenseMatrix s4 = laplacian_similarity(cycle.graph, cycle.labels, cycle.num_classes);
  if (csv_dir) {
    std::filesystem::create_directories(*csv_dir);
    write_csv(*csv_dir / "flip_binary.csv", s2);
    write_csv(*csv_dir / "flip_cycle4.csv", s4);
  }
  const FlipSummary f2 = summarize_flip(s2, binary.labels);
  out.push_back({"flip.binary_separation", f2.max_inter <= 0.0 && f2.min_intra >= 0.0,
                 "max inter " + fmt(f2.max_inter) + ", min intra " + fmt(f2.min_intra)});
  const FlipSummary f4 = summarize_flip(s4, cycle.labels);
  out.push_back({"flip.multiclass_flip", f4.positive_inter >= 1,
                 std::to_string(f4.positive_inter) + " positive cross-class entries, max " +
                     fmt(f4.max_inter)});

  const DataSet ds = toy_dataset(cycle, seed);
  EncoderConfig cfg;
  cfg.k_max = 2;
  cfg.hidden = 16;
  cfg.dropout = 0.0;
  cfg.seed = seed;
  const TrainResult trained = train(ds, cfg);
  const double hnd = hnd_metric(trained.embeddings.hidden, ds.labels);
  out.push_back({"flip.encoder_hnd", hnd == 1.0, "HND " + fmt(hnd) + " on the 4-class cycle toy"});
  return out;
}

TheoryCheck hop_separation_check() {
  constexpr std::size_t kClasses = 4;
  constexpr std::size_t kPerClass = 2;
  constexpr double kScale = 3.0;
  constexpr double kMargin = 0.5;
  const std::size_t n = kClasses * kPerClass;
  std::vector<int> labels(n);
  DenseMatrix bank(kClasses, kClasses);
  for (std::size_t c = 0; c < kClasses; ++c) bank(c, c) = kScale;
  std::vector<DenseMatrix> hops(3, DenseMatrix(n, kClasses));
  for (std::size_t u = 0; u < n; ++u) {
    const std::size_t y = u / kPerClass;
    labels[u] = static_cast<int>(y);
    hops[0](u, y) = 1.0;
    hops[1](u, (y + 1) % kClasses) = 1.0;
    hops[2](u, y) = 1.0 + kMargin;
    // Small per-node perturbation so nodes are not exact copies.
    hops[2](u, (y + 2) % kClasses) = 0.05 * static_cast<double>(u % kPerClass);
  }
  const BankFusion cool = bank_fusion(hops, bank, 1.0, 1.0);
  const BankFusion hot = bank_fusion(hops, bank, 1.0, 10.0);
  std::size_t raised = 0;
  for (std::size_t u = 0; u < n; ++u) raised += hot.alpha_hop(u, 1) > cool.alpha_hop(u, 1);
  const double hnd = hnd_metric(hot.fused, labels);
  TheoryCheck c;
  c.name = "hop_separation.bank";
  c.passed = raised == n && hnd == 1.0;
  c.detail = std::to_string(raised) + "/" + std::to_string(n) +
             " nodes raise the hop-2 weight under 10x temperature; fused HND " + fmt(hnd);
  return c;
}

TheoryCheck triangle_audit_check(const std::string& name, const Graph& g, bool require_support_shift) {
  const TriangleAuditReport rep = triangle_support_audit(g, sym_normalize(g.adjacency()));
  TheoryCheck c;
  c.name = "triangle_audit." + name;
  const bool shift = rep.mean_retained_support() > rep.mean_dropped_support();
  c.passed = rep.violations == 0 && (!require_support_shift || (rep.retained > 0 && shift));
  c.detail = std::to_string(rep.violations) + " violations over " + std::to_string(rep.retained) +
             " retained of " + std::to_string(rep.edges) + " edges; mean support retained " +
             fmt(rep.mean_retained_support()) + " vs dropped " + fmt(rep.mean_dropped_support());
  return c;
}

}  // namespace adaptcs
