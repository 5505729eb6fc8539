#include "adaptcs/ladder.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "adaptcs/errors.hpp"
#include "adaptcs/generators.hpp"
#include "adaptcs/metrics.hpp"
#include "adaptcs/search.hpp"

namespace adaptcs {

std::vector<LadderPoint> run_query_ladder(const LadderOptions& o) {
  std::vector<LadderPoint> out;
  for (std::size_t n : o.sizes) {
    const std::size_t m = n * o.avg_degree / 2;
    const Graph g = random_sparse_graph(n, m, o.seed + n);
    const DenseMatrix unit =
        row_normalized(clustered_embeddings(n, o.dim, o.clusters, o.noise, o.seed * 31 + n));
    SearchConfig cfg;
    cfg.tau_sign = o.tau_sign;
    cfg.community_size = o.community_size;
    const CommunitySearcher searcher(g, unit, cfg, 0.5);
    std::mt19937_64 rng(o.seed ^ n);
    std::vector<double> scs_t;
    std::vector<double> acs_t;
    double teleports = 0.0;
    for (std::size_t i = 0; i < o.queries; ++i) {
      const auto q = static_cast<NodeId>(rng() % n);
      const CommunityResult s = searcher.scs(q);
      const CommunityResult a = searcher.acs(q);
      scs_t.push_back(s.elapsed_s);
      acs_t.push_back(a.elapsed_s);
      teleports += static_cast<double>(s.teleports);
    }
    LadderPoint p;
    p.n = n;
    p.m = g.m();
    p.scs_median_s = percentile(scs_t, 50.0);
    p.scs_max_s = *std::max_element(scs_t.begin(), scs_t.end());
    p.acs_median_s = percentile(acs_t, 50.0);
    p.acs_max_s = *std::max_element(acs_t.begin(), acs_t.end());
    p.mean_teleports = teleports / static_cast<double>(o.queries);
    out.push_back(p);
  }
  return out;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidInput("slope needs >= 2 paired points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const auto n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw InvalidInput("slope needs positive values");
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) throw InvalidInput("slope needs distinct x values");
  return (n * sxy - sx * sy) / den;
}

}  // namespace adaptcs
