#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace adaptcs {

struct LadderOptions {
  std::vector<std::size_t> sizes = {1000, 3000, 10000, 30000, 100000};
  std::size_t avg_degree = 20;  // m = n * avg_degree / 2
  std::size_t dim = 128;
  std::size_t clusters = 10;
  double noise = 0.02;
  double tau_sign = 0.9;
  std::size_t community_size = 150;
  std::size_t queries = 20;
  std::uint64_t seed = 11;
};

struct LadderPoint {
  std::size_t n = 0;
  std::size_t m = 0;
  double scs_median_s = 0.0;
  double scs_max_s = 0.0;
  double acs_median_s = 0.0;
  double acs_max_s = 0.0;
  double mean_teleports = 0.0;
};

/// Per-query SCS/ACS latency on random graphs with clustered embeddings. Positive
/// graph construction is offline work and is not timed.
std::vector<LadderPoint> run_query_ladder(const LadderOptions& options);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace adaptcs
