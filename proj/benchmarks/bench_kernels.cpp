#include <benchmark/benchmark.h>

#include <random>

#include "adaptcs/generators.hpp"
#include "adaptcs/hop_channels.hpp"
#include "adaptcs/search.hpp"
#include "adaptcs/sparse_matrix.hpp"

using namespace adaptcs;

static void BM_SpGEMM(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Graph g = random_sparse_graph(n, n * 5, 3);
  const SparseMatrix a = sym_normalize(g.adjacency());
  for (auto _ : state) benchmark::DoNotOptimize(spgemm(a, a));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SpGEMM)->RangeMultiplier(4)->Range(1 << 10, 1 << 16)->Complexity();

static void BM_AdaptiveMask(benchmark::State& state) {
  const Graph g = random_sparse_graph(static_cast<std::size_t>(state.range(0)), 4 * state.range(0), 5);
  const SparseMatrix a = sym_normalize(g.adjacency());
  for (auto _ : state) benchmark::DoNotOptimize(adaptive_mask_channels(a, 3, kDefaultNnzBudget));
}
BENCHMARK(BM_AdaptiveMask)->Arg(1000)->Arg(4000);

namespace {

struct SearchFixture {
  Graph g;
  DenseMatrix unit;
  SearchConfig cfg;

  explicit SearchFixture(std::size_t n)
      : g(random_sparse_graph(n, n * 10, 7)), unit(row_normalized(clustered_embeddings(n, 128, 10, 0.02, 9))) {
    cfg.community_size = 150;
  }
};

}  // namespace

static void BM_SCS(benchmark::State& state) {
  const SearchFixture f(static_cast<std::size_t>(state.range(0)));
  const CommunitySearcher s(f.g, f.unit, f.cfg, 0.5);
  std::mt19937_64 rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(s.scs(static_cast<NodeId>(rng() % f.g.n())));
}
BENCHMARK(BM_SCS)->Arg(10000)->Arg(100000)->Unit(benchmark::kMicrosecond);

static void BM_ACS(benchmark::State& state) {
  const SearchFixture f(static_cast<std::size_t>(state.range(0)));
  const CommunitySearcher s(f.g, f.unit, f.cfg, 0.2);
  std::mt19937_64 rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(s.acs(static_cast<NodeId>(rng() % f.g.n())));
}
BENCHMARK(BM_ACS)->Arg(10000)->Arg(100000)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
