#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "adaptcs/dataset.hpp"
#include "adaptcs/encoder.hpp"
#include "adaptcs/metrics.hpp"
#include "adaptcs/search.hpp"
#include "adaptcs/theory.hpp"

namespace adaptcs {

inline constexpr const char* kMethodAcs = "adaptcs-acs";
inline constexpr const char* kMethodScs = "adaptcs-scs";
inline constexpr const char* kMethodCore = "k-core";
inline constexpr const char* kMethodTruss = "k-truss";
inline constexpr const char* kMethodLp = "lp";

struct ExperimentConfig {
  std::string name;                  // report label; defaults to the dataset folder name
  std::filesystem::path dataset;     // directory in any supported layout
  std::filesystem::path graph;       // or the three native files
  std::filesystem::path features;
  std::filesystem::path labels;
  std::uint64_t seed = 42;
  EncoderConfig encoder;
  SearchConfig search;
  std::size_t n_queries = 50;
  std::vector<std::string> methods = {kMethodAcs, kMethodScs, kMethodCore, kMethodTruss, kMethodLp};
  bool normalize_features = true;
  int lp_iterations = 50;
  std::optional<std::filesystem::path> checkpoint;  // use stored embeddings instead of training
  std::optional<std::filesystem::path> cache_dir;

  /// Checks value ranges, method names and that referenced paths exist.
  void validate() const;
};

struct MethodReport {
  std::string method;
  Summary f1;
  Summary latency;
  std::vector<double> f1_values;
  std::vector<double> latencies;
};

struct QueryRow {
  NodeId query = 0;
  std::string method;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t size = 0;
  std::size_t teleports = 0;
  double elapsed_s = 0.0;
};

struct Report {
  std::string dataset;
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t d = 0;
  int c = 0;
  double homophily = 0.0;
  double estimated_homophily = 0.5;
  bool homophily_fallback = false;
  double training_seconds = 0.0;
  int epochs_run = 0;
  double final_train_loss = 0.0;
  std::string config_echo;
  std::vector<NodeId> queries;
  std::vector<MethodReport> methods;
  std::vector<QueryRow> rows;
  std::vector<TheoryCheck> theory;

  std::size_t violations() const noexcept;
  const MethodReport* method(const std::string& name) const noexcept;
  /// Timing fields (latencies, elapsed, training time) are dropped when include_timing
  /// is false, which makes reports from identical seeds byte-identical.
  std::string to_json(bool include_timing = true) const;
  std::string to_csv(bool include_timing = true) const;
};

/// n seeded draws without replacement from the test split (all of it when smaller).
std::vector<NodeId> sample_queries(const DataSet& ds, std::size_t n, std::uint64_t seed);

DataSet load_experiment_dataset(const ExperimentConfig& config);

/// Loads, trains (or reads the checkpoint), samples queries and runs every method.
Report run_experiment(const ExperimentConfig& config);

/// Same on an already loaded dataset. When `embeddings` is given, training is skipped
/// and those rows are used for AdaptCS search.
Report run_experiment(const DataSet& ds, const ExperimentConfig& config,
                      const DenseMatrix* embeddings = nullptr);

}  // namespace adaptcs
