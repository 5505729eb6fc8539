#include "adaptcs/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <random>
#include <sstream>

#include "adaptcs/baselines.hpp"
#include "adaptcs/checkpoint.hpp"
#include "adaptcs/config.hpp"
#include "adaptcs/errors.hpp"
#include "json.hpp"

namespace adaptcs {
namespace {

using Clock = std::chrono::steady_clock;

bool known_method(const std::string& m) {
  return m == kMethodAcs || m == kMethodScs || m == kMethodCore || m == kMethodTruss || m == kMethodLp;
}

// Runs fn, rethrowing library errors tagged with the stage name.
template <typename Fn>
auto staged(const char* stage, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e.what());
  }
}

nlohmann::json summary_json(const Summary& s) {
  return {{"mean", s.mean}, {"std", s.stddev}, {"p50", s.p50}, {"p95", s.p95}, {"max", s.max}};
}

}  // namespace

void ExperimentConfig::validate() const {
  encoder.validate();
  search.validate();
  if (n_queries == 0) throw InvalidInput("n_queries must be positive");
  if (lp_iterations < 0) throw InvalidInput("lp_iterations must be >= 0");
  if (methods.empty()) throw InvalidInput("no methods configured");
  for (const auto& m : methods) {
    if (!known_method(m)) {
      throw InvalidInput("unknown method '" + m + "' (adaptcs-acs, adaptcs-scs, k-core, k-truss, lp)");
    }
  }
  auto must_exist = [](const std::filesystem::path& p, const char* what) {
    if (!std::filesystem::exists(p)) throw ValidationError(std::string(what) + " not found: " + p.string());
  };
  if (!dataset.empty()) {
    must_exist(dataset, "dataset directory");
  } else {
    if (graph.empty() || features.empty() || labels.empty()) {
      throw ValidationError("set dataset=<dir> or all of graph=, features=, labels=");
    }
    must_exist(graph, "graph file");
    must_exist(features, "features file");
    must_exist(labels, "labels file");
  }
  if (checkpoint) must_exist(*checkpoint, "checkpoint");
}

std::size_t Report::violations() const noexcept {
  std::size_t v = 0;
  for (const auto& t : theory) v += !t.passed;
  return v;
}

const MethodReport* Report::method(const std::string& name) const noexcept {
  for (const auto& m : methods) {
    if (m.method == name) return &m;
  }
  return nullptr;
}

std::string Report::to_json(bool include_timing) const {
  nlohmann::ordered_json j;
  j["dataset"] = dataset;
  j["n"] = n;
  j["m"] = m;
  j["d"] = d;
  j["c"] = c;
  j["edge_homophily"] = homophily;
  j["estimated_homophily"] = estimated_homophily;
  j["homophily_fallback"] = homophily_fallback;
  j["epochs_run"] = epochs_run;
  j["final_train_loss"] = final_train_loss;
  if (include_timing) j["training_seconds"] = training_seconds;
  j["queries"] = queries;
  auto& ms = j["methods"] = nlohmann::ordered_json::array();
  for (const auto& mr : methods) {
    nlohmann::ordered_json row;
    row["method"] = mr.method;
    row["f1_mean"] = mr.f1.mean;
    row["f1_std"] = mr.f1.stddev;
    if (include_timing) row["latency_s"] = summary_json(mr.latency);
    ms.push_back(std::move(row));
  }
  auto& th = j["theory"] = nlohmann::ordered_json::array();
  for (const auto& t : theory) th.push_back({{"name", t.name}, {"passed", t.passed}, {"detail", t.detail}});
  j["violations"] = violations();
  j["config"] = config_echo;
  return j.dump(2);
}

std::string Report::to_csv(bool include_timing) const {
  std::ostringstream os;
  os.precision(10);
  os << "query,method,size,precision,recall,f1,teleports";
  if (include_timing) os << ",elapsed_s";
  os << '\n';
  for (const auto& r : rows) {
    os << r.query << ',' << r.method << ',' << r.size << ',' << r.precision << ',' << r.recall << ','
       << r.f1 << ',' << r.teleports;
    if (include_timing) os << ',' << r.elapsed_s;
    os << '\n';
  }
  return os.str();
}

std::vector<NodeId> sample_queries(const DataSet& ds, std::size_t n, std::uint64_t seed) {
  std::vector<NodeId> test = ds.nodes_in(Split::test);
  std::mt19937_64 rng(seed ^ 0x9d7d1c2a3b4e5f60ULL);
  std::shuffle(test.begin(), test.end(), rng);
  if (test.size() > n) test.resize(n);
  return test;
}

DataSet load_experiment_dataset(const ExperimentConfig& config) {
  return staged("load", [&] {
    DataSet ds = config.dataset.empty()
                     ? load_dataset(config.graph, config.features, config.labels, config.seed)
                     : load_dataset_dir(config.dataset, config.seed);
    if (config.normalize_features) normalize_feature_rows(ds);
    return ds;
  });
}

Report run_experiment(const ExperimentConfig& config) {
  staged("config", [&] {
    config.validate();
    return 0;
  });
  const DataSet ds = load_experiment_dataset(config);
  ExperimentConfig named = config;
  if (named.name.empty()) {
    const auto& p = config.dataset.empty() ? config.graph.parent_path() : config.dataset;
    named.name = p.filename().string();
  }
  return run_experiment(ds, named, nullptr);
}

Report run_experiment(const DataSet& ds, const ExperimentConfig& config, const DenseMatrix* embeddings) {
  staged("config", [&] {
    config.encoder.validate();
    config.search.validate();
    return 0;
  });
  Report rep;
  rep.dataset = config.name;
  rep.n = ds.graph.n();
  rep.m = ds.graph.m();
  rep.d = ds.features.cols();
  rep.c = ds.num_classes;
  rep.homophily = ds.graph.m() > 0 ? edge_homophily(ds.graph, ds.labels) : 0.0;
  rep.config_echo = config_echo(config);

  const bool wants_adaptcs =
      std::any_of(config.methods.begin(), config.methods.end(),
                  [](const std::string& m) { return m == kMethodAcs || m == kMethodScs; });
  DenseMatrix unit;
  if (wants_adaptcs) {
    if (embeddings) {
      unit = row_normalized(*embeddings);
    } else if (config.checkpoint) {
      Checkpoint ck = staged("checkpoint", [&] { return load_checkpoint(*config.checkpoint); });
      if (ck.dataset_hash != ds.hash()) {
        throw StageError("checkpoint", "checkpoint was trained on a different dataset");
      }
      unit = std::move(ck.unit_hidden);
      rep.epochs_run = ck.epochs_run;
      rep.final_train_loss = ck.train_losses.empty() ? 0.0 : ck.train_losses.back();
    } else {
      const auto start = Clock::now();
      TrainResult trained = staged("train", [&] {
        const EncoderInputs inputs = prepare_inputs(ds, config.encoder, config.cache_dir);
        return train(ds, inputs, config.encoder);
      });
      rep.training_seconds = std::chrono::duration<double>(Clock::now() - start).count();
      rep.epochs_run = trained.epochs_run;
      rep.final_train_loss = trained.train_losses.empty() ? 0.0 : trained.train_losses.back();
      unit = std::move(trained.embeddings.unit_hidden);
    }
  }

  const HomophilyEstimate est = estimate_homophily(ds.graph, ds);
  rep.estimated_homophily = est.value;
  rep.homophily_fallback = est.fallback;
  rep.queries = sample_queries(ds, config.n_queries, config.seed);
  if (rep.queries.empty()) throw StageError("sample", "test split is empty");

  std::optional<CommunitySearcher> searcher;
  std::vector<int> core;
  std::vector<int> truss;
  std::optional<LabelPropagation> lp;
  staged("search", [&] {
    for (const auto& m : config.methods) {
      if ((m == kMethodAcs || m == kMethodScs) && !searcher) searcher.emplace(ds.graph, unit, config.search, est.value);
      if (m == kMethodCore) core = core_numbers(ds.graph);
      if (m == kMethodTruss) truss = truss_numbers(ds.graph);
      if (m == kMethodLp) lp.emplace(ds, config.lp_iterations);
    }
    return 0;
  });

  // Baselines take a total size; pass K + 1 so every method returns q plus K others.
  const std::size_t total = config.search.community_size + 1;
  for (const auto& m : config.methods) {
    MethodReport mr;
    mr.method = m;
    for (NodeId q : rep.queries) {
      CommunityResult res = staged("search", [&] {
        if (m == kMethodAcs) return searcher->acs(q);
        if (m == kMethodScs) return searcher->scs(q);
        if (m == kMethodCore) return k_core_community(ds.graph, core, q, total);
        if (m == kMethodTruss) return k_truss_community(ds.graph, truss, q, total);
        return lp->community(q, total);
      });
      const F1Score s = community_f1(res.members, ds.labels, q);
      rep.rows.push_back({q, m, s.precision, s.recall, s.f1, res.members.size(), res.teleports, res.elapsed_s});
      mr.f1_values.push_back(s.f1);
      mr.latencies.push_back(res.elapsed_s);
    }
    mr.f1 = summarize(mr.f1_values);
    mr.latency = summarize(mr.latencies);
    rep.methods.push_back(std::move(mr));
  }

  if (ds.graph.m() > 0) {
    rep.theory.push_back(staged("theory", [&] {
      return triangle_audit_check(config.name.empty() ? "dataset" : config.name, ds.graph, false);
    }));
  }
  return rep;
}

}  // namespace adaptcs
