// adaptcs: ingest, train, search, eval, theory and bench from the command line.
//
// Exit codes: 0 success with zero theory violations, 1 theory violations,
// 2 usage or configuration errors, 3 data or runtime errors.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "adaptcs/checkpoint.hpp"
#include "adaptcs/config.hpp"
#include "adaptcs/errors.hpp"
#include "adaptcs/experiment.hpp"
#include "adaptcs/generators.hpp"
#include "adaptcs/ladder.hpp"
#include "adaptcs/search.hpp"
#include "adaptcs/theory.hpp"

namespace fs = std::filesystem;
using namespace adaptcs;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitViolations = 1;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

struct ConfigArgs {
  std::string file;
  std::vector<std::string> overrides;
};

void add_config_options(CLI::App* cmd, ConfigArgs& args) {
  cmd->add_option("-c,--config", args.file, "key=value config file")->check(CLI::ExistingFile);
  cmd->add_option("--set", args.overrides, "override one setting, key=value (repeatable)");
}

// Bad values and missing paths are configuration errors (exit 2), not runtime ones.
ExperimentConfig resolve_config(const ConfigArgs& args) {
  ExperimentConfig cfg;
  try {
    if (!args.file.empty()) apply_settings(cfg, read_key_values(args.file));
    for (const auto& kv : args.overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
      apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    cfg.validate();
  } catch (const InvalidInput& e) {
    throw UsageError(e.what());
  } catch (const ParseError& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  if (const auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

std::vector<NodeId> parse_ids(const std::string& list) {
  std::vector<NodeId> ids;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    const unsigned long v = std::stoul(item, &used);
    if (used != item.size()) throw UsageError("bad query id '" + item + "'");
    ids.push_back(static_cast<NodeId>(v));
  }
  return ids;
}

int cmd_ingest(const ExperimentConfig& cfg, const std::string& out_dir) {
  const DataSet ds = load_experiment_dataset(cfg);
  if (!out_dir.empty()) {
    DataSet raw = cfg.dataset.empty() ? load_dataset(cfg.graph, cfg.features, cfg.labels, cfg.seed)
                                      : load_dataset_dir(cfg.dataset, cfg.seed);
    write_native_dataset(raw, out_dir);
  }
  if (cfg.cache_dir) prepare_inputs(ds, cfg.encoder, cfg.cache_dir);
  json j;
  j["n"] = ds.graph.n();
  j["m"] = ds.graph.m();
  j["d"] = ds.features.cols();
  j["c"] = ds.num_classes;
  j["dropped_self_loops"] = ds.dropped_self_loops;
  j["edge_homophily"] = ds.graph.m() > 0 ? edge_homophily(ds.graph, ds.labels) : 0.0;
  j["train"] = ds.nodes_in(Split::train).size();
  j["val"] = ds.nodes_in(Split::val).size();
  j["test"] = ds.nodes_in(Split::test).size();
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(ds.hash()));
  j["dataset_hash"] = hex;
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_train(const ExperimentConfig& cfg, const std::string& out) {
  const DataSet ds = load_experiment_dataset(cfg);
  const EncoderInputs inputs = prepare_inputs(ds, cfg.encoder, cfg.cache_dir);
  const TrainResult trained = train(ds, inputs, cfg.encoder);
  save_checkpoint(out, make_checkpoint(trained, ds.hash(), config_echo(cfg)));
  json j;
  j["checkpoint"] = out;
  j["epochs_run"] = trained.epochs_run;
  j["best_epoch"] = trained.best_epoch;
  j["final_train_loss"] = trained.train_losses.empty() ? 0.0 : trained.train_losses.back();
  j["best_val_accuracy"] =
      trained.best_epoch >= 0 && static_cast<std::size_t>(trained.best_epoch) < trained.val_accuracy.size()
          ? trained.val_accuracy[static_cast<std::size_t>(trained.best_epoch)]
          : 0.0;
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_search(const ExperimentConfig& cfg, const std::string& ckpt_path, const std::string& queries,
               const std::string& algorithm, const std::string& out) {
  const DataSet ds = load_experiment_dataset(cfg);
  DenseMatrix unit;
  if (!ckpt_path.empty()) {
    Checkpoint ck = load_checkpoint(ckpt_path);
    if (ck.dataset_hash != ds.hash()) throw ValidationError("checkpoint was trained on a different dataset");
    unit = std::move(ck.unit_hidden);
  } else {
    const EncoderInputs inputs = prepare_inputs(ds, cfg.encoder, cfg.cache_dir);
    unit = train(ds, inputs, cfg.encoder).embeddings.unit_hidden;
  }
  std::vector<NodeId> qs = queries.empty() ? sample_queries(ds, cfg.n_queries, cfg.seed) : parse_ids(queries);
  for (NodeId q : qs) {
    if (q >= ds.graph.n()) throw InvalidInput("query " + std::to_string(q) + " is not a node id");
  }
  const HomophilyEstimate est = estimate_homophily(ds.graph, ds);
  const CommunitySearcher searcher(ds.graph, unit, cfg.search, est.value);
  std::ostringstream os;
  auto emit = [&](const CommunityResult& r) {
    json j;
    j["query"] = r.query;
    j["members"] = r.members;
    j["scores"] = r.scores;
    j["algorithm"] = r.algorithm;
    j["elapsed_s"] = r.elapsed_s;
    j["teleports"] = r.teleports;
    os << j.dump() << '\n';
  };
  for (NodeId q : qs) {
    if (algorithm == "acs" || algorithm == "both") emit(searcher.acs(q));
    if (algorithm == "scs" || algorithm == "both") emit(searcher.scs(q));
  }
  write_text(out, os.str());
  return 0;
}

int cmd_eval(const ExperimentConfig& cfg, const std::string& report_path, const std::string& csv_path,
             bool timing) {
  const Report rep = run_experiment(cfg);
  write_text(report_path, rep.to_json(timing) + "\n");
  if (!csv_path.empty()) write_text(csv_path, rep.to_csv(timing));
  for (const auto& m : rep.methods) {
    std::fprintf(stderr, "%-12s F1 %.4f +- %.4f  p50 %.2e s\n", m.method.c_str(), m.f1.mean, m.f1.stddev,
                 m.latency.p50);
  }
  return rep.violations() == 0 ? 0 : kExitViolations;
}

TheoryCheck random_corpus_audit(std::size_t graphs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::size_t edges = 0, retained = 0, violations = 0;
  for (std::size_t i = 0; i < graphs; ++i) {
    const std::size_t n = 5 + rng() % 46;
    const double p = 0.05 + 0.5 * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const Graph g = erdos_renyi(n, p, rng());
    if (g.m() == 0) continue;
    const TriangleAuditReport r = triangle_support_audit(g, sym_normalize(g.adjacency()));
    edges += r.edges;
    retained += r.retained;
    violations += r.violations;
  }
  std::ostringstream d;
  d << graphs << " graphs, " << edges << " edges, " << retained << " retained, " << violations << " violations";
  return {"triangle_audit.random_corpus", violations == 0, d.str()};
}

int cmd_theory(const std::vector<std::string>& datasets, const std::string& csv_dir, std::size_t corpus,
               std::uint64_t seed, const std::string& report_path) {
  TheoryReport rep;
  const std::optional<fs::path> dir = csv_dir.empty() ? std::nullopt : std::optional<fs::path>(csv_dir);
  for (auto& c : flip_effect_demo(dir, seed)) rep.checks.push_back(std::move(c));
  rep.checks.push_back(hop_separation_check());
  rep.checks.push_back(random_corpus_audit(corpus, seed));
  for (const auto& d : datasets) {
    const DataSet ds = load_dataset_dir(d, seed);
    rep.checks.push_back(triangle_audit_check(fs::path(d).filename().string(), ds.graph, true));
  }
  for (const auto& c : rep.checks) {
    std::fprintf(stderr, "%s %s: %s\n", c.passed ? "ok  " : "FAIL", c.name.c_str(), c.detail.c_str());
  }
  write_text(report_path, rep.to_json() + "\n");
  return rep.violations() == 0 ? 0 : kExitViolations;
}

int cmd_bench(const LadderOptions& opt, const std::string& report_path) {
  const auto points = run_query_ladder(opt);
  json j;
  auto& rows = j["points"] = json::array();
  std::vector<double> size, scs;
  for (const auto& p : points) {
    rows.push_back({{"n", p.n},
                    {"m", p.m},
                    {"scs_median_s", p.scs_median_s},
                    {"scs_max_s", p.scs_max_s},
                    {"acs_median_s", p.acs_median_s},
                    {"acs_max_s", p.acs_max_s},
                    {"mean_teleports", p.mean_teleports}});
    size.push_back(static_cast<double>(p.n + p.m));
    scs.push_back(p.scs_median_s);
    std::fprintf(stderr, "n=%zu m=%zu scs %.2e s acs %.2e s\n", p.n, p.m, p.scs_median_s, p.acs_median_s);
  }
  if (points.size() >= 2) j["scs_loglog_slope"] = loglog_slope(size, scs);
  write_text(report_path, j.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Community search on heterophilic graphs"};
  app.require_subcommand(1);

  ConfigArgs ingest_cfg, train_cfg, search_cfg, eval_cfg;
  std::string ingest_out, train_out = "adaptcs.ckpt", search_ckpt, search_queries, search_alg = "acs",
                          search_out, eval_report, eval_csv, theory_csv, theory_report, bench_report;
  bool eval_no_timing = false;
  std::vector<std::string> theory_datasets;
  std::size_t theory_corpus = 200;
  std::uint64_t theory_seed = 7;
  LadderOptions ladder;

  auto* ingest = app.add_subcommand("ingest", "load, validate and summarize a dataset");
  add_config_options(ingest, ingest_cfg);
  ingest->add_option("-o,--out", ingest_out, "write the dataset in native layout to this directory");

  auto* trn = app.add_subcommand("train", "train the encoder and write a checkpoint");
  add_config_options(trn, train_cfg);
  trn->add_option("-o,--out", train_out, "checkpoint path (a .json sidecar is written next to it)");

  auto* search = app.add_subcommand("search", "answer queries, one JSON line per community");
  add_config_options(search, search_cfg);
  search->add_option("--checkpoint", search_ckpt, "embeddings from `train`; trains in-process when omitted");
  search->add_option("-q,--queries", search_queries, "comma separated node ids (default: sampled test nodes)");
  search->add_option("-a,--algorithm", search_alg, "acs, scs or both")
      ->check(CLI::IsMember({"acs", "scs", "both"}));
  search->add_option("-o,--out", search_out, "JSONL output path (default stdout)");

  auto* eval = app.add_subcommand("eval", "run all methods on sampled queries and report F1");
  add_config_options(eval, eval_cfg);
  eval->add_option("-r,--report", eval_report, "report JSON path (default stdout)");
  eval->add_option("--csv", eval_csv, "per-query CSV path");
  eval->add_flag("--no-timing", eval_no_timing, "omit wall-clock fields so reports are byte-comparable");

  auto* theory = app.add_subcommand("theory", "flip effect, hop separation and triangle audits");
  theory->add_option("-d,--dataset", theory_datasets, "dataset directories to audit (repeatable)")
      ->check(CLI::ExistingDirectory);
  theory->add_option("--csv-dir", theory_csv, "write the toy similarity matrices here");
  theory->add_option("--corpus", theory_corpus, "number of random graphs in the audit corpus");
  theory->add_option("--seed", theory_seed, "seed");
  theory->add_option("-r,--report", theory_report, "report JSON path (default stdout)");

  auto* bench = app.add_subcommand("bench", "per-query latency on a synthetic size ladder");
  bench->add_option("--sizes", ladder.sizes, "node counts");
  bench->add_option("--degree", ladder.avg_degree, "average degree");
  bench->add_option("--dim", ladder.dim, "embedding dimension");
  bench->add_option("--community-size", ladder.community_size, "community size");
  bench->add_option("--queries", ladder.queries, "queries per size");
  bench->add_option("--seed", ladder.seed, "seed");
  bench->add_option("-r,--report", bench_report, "report JSON path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*ingest) return cmd_ingest(resolve_config(ingest_cfg), ingest_out);
    if (*trn) return cmd_train(resolve_config(train_cfg), train_out);
    if (*search) return cmd_search(resolve_config(search_cfg), search_ckpt, search_queries, search_alg, search_out);
    if (*eval) return cmd_eval(resolve_config(eval_cfg), eval_report, eval_csv, !eval_no_timing);
    if (*theory) return cmd_theory(theory_datasets, theory_csv, theory_corpus, theory_seed, theory_report);
    if (*bench) return cmd_bench(ladder, bench_report);
  } catch (const UsageError& e) {
    std::cerr << "adaptcs: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ValidationError& e) {
    std::cerr << "adaptcs: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "adaptcs: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
