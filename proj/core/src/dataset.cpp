#include "adaptcs/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string_view>
#include <unordered_map>

#include "adaptcs/errors.hpp"

namespace adaptcs {
namespace fs = std::filesystem;
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool skip_line(std::string_view s) { return s.empty() || s.front() == '#'; }

std::vector<std::string_view> split_on(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> split_whitespace(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
bool parse_int(std::string_view s, T& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_real(std::string_view s, double& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::ifstream open_or_throw(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  return in;
}

double parse_feature(std::string_view tok, const std::string& src, std::size_t line) {
  double v = 0.0;
  if (!parse_real(tok, v)) throw ParseError(src, line, "invalid number '" + std::string(tok) + "'");
  if (!std::isfinite(v)) throw ParseError(src, line, "non-finite value '" + std::string(tok) + "'");
  return v;
}

RawGraph read_pairs(const fs::path& path, bool header) {
  auto in = open_or_throw(path);
  RawGraph raw;
  std::string line;
  std::size_t line_no = 0;
  const std::string src = path.string();
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view s = trim(line);
    if (skip_line(s)) continue;
    if (header && line_no == 1) continue;
    auto toks = split_whitespace(s);
    NodeId u = 0;
    NodeId v = 0;
    if (toks.size() != 2 || !parse_int(toks[0], u) || !parse_int(toks[1], v)) {
      throw ParseError(src, line_no, "expected 'u<TAB>v', got '" + std::string(s) + "'");
    }
    raw.max_node = std::max<std::size_t>(raw.max_node, std::max(u, v) + std::size_t{1});
    if (u == v) {
      ++raw.self_loops;
      continue;
    }
    raw.edges.emplace_back(u, v);
  }
  return raw;
}

DataSet load_geom_gcn(const fs::path& dir, std::uint64_t seed) {
  RawGraph raw = read_pairs(dir / "out1_graph_edges.txt", /*header=*/true);
  const fs::path node_path = dir / "out1_node_feature_label.txt";
  auto in = open_or_throw(node_path);
  const std::string src = node_path.string();
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::pair<NodeId, std::vector<double>>> rows;
  std::vector<std::pair<NodeId, int>> labels;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view s = trim(line);
    if (line_no == 1 || skip_line(s)) continue;
    auto cols = split_on(s, '\t');
    NodeId id = 0;
    int label = 0;
    if (cols.size() != 3 || !parse_int(cols[0], id) || !parse_int(cols[2], label)) {
      throw ParseError(src, line_no, "expected 'id<TAB>f1,f2,...<TAB>label'");
    }
    std::vector<double> feats;
    for (auto tok : split_on(cols[1], ',')) feats.push_back(parse_feature(tok, src, line_no));
    rows.emplace_back(id, std::move(feats));
    labels.emplace_back(id, label);
  }
  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  const std::size_t d = rows.empty() ? 0 : rows.front().second.size();
  DenseMatrix features(rows.size(), d);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].first != i) throw ValidationError(src + ": node ids are not 0..n-1");
    if (rows[i].second.size() != d) throw ValidationError(src + ": ragged feature rows");
    std::copy(rows[i].second.begin(), rows[i].second.end(), features.row(i).begin());
  }
  return assemble_dataset(raw, std::move(features), labels, seed);
}

DataSet load_linqs(const fs::path& content, const fs::path& cites, std::uint64_t seed) {
  auto in = open_or_throw(content);
  const std::string src = content.string();
  std::string line;
  std::size_t line_no = 0;
  std::unordered_map<std::string, NodeId> ids;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> label_names;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view s = trim(line);
    if (skip_line(s)) continue;
    auto toks = split_whitespace(s);
    if (toks.size() < 3) throw ParseError(src, line_no, "expected 'id f1 .. fd label'");
    if (!rows.empty() && toks.size() - 2 != rows.front().size()) {
      throw ParseError(src, line_no, "feature count differs from first row");
    }
    const auto id = static_cast<NodeId>(rows.size());
    if (!ids.emplace(std::string(toks.front()), id).second) {
      throw ParseError(src, line_no, "duplicate node id");
    }
    std::vector<double> feats;
    for (std::size_t k = 1; k + 1 < toks.size(); ++k) feats.push_back(parse_feature(toks[k], src, line_no));
    rows.push_back(std::move(feats));
    label_names.emplace_back(toks.back());
  }
  std::vector<std::string> classes = label_names;
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  std::vector<std::pair<NodeId, int>> labels;
  for (std::size_t i = 0; i < label_names.size(); ++i) {
    const auto pos = std::lower_bound(classes.begin(), classes.end(), label_names[i]) - classes.begin();
    labels.emplace_back(static_cast<NodeId>(i), static_cast<int>(pos));
  }
  DenseMatrix features(rows.size(), rows.empty() ? 0 : rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy(rows[i].begin(), rows[i].end(), features.row(i).begin());
  }

  auto cin = open_or_throw(cites);
  RawGraph raw;
  raw.max_node = rows.size();
  line_no = 0;
  while (std::getline(cin, line)) {
    ++line_no;
    std::string_view s = trim(line);
    if (skip_line(s)) continue;
    auto toks = split_whitespace(s);
    if (toks.size() != 2) throw ParseError(cites.string(), line_no, "expected 'cited citing'");
    auto a = ids.find(std::string(toks[0]));
    auto b = ids.find(std::string(toks[1]));
    if (a == ids.end() || b == ids.end()) continue;  // dangling citation
    if (a->second == b->second) {
      ++raw.self_loops;
      continue;
    }
    raw.edges.emplace_back(a->second, b->second);
  }
  return assemble_dataset(raw, std::move(features), labels, seed);
}

}  // namespace

std::vector<NodeId> DataSet::nodes_in(Split s) const {
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < split.size(); ++i) {
    if (split[i] == s) out.push_back(static_cast<NodeId>(i));
  }
  return out;
}

std::uint64_t DataSet::hash() const noexcept {
  std::uint64_t h = graph.hash();
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xffU;
      h *= 1099511628211ULL;
    }
  };
  mix(features.rows());
  mix(features.cols());
  for (double v : features.values()) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &v, sizeof bits);
    mix(bits);
  }
  for (int l : labels) mix(static_cast<std::uint64_t>(l));
  return h;
}

std::vector<Split> stratified_split(std::span<const int> labels, int num_classes,
                                    std::uint64_t seed, SplitFractions fractions) {
  std::vector<std::vector<NodeId>> by_class(static_cast<std::size_t>(num_classes));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    by_class[static_cast<std::size_t>(labels[i])].push_back(static_cast<NodeId>(i));
  }
  std::vector<Split> split(labels.size(), Split::test);
  std::mt19937_64 rng(seed);
  for (auto& members : by_class) {
    if (members.empty()) continue;
    std::shuffle(members.begin(), members.end(), rng);
    const auto total = static_cast<double>(members.size());
    auto n_train = static_cast<std::size_t>(std::llround(fractions.train * total));
    auto n_val = static_cast<std::size_t>(std::llround(fractions.val * total));
    n_train = std::clamp<std::size_t>(n_train, 1, members.size());
    n_val = std::min(n_val, members.size() - n_train);
    for (std::size_t k = 0; k < members.size(); ++k) {
      split[members[k]] = k < n_train ? Split::train : (k < n_train + n_val ? Split::val : Split::test);
    }
  }
  return split;
}

RawGraph read_edge_list(const fs::path& path) { return read_pairs(path, /*header=*/false); }

DenseMatrix read_features_csv(const fs::path& path) {
  auto in = open_or_throw(path);
  const std::string src = path.string();
  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view s = trim(line);
    if (skip_line(s)) continue;
    auto toks = split_on(s, ',');
    if (rows == 0) cols = toks.size();
    if (toks.size() != cols) {
      throw ParseError(src, line_no,
                       "expected " + std::to_string(cols) + " columns, got " + std::to_string(toks.size()));
    }
    for (auto tok : toks) values.push_back(parse_feature(tok, src, line_no));
    ++rows;
  }
  return DenseMatrix(rows, cols, std::move(values));
}

std::vector<std::pair<NodeId, int>> read_labels_csv(const fs::path& path) {
  auto in = open_or_throw(path);
  const std::string src = path.string();
  std::vector<std::pair<NodeId, int>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view s = trim(line);
    if (skip_line(s)) continue;
    if (out.empty() && s == "node_id,label") continue;
    auto toks = split_on(s, ',');
    NodeId id = 0;
    int label = 0;
    if (toks.size() != 2 || !parse_int(toks[0], id) || !parse_int(toks[1], label)) {
      throw ParseError(src, line_no, "expected 'node_id,label', got '" + std::string(s) + "'");
    }
    out.emplace_back(id, label);
  }
  return out;
}

DataSet assemble_dataset(const RawGraph& raw, DenseMatrix features,
                         const std::vector<std::pair<NodeId, int>>& labels, std::uint64_t seed) {
  std::size_t n = raw.max_node;
  for (const auto& [id, label] : labels) n = std::max<std::size_t>(n, id + std::size_t{1});
  if (features.rows() != n) {
    throw ValidationError("feature row count " + std::to_string(features.rows()) +
                          " != node count " + std::to_string(n));
  }
  if (!features.all_finite()) throw ValidationError("features contain NaN/Inf");

  DataSet ds;
  ds.labels.assign(n, -1);
  int max_label = -1;
  for (const auto& [id, label] : labels) {
    if (label < 0) throw ValidationError("label " + std::to_string(label) + " out of range at node " + std::to_string(id));
    if (ds.labels[id] != -1 && ds.labels[id] != label) {
      throw ValidationError("conflicting labels for node " + std::to_string(id));
    }
    ds.labels[id] = label;
    max_label = std::max(max_label, label);
  }
  ds.num_classes = max_label + 1;
  std::vector<std::size_t> class_sizes(static_cast<std::size_t>(ds.num_classes), 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (ds.labels[i] < 0) throw ValidationError("node " + std::to_string(i) + " has no label");
    ++class_sizes[static_cast<std::size_t>(ds.labels[i])];
  }
  for (std::size_t c = 0; c < class_sizes.size(); ++c) {
    if (class_sizes[c] == 0) {
      throw ValidationError("label " + std::to_string(c) + " out of range: class has no nodes");
    }
  }
  ds.graph = Graph::from_edges(n, raw.edges);
  ds.features = std::move(features);
  ds.split = stratified_split(ds.labels, ds.num_classes, seed);
  ds.dropped_self_loops = raw.self_loops;
  return ds;
}

DataSet load_dataset(const fs::path& graph_path, const fs::path& features_path,
                     const fs::path& labels_path, std::uint64_t seed) {
  return assemble_dataset(read_edge_list(graph_path), read_features_csv(features_path),
                          read_labels_csv(labels_path), seed);
}

DataSet load_dataset_dir(const fs::path& dir, std::uint64_t seed) {
  if (fs::exists(dir / "graph.tsv")) {
    return load_dataset(dir / "graph.tsv", dir / "features.csv", dir / "labels.csv", seed);
  }
  if (fs::exists(dir / "out1_graph_edges.txt")) return load_geom_gcn(dir, seed);
  if (fs::is_directory(dir)) {
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.path().extension() == ".content") {
        fs::path cites = entry.path();
        cites.replace_extension(".cites");
        if (fs::exists(cites)) return load_linqs(entry.path(), cites, seed);
      }
    }
  }
  throw ValidationError("no recognised dataset layout in " + dir.string());
}

void write_native_dataset(const DataSet& ds, const fs::path& dir) {
  fs::create_directories(dir);
  std::ofstream g(dir / "graph.tsv");
  g << "# n=" << ds.graph.n() << " m=" << ds.graph.m() << "\n";
  for (const Edge& e : ds.graph.edges()) g << e.u << '\t' << e.v << '\n';
  std::ofstream f(dir / "features.csv");
  char buf[32];
  for (std::size_t i = 0; i < ds.features.rows(); ++i) {
    auto row = ds.features.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      auto [end, ec] = std::to_chars(buf, buf + sizeof buf, row[j]);
      if (j) f << ',';
      f.write(buf, end - buf);
    }
    f << '\n';
  }
  std::ofstream l(dir / "labels.csv");
  l << "node_id,label\n";
  for (std::size_t i = 0; i < ds.labels.size(); ++i) l << i << ',' << ds.labels[i] << '\n';
  if (!g || !f || !l) throw ValidationError("failed writing dataset to " + dir.string());
}

void normalize_feature_rows(DataSet& ds) {
  for (std::size_t i = 0; i < ds.features.rows(); ++i) {
    auto row = ds.features.row(i);
    double s = 0.0;
    for (double v : row) s += std::abs(v);
    if (s > 0.0) {
      for (double& v : row) v /= s;
    }
  }
}

}  // namespace adaptcs
