#include "adaptcs/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "adaptcs/errors.hpp"

namespace adaptcs {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string_view unquote(std::string_view s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

double to_real(const std::string& key, const std::string& v) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw InvalidInput(key + ": expected a finite number, got '" + v + "'");
  }
  return out;
}

template <typename T>
T to_int(const std::string& key, const std::string& v) {
  T out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw InvalidInput(key + ": expected an integer, got '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw InvalidInput(key + ": expected true/false, got '" + v + "'");
}

std::string real_text(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"name", [](auto& c, auto&, auto& v) { c.name = v; }},
      {"dataset", [](auto& c, auto&, auto& v) { c.dataset = v; }},
      {"graph", [](auto& c, auto&, auto& v) { c.graph = v; }},
      {"features", [](auto& c, auto&, auto& v) { c.features = v; }},
      {"labels", [](auto& c, auto&, auto& v) { c.labels = v; }},
      {"seed", [](auto& c, auto& k, auto& v) {
         c.seed = to_int<std::uint64_t>(k, v);
         c.encoder.seed = c.seed;
       }},
      {"K", [](auto& c, auto& k, auto& v) { c.encoder.k_max = to_int<int>(k, v); }},
      {"hidden", [](auto& c, auto& k, auto& v) { c.encoder.hidden = to_int<std::size_t>(k, v); }},
      {"mask", [](auto& c, auto&, auto& v) { c.encoder.mask = parse_mask_mode(v); }},
      {"weighting", [](auto& c, auto&, auto& v) { c.encoder.weighting = parse_weighting(v); }},
      {"fusion", [](auto& c, auto&, auto& v) { c.encoder.fusion = parse_fusion_mode(v); }},
      {"rank", [](auto& c, auto& k, auto& v) { c.encoder.rank = to_int<std::size_t>(k, v); }},
      {"dropout", [](auto& c, auto& k, auto& v) { c.encoder.dropout = to_real(k, v); }},
      {"lr", [](auto& c, auto& k, auto& v) { c.encoder.learning_rate = to_real(k, v); }},
      {"epochs", [](auto& c, auto& k, auto& v) { c.encoder.epochs = to_int<int>(k, v); }},
      {"patience", [](auto& c, auto& k, auto& v) { c.encoder.patience = to_int<int>(k, v); }},
      {"beta_class", [](auto& c, auto& k, auto& v) { c.encoder.beta_class = to_real(k, v); }},
      {"beta_hop", [](auto& c, auto& k, auto& v) { c.encoder.beta_hop = to_real(k, v); }},
      {"nnz_budget", [](auto& c, auto& k, auto& v) { c.encoder.nnz_budget = to_int<std::size_t>(k, v); }},
      {"tau_sign", [](auto& c, auto& k, auto& v) { c.search.tau_sign = to_real(k, v); }},
      {"tau_weight", [](auto& c, auto& k, auto& v) { c.search.tau_weight = to_real(k, v); }},
      {"tau_quantile", [](auto& c, auto& k, auto& v) {
         if (v == "none" || v.empty()) {
           c.search.tau_quantile.reset();
         } else {
           c.search.tau_quantile = to_real(k, v);
         }
       }},
      {"lambda_bonus", [](auto& c, auto& k, auto& v) { c.search.lambda_bonus = to_real(k, v); }},
      {"lambda_penalty", [](auto& c, auto& k, auto& v) { c.search.lambda_penalty = to_real(k, v); }},
      {"alpha_top", [](auto& c, auto& k, auto& v) { c.search.alpha_top = to_real(k, v); }},
      {"community_size", [](auto& c, auto& k, auto& v) { c.search.community_size = to_int<std::size_t>(k, v); }},
      {"n_queries", [](auto& c, auto& k, auto& v) { c.n_queries = to_int<std::size_t>(k, v); }},
      {"methods", [](auto& c, auto&, auto& v) {
         c.methods.clear();
         std::stringstream ss(v);
         std::string item;
         while (std::getline(ss, item, ',')) {
           auto t = trim(item);
           if (!t.empty()) c.methods.emplace_back(t);
         }
       }},
      {"normalize_features", [](auto& c, auto& k, auto& v) { c.normalize_features = to_bool(k, v); }},
      {"lp_iterations", [](auto& c, auto& k, auto& v) { c.lp_iterations = to_int<int>(k, v); }},
      {"checkpoint", [](auto& c, auto&, auto& v) {
         if (v.empty()) {
           c.checkpoint.reset();
         } else {
           c.checkpoint = v;
         }
       }},
      {"cache_dir", [](auto& c, auto&, auto& v) {
         if (v.empty()) {
           c.cache_dir.reset();
         } else {
           c.cache_dir = v;
         }
       }},
  };
  return table;
}

}  // namespace

KeyValues parse_key_values(std::string_view text, const std::string& source) {
  KeyValues out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find('\n', start), text.size());
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty() || line == "{" || line == "}" || line.front() == '[') continue;
    if (line.back() == ',') line = trim(line.substr(0, line.size() - 1));
    const std::size_t sep = line.find_first_of("=:");
    if (sep == std::string_view::npos) throw ParseError(source, line_no, "expected key = value");
    const std::string key(unquote(trim(line.substr(0, sep))));
    const std::string value(unquote(trim(line.substr(sep + 1))));
    if (key.empty()) throw ParseError(source, line_no, "empty key");
    out.emplace_back(key, value);
    if (end == text.size()) break;
  }
  return out;
}

KeyValues read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_key_values(ss.str(), path.string());
}

void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value) {
  const std::string k = key == "k_max" ? "K" : key;
  const auto& table = setters();
  auto it = table.find(k);
  if (it == table.end()) throw UsageError("unknown config key '" + key + "'");
  it->second(config, k, value);
}

void apply_settings(ExperimentConfig& config, const KeyValues& kv) {
  for (const auto& [k, v] : kv) apply_setting(config, k, v);
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, _] : setters()) keys.push_back(k);
  return keys;
}

std::string config_echo(const ExperimentConfig& c) {
  std::ostringstream os;
  auto line = [&os](const char* k, const std::string& v) { os << k << '=' << v << '\n'; };
  const auto& e = c.encoder;
  const auto& s = c.search;
  line("name", c.name);
  line("dataset", c.dataset.string());
  line("graph", c.graph.string());
  line("features", c.features.string());
  line("labels", c.labels.string());
  line("seed", std::to_string(c.seed));
  line("K", std::to_string(e.k_max));
  line("hidden", std::to_string(e.hidden));
  line("mask", std::string(to_string(e.mask)));
  line("weighting", std::string(to_string(e.weighting)));
  line("fusion", std::string(to_string(e.fusion)));
  line("rank", std::to_string(e.rank));
  line("dropout", real_text(e.dropout));
  line("lr", real_text(e.learning_rate));
  line("epochs", std::to_string(e.epochs));
  line("patience", std::to_string(e.patience));
  line("beta_class", real_text(e.beta_class));
  line("beta_hop", real_text(e.beta_hop));
  line("nnz_budget", std::to_string(e.nnz_budget));
  line("tau_sign", real_text(s.tau_sign));
  line("tau_weight", real_text(s.tau_weight));
  line("tau_quantile", s.tau_quantile ? real_text(*s.tau_quantile) : "none");
  line("lambda_bonus", real_text(s.lambda_bonus));
  line("lambda_penalty", real_text(s.lambda_penalty));
  line("alpha_top", real_text(s.alpha_top));
  line("community_size", std::to_string(s.community_size));
  line("n_queries", std::to_string(c.n_queries));
  std::string methods;
  for (const auto& m : c.methods) methods += (methods.empty() ? "" : ",") + m;
  line("methods", methods);
  line("normalize_features", c.normalize_features ? "true" : "false");
  line("lp_iterations", std::to_string(c.lp_iterations));
  line("checkpoint", c.checkpoint ? c.checkpoint->string() : "");
  line("cache_dir", c.cache_dir ? c.cache_dir->string() : "");
  return os.str();
}

}  // namespace adaptcs
