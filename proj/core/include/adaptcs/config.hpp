#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "adaptcs/experiment.hpp"

namespace adaptcs {

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Parses `key = value` or `key: value` lines. '#' starts a comment, surrounding
/// quotes and a trailing comma are stripped, and `[section]` headers are ignored, so
/// flat TOML and one-level JSON objects both parse. Throws ParseError with the line.
KeyValues parse_key_values(std::string_view text, const std::string& source = "<config>");
KeyValues read_key_values(const std::filesystem::path& path);

/// Applies one setting. Throws UsageError for unknown keys and InvalidInput for bad values.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);
void apply_settings(ExperimentConfig& config, const KeyValues& kv);

/// Canonical `key=value` lines of every setting, in a fixed order.
std::string config_echo(const ExperimentConfig& config);

/// Keys accepted by apply_setting.
std::vector<std::string> config_keys();

}  // namespace adaptcs
