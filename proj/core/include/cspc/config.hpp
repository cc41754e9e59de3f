#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cspc/market_model.hpp"

namespace cspc {

/// Built-in market settings: "setting1" (3 providers, 50 clients) and
/// "setting2" (6 providers, 100 clients). All providers honest.
ScenarioConfig preset(std::string_view name);
std::vector<std::string> preset_names();

std::vector<std::string> scenario_names();

/// Rewrites provider honesty policies for one of the built-in scenarios:
///
///   scenario1-all-honest      every provider honest
///   scenario2-one-honest      provider 1 honest, the rest at their caps
///   scenario3-behavior-change providers 1 and 2 honest, provider 2 turns
///                             unfair after `switch_pcc` (32 for setting1,
///                             15 otherwise)
///   scenario4-probabilistic   provider 1 honest through `switch_pcc`
///                             (default 0), then honest with probability
///                             `sigma` (default 0.9); the rest unfair
///
/// Throws ConfigError for unknown names or out-of-range sigma/switch.
void apply_scenario(ScenarioConfig& config, std::string_view scenario, std::optional<double> sigma = {},
                    std::optional<int> switch_pcc = {});

/// Builds a config from a parsed key-value tree (see README for the
/// schema). A "preset" key selects the base; everything else overrides it.
/// Throws ConfigError with the dotted field path on any problem.
ScenarioConfig config_from_json(const nlohmann::json& tree);

/// Reads JSON (.json) or TOML (.toml) by extension. Parse errors carry the
/// line; validation errors carry the field path.
ScenarioConfig load_config(const std::filesystem::path& path);

/// Parses config text in the given format ("json" or "toml").
ScenarioConfig parse_config(std::string_view text, std::string_view format);

/// Round-trippable snapshot used in run summaries.
nlohmann::json config_to_json(const ScenarioConfig& config);

}  // namespace cspc
