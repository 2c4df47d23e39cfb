#pragma once

#include <filesystem>

#include "hexit/baseline/reinforce.hpp"
#include "hexit/core/error.hpp"
#include "hexit/exit/exit.hpp"
#include "hexit/nn/network.hpp"
#include "hexit/nn/training.hpp"
#include "hexit/search/config.hpp"
#include "json.hpp"

// JSON mappings for every configuration struct. Reading starts from the
// struct's defaults and overrides the keys present; unknown keys and wrongly
// typed values raise ConfigError.

namespace hexit::search {
void to_json(nlohmann::json& j, const SearchConfig& c);
void from_json(const nlohmann::json& j, SearchConfig& c);
}  // namespace hexit::search

namespace hexit::nn {
void to_json(nlohmann::json& j, const NetworkConfig& c);
void from_json(const nlohmann::json& j, NetworkConfig& c);
void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);
}  // namespace hexit::nn

namespace hexit::exit {
void to_json(nlohmann::json& j, const ExitConfig& c);
void from_json(const nlohmann::json& j, ExitConfig& c);
}  // namespace hexit::exit

namespace hexit::baseline {
void to_json(nlohmann::json& j, const ReinforceConfig& c);
void from_json(const nlohmann::json& j, ReinforceConfig& c);
}  // namespace hexit::baseline

namespace hexit::io {

// Everything a command can be configured with, as one file:
//   {"exit": {...}, "reinforce": {...}}
// Missing sections keep their defaults.
struct RunConfig {
  exit::ExitConfig exit;
  baseline::ReinforceConfig reinforce;
};
void to_json(nlohmann::json& j, const RunConfig& c);
void from_json(const nlohmann::json& j, RunConfig& c);
RunConfig load_run_config(const std::filesystem::path& path);

// Rejects keys of `j` not listed in `allowed`.
void require_known_keys(const nlohmann::json& j, std::string_view what, std::initializer_list<std::string_view> allowed);

// Reads j[key] into `out` when present, converting type errors to ConfigError.
template <typename T>
void read_optional(const nlohmann::json& j, const char* key, T& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    it->get_to(out);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

}  // namespace hexit::io
