#include "hexit/io/config_json.hpp"

#include <algorithm>
#include <fstream>

using nlohmann::json;

namespace hexit::io {

void require_known_keys(const json& j, std::string_view what, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw ConfigError(std::string(what) + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError("unknown key '" + key + "' in " + std::string(what));
    }
  }
}

}  // namespace hexit::io

namespace hexit::search {

void to_json(json& j, const SearchConfig& c) {
  j = json{{"mode", std::string(to_string(c.mode))},
           {"iterations", c.iterations},
           {"c_b", c.c_b},
           {"c_rave", c.c_rave},
           {"expansion_threshold", c.expansion_threshold},
           {"w_a", c.w_a},
           {"tau", c.tau},
           {"w_v", c.w_v},
           {"seed", c.seed}};
}

void from_json(const json& j, SearchConfig& c) {
  io::require_known_keys(j, "search config",
                         {"mode", "iterations", "c_b", "c_rave", "expansion_threshold", "w_a", "tau", "w_v", "seed"});
  if (auto it = j.find("mode"); it != j.end()) {
    if (!it->is_string()) throw ConfigError("search config 'mode' must be a string");
    const SearchMode mode = parse_search_mode(it->get<std::string>());
    if (mode != c.mode) c = SearchConfig::defaults(mode);
  }
  io::read_optional(j, "iterations", c.iterations);
  io::read_optional(j, "c_b", c.c_b);
  io::read_optional(j, "c_rave", c.c_rave);
  io::read_optional(j, "expansion_threshold", c.expansion_threshold);
  io::read_optional(j, "w_a", c.w_a);
  io::read_optional(j, "tau", c.tau);
  io::read_optional(j, "w_v", c.w_v);
  io::read_optional(j, "seed", c.seed);
  if (c.iterations < 1) throw ConfigError("search iterations must be positive");
  if (c.tau <= 0) throw ConfigError("search tau must be positive");
}

}  // namespace hexit::search

namespace hexit::nn {

void to_json(json& j, const NetworkConfig& c) {
  json layers = json::array();
  for (const ConvSpec& l : c.layers) layers.push_back({{"kernel", l.kernel}, {"padded", l.padded}});
  j = json{{"board_size", c.board_size},       {"filters", c.filters}, {"layers", layers},
           {"value_heads", c.value_heads},     {"seed", c.seed},       {"calibrate_variance", c.calibrate_variance}};
}

void from_json(const json& j, NetworkConfig& c) {
  io::require_known_keys(j, "network config",
                         {"preset", "board_size", "filters", "layers", "value_heads", "seed", "calibrate_variance"});
  io::read_optional(j, "board_size", c.board_size);
  if (auto it = j.find("preset"); it != j.end()) {
    const std::string preset = it->get<std::string>();
    if (preset == "full") {
      c = NetworkConfig::full(c.board_size);
    } else if (preset == "desk") {
      c = NetworkConfig::desk(c.board_size);
    } else {
      throw ConfigError("unknown network preset '" + preset + "'");
    }
  }
  io::read_optional(j, "filters", c.filters);
  if (auto it = j.find("layers"); it != j.end()) {
    if (!it->is_array()) throw ConfigError("network 'layers' must be an array");
    c.layers.clear();
    for (const json& l : *it) {
      io::require_known_keys(l, "network layer", {"kernel", "padded"});
      ConvSpec spec;
      io::read_optional(l, "kernel", spec.kernel);
      io::read_optional(l, "padded", spec.padded);
      c.layers.push_back(spec);
    }
  }
  io::read_optional(j, "value_heads", c.value_heads);
  io::read_optional(j, "seed", c.seed);
  io::read_optional(j, "calibrate_variance", c.calibrate_variance);
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

void to_json(json& j, const TrainConfig& c) {
  j = json{{"batch_size", c.batch_size},
           {"max_epochs", c.max_epochs},
           {"rise_limit", c.rise_limit},
           {"learning_rate", c.adam.learning_rate},
           {"beta1", c.adam.beta1},
           {"beta2", c.adam.beta2},
           {"epsilon", c.adam.epsilon},
           {"policy_target", c.loss.policy == PolicyTarget::tpt ? "tpt" : "cat"},
           {"seed", c.seed}};
}

void from_json(const json& j, TrainConfig& c) {
  io::require_known_keys(j, "train config",
                         {"batch_size", "max_epochs", "rise_limit", "learning_rate", "beta1", "beta2", "epsilon",
                          "policy_target", "seed"});
  io::read_optional(j, "batch_size", c.batch_size);
  io::read_optional(j, "max_epochs", c.max_epochs);
  io::read_optional(j, "rise_limit", c.rise_limit);
  io::read_optional(j, "learning_rate", c.adam.learning_rate);
  io::read_optional(j, "beta1", c.adam.beta1);
  io::read_optional(j, "beta2", c.adam.beta2);
  io::read_optional(j, "epsilon", c.adam.epsilon);
  if (auto it = j.find("policy_target"); it != j.end()) {
    const std::string t = it->is_string() ? it->get<std::string>() : "";
    if (t == "tpt") {
      c.loss.policy = PolicyTarget::tpt;
    } else if (t == "cat") {
      c.loss.policy = PolicyTarget::cat;
    } else {
      throw ConfigError("policy_target must be \"tpt\" or \"cat\"");
    }
  }
  io::read_optional(j, "seed", c.seed);
  if (c.batch_size < 1 || c.max_epochs < 0 || c.rise_limit < 1) throw ConfigError("bad train config");
}

}  // namespace hexit::nn

namespace hexit::exit {

void to_json(json& j, const ExitConfig& c) {
  j = json{{"board_size", c.board_size},
           {"max_iterations", c.max_iterations},
           {"moves_per_iteration", c.moves_per_iteration},
           {"regime", std::string(to_string(c.regime))},
           {"buffer_capacity", c.buffer_capacity},
           {"growth_rate", c.growth_rate},
           {"explore_iterations", c.explore_iterations},
           {"vanilla_expert", c.vanilla_expert},
           {"policy_expert", c.policy_expert},
           {"policy_value_expert", c.policy_value_expert},
           {"value_trigger", c.value_trigger},
           {"value_games", c.value_games},
           {"network", c.network},
           {"train", c.train},
           {"validation_fraction", c.validation_fraction},
           {"eval_batch", c.eval_batch},
           {"workers", c.workers},
           {"seed", c.seed},
           {"initial_checkpoint", c.initial_checkpoint}};
}

void from_json(const json& j, ExitConfig& c) {
  io::require_known_keys(j, "exit config",
                         {"board_size", "max_iterations", "moves_per_iteration", "regime", "buffer_capacity",
                          "growth_rate", "explore_iterations", "vanilla_expert", "policy_expert",
                          "policy_value_expert", "value_trigger", "value_games", "network", "train",
                          "validation_fraction", "eval_batch", "workers", "seed", "initial_checkpoint"});
  io::read_optional(j, "board_size", c.board_size);
  c.network.board_size = c.board_size;
  io::read_optional(j, "max_iterations", c.max_iterations);
  io::read_optional(j, "moves_per_iteration", c.moves_per_iteration);
  if (auto it = j.find("regime"); it != j.end()) {
    if (!it->is_string()) throw ConfigError("exit 'regime' must be a string");
    c.regime = parse_regime(it->get<std::string>());
  }
  io::read_optional(j, "buffer_capacity", c.buffer_capacity);
  io::read_optional(j, "growth_rate", c.growth_rate);
  io::read_optional(j, "explore_iterations", c.explore_iterations);
  io::read_optional(j, "vanilla_expert", c.vanilla_expert);
  io::read_optional(j, "policy_expert", c.policy_expert);
  io::read_optional(j, "policy_value_expert", c.policy_value_expert);
  io::read_optional(j, "value_trigger", c.value_trigger);
  io::read_optional(j, "value_games", c.value_games);
  io::read_optional(j, "network", c.network);
  io::read_optional(j, "train", c.train);
  io::read_optional(j, "validation_fraction", c.validation_fraction);
  io::read_optional(j, "eval_batch", c.eval_batch);
  io::read_optional(j, "workers", c.workers);
  io::read_optional(j, "seed", c.seed);
  io::read_optional(j, "initial_checkpoint", c.initial_checkpoint);
  c.validate();
}

}  // namespace hexit::exit

namespace hexit::baseline {

void to_json(json& j, const ReinforceConfig& c) {
  j = json{{"games_per_update", c.games_per_update},
           {"learning_rate", c.learning_rate},
           {"pool_size", c.pool_size},
           {"snapshot_interval", c.snapshot_interval},
           {"baseline_rate", c.baseline_rate},
           {"temperature", c.temperature},
           {"seed", c.seed}};
}

void from_json(const json& j, ReinforceConfig& c) {
  io::require_known_keys(j, "reinforce config",
                         {"games_per_update", "learning_rate", "pool_size", "snapshot_interval", "baseline_rate",
                          "temperature", "seed"});
  io::read_optional(j, "games_per_update", c.games_per_update);
  io::read_optional(j, "learning_rate", c.learning_rate);
  io::read_optional(j, "pool_size", c.pool_size);
  io::read_optional(j, "snapshot_interval", c.snapshot_interval);
  io::read_optional(j, "baseline_rate", c.baseline_rate);
  io::read_optional(j, "temperature", c.temperature);
  io::read_optional(j, "seed", c.seed);
  c.validate();
}

}  // namespace hexit::baseline

namespace hexit::io {

void to_json(json& j, const RunConfig& c) { j = json{{"exit", c.exit}, {"reinforce", c.reinforce}}; }

void from_json(const json& j, RunConfig& c) {
  require_known_keys(j, "run config", {"exit", "reinforce"});
  read_optional(j, "exit", c.exit);
  read_optional(j, "reinforce", c.reinforce);
  c.exit.validate();
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return j.get<RunConfig>();
}

}  // namespace hexit::io
