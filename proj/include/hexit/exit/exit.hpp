#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hexit/imitation/builder.hpp"
#include "hexit/nn/network.hpp"
#include "hexit/nn/training.hpp"
#include "hexit/search/config.hpp"

namespace hexit::exit {

enum class Regime { batch, online_buffer, online_exponential };

std::string_view to_string(Regime regime);
Regime parse_regime(std::string_view text);

struct ExitConfig {
  int board_size = 9;
  int max_iterations = 3;
  int moves_per_iteration = 243000;
  Regime regime = Regime::batch;
  int buffer_capacity = 243000;
  double growth_rate = 0.10;
  int explore_iterations = 1000;  // iteration-1 exploration MCTS
  search::SearchConfig vanilla_expert = search::SearchConfig::defaults(search::SearchMode::vanilla);
  search::SearchConfig policy_expert = search::SearchConfig::defaults(search::SearchMode::policy);
  search::SearchConfig policy_value_expert = search::SearchConfig::defaults(search::SearchMode::policy_value);
  int value_trigger = 550000;  // aggregated dataset size that starts the value stage; 0 never
  int value_games = 1;         // continuations per position for value targets
  nn::NetworkConfig network = nn::NetworkConfig::full(9);
  nn::TrainConfig train;
  double validation_fraction = 0.05;
  int eval_batch = 16;
  int workers = 1;
  uint64_t seed = 0;
  std::string initial_checkpoint;  // warm-start apprentice; empty starts from vanilla MCTS

  // Throws ConfigError.
  void validate() const;
};

// Which expert the run uses next.
struct WarmStartState {
  bool has_apprentice = false;
  bool apprentice_has_value = false;
};
search::SearchMode warm_start_schedule(const WarmStartState& state);

// True once the aggregated dataset is large enough for the value stage.
bool value_stage_due(size_t dataset_size, int trigger);

// Training set for the newest iteration from all datasets so far (oldest
// first).
std::vector<imitation::TrainingSample> assemble_training_set(std::span<const imitation::Dataset> history,
                                                             Regime regime, int buffer_capacity);

// Number of new labels iteration `iteration` (1-based) generates.
int moves_for_iteration(const ExitConfig& config, int iteration, size_t aggregated_size);

// Winner of one apprentice self-play continuation sampled at temperature 1.
Color play_continuation(const Board& position, const nn::Network<float>& apprentice, Rng& rng, uint64_t* evaluations);

// Attaches a Monte Carlo value target from `games` continuations to every
// sample that has none (all samples when `overwrite`). Continuation seeds
// come from (master, sample provenance, continuation index). Returns the
// network evaluations used.
uint64_t add_value_targets(imitation::Dataset& dataset, const nn::Network<float>& apprentice, int games,
                           uint64_t master, bool overwrite = false);

struct IterationRecord {
  int iteration = 0;
  std::string expert;    // expert descriptor used to label this iteration
  std::string explorer;  // exploration policy descriptor
  std::string dataset_file;
  std::string checkpoint_file;
  size_t dataset_size = 0;
  size_t training_size = 0;
  size_t validation_size = 0;
  bool value_stage = false;
  uint64_t init_seed = 0;
  uint64_t evaluations = 0;             // network evaluations spent in this iteration
  uint64_t cumulative_evaluations = 0;  // including earlier iterations
  int epochs = 0;
  int returned_epoch = 0;
  double validation_loss = 0.0;
};

struct RunManifest {
  ExitConfig config;
  std::string initial_checkpoint_file;  // ckpt_0
  std::vector<IterationRecord> iterations;
};

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path);
RunManifest read_manifest(const std::filesystem::path& path);

// The Expert Iteration loop with resumable state in `run_dir` (manifest, dataset_<i>,
// ckpt_<i>). A run directory written by an earlier call with the same
// configuration (max_iterations aside) is continued, not restarted.
RunManifest run_exit(const ExitConfig& config, const std::filesystem::path& run_dir, std::ostream* log = nullptr);

}  // namespace hexit::exit
