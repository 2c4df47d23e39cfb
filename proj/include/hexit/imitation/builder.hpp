#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "hexit/imitation/agents.hpp"
#include "hexit/imitation/sample.hpp"

namespace hexit::imitation {

// Plays one full game with `explorer` on both sides and returns the position
// at a uniformly drawn ply in [0, game length).
Board sample_position(int board_size, Agent& explorer, Rng& rng);

// A position waiting for its expert label, with its own search seed.
struct LabelTask {
  Board position{2};
  Provenance provenance;
  uint64_t seed = 0;
};

// `count` exploration games for iteration `iteration`, game ids starting at
// `first_game`. Every game and every label has a seed derived from
// (master, iteration, game id), so the result does not depend on how the
// work is later split.
std::vector<LabelTask> explore_positions(int board_size, Agent& explorer, uint64_t master, uint32_t iteration,
                                         uint32_t first_game, int count);

// Runs the expert from the task's position. Terminal positions yield nullopt
// and a warning on stderr.
std::optional<TrainingSample> label_with_expert(const LabelTask& task, const search::SearchConfig& expert,
                                                search::Evaluator* network);

// Sequential labelling of every task, in task order.
std::vector<TrainingSample> label_sequential(std::span<const LabelTask> tasks, const search::SearchConfig& expert,
                                             search::Evaluator* network);

struct InitialDatasetConfig {
  int board_size = 9;
  int count = 100000;
  int explore_iterations = 1000;  // exploration MCTS, sampling by visit counts
  search::SearchConfig expert = search::SearchConfig::defaults(search::SearchMode::vanilla);
  uint64_t seed = 0;
  uint32_t iteration = 0;
};

std::string explorer_descriptor(int explore_iterations);
std::string expert_descriptor(const search::SearchConfig& expert);

// `count` samples from independent reduced-iteration MCTS games, labelled by
// the (vanilla) expert.
Dataset build_initial_dataset(const InitialDatasetConfig& config);

// Appends `count` samples whose positions come from games of the stochastic
// apprentice. New game ids continue after the largest id already used for
// `iteration`.
void dagger_extend(Dataset& dataset, std::shared_ptr<const nn::Network<float>> apprentice, int count,
                   const search::SearchConfig& expert, search::Evaluator* network, uint64_t master,
                   uint32_t iteration);

// Train/validation split that holds out floor(fraction * size) samples of
// every iteration, chosen by a seeded shuffle.
std::pair<std::vector<nn::Example>, std::vector<nn::Example>> split_validation(std::span<const TrainingSample> samples,
                                                                               double fraction, uint64_t seed);

}  // namespace hexit::imitation
