#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "hexit/core/rng.hpp"
#include "hexit/nn/network.hpp"
#include "hexit/nn/training.hpp"

namespace hexit::baseline {

struct ReinforceConfig {
  int games_per_update = 32;
  double learning_rate = 0.01;  // plain SGD step
  int pool_size = 8;            // most recent snapshots kept as opponents
  int snapshot_interval = 10;   // updates between pool additions; 0 keeps the pool frozen
  double baseline_rate = 0.1;   // moving-average step of the baseline b
  double temperature = 1.0;     // softmax temperature of both players
  uint64_t seed = 0;

  void validate() const;  // throws ConfigError
};

// Learner state carried across updates.
struct ReinforceState {
  std::vector<std::shared_ptr<const nn::Network<float>>> pool;
  double baseline = 0.0;
  uint64_t updates = 0;
  uint64_t games = 0;
  uint64_t evaluations = 0;  // learner and opponent network evaluations
};

struct UpdateStats {
  int games = 0;
  int wins = 0;
  double baseline_used = 0.0;
  uint64_t evaluations = 0;
};

// Pool seeded with a frozen copy of `start`.
ReinforceState make_reinforce_state(const nn::Network<float>& start);

// One self-play game between `learner` and `opponent`, both sampling from
// their softmax. Returns the learner's (position, action) pairs and whether
// it won.
struct Trajectory {
  std::vector<nn::Example> moves;  // chosen_cell is the learner's action
  bool learner_won = false;
  uint64_t evaluations = 0;
};
Trajectory play_learner_game(const nn::Network<float>& learner, const nn::Network<float>& opponent,
                             Color learner_colour, double temperature, Rng& rng);

// SGD step along sum_t log pi(a_t|s_t) (z - b), averaged over the learner's
// moves. Each move becomes a CAT example weighted by z - b.
void policy_gradient_step(nn::Network<float>& net, std::span<const nn::Example> weighted_moves, double learning_rate);

// Plays a batch of games against uniformly drawn pool members, applies the
// update, moves the baseline toward the batch win rate and, every
// snapshot_interval updates, adds the current policy to the pool.
UpdateStats reinforce_update(nn::Network<float>& net, ReinforceState& state, const ReinforceConfig& config);

// Runs updates until `evaluation_budget` network evaluations are used.
ReinforceState run_reinforce(nn::Network<float>& net, const ReinforceConfig& config, uint64_t evaluation_budget);

}  // namespace hexit::baseline
