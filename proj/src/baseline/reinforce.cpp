#include "hexit/baseline/reinforce.hpp"

#include "hexit/core/error.hpp"
#include "hexit/imitation/agents.hpp"

namespace hexit::baseline {

void ReinforceConfig::validate() const {
  if (games_per_update < 1) throw ConfigError("games_per_update must be positive");
  if (!(learning_rate > 0)) throw ConfigError("learning_rate must be positive");
  if (pool_size < 1) throw ConfigError("pool_size must be at least 1");
  if (snapshot_interval < 0) throw ConfigError("snapshot_interval must be non-negative");
  if (!(baseline_rate >= 0 && baseline_rate <= 1)) throw ConfigError("baseline_rate must be in [0,1]");
  if (!(temperature > 0)) throw ConfigError("temperature must be positive");
}

ReinforceState make_reinforce_state(const nn::Network<float>& start) {
  ReinforceState s;
  s.pool.push_back(std::make_shared<const nn::Network<float>>(start));
  return s;
}

Trajectory play_learner_game(const nn::Network<float>& learner, const nn::Network<float>& opponent,
                             Color learner_colour, double temperature, Rng& rng) {
  Trajectory t;
  Board b(learner.board_size());
  nn::Workspace<float> ws;
  while (!b.terminal()) {
    const bool own = b.to_move() == learner_colour;
    const nn::Network<float>& player = own ? learner : opponent;
    const nn::Output out = player.forward(encode(b), b.legal_mask(), b.to_move(), temperature, ws);
    ++t.evaluations;
    const int cell = static_cast<int>(imitation::sample_index(out.policy, rng));
    if (own) {
      nn::Example e;
      e.position = b;
      e.chosen_cell = cell;
      t.moves.push_back(std::move(e));
    }
    b.apply_unchecked(cell);
  }
  t.learner_won = *b.winner() == learner_colour;
  return t;
}

void policy_gradient_step(nn::Network<float>& net, std::span<const nn::Example> weighted_moves, double learning_rate) {
  if (weighted_moves.empty()) return;
  std::vector<float> grad;
  nn::compute_gradient(net, weighted_moves, {nn::PolicyTarget::cat, false}, grad);
  auto params = net.params();
  for (size_t i = 0; i < params.size(); ++i) params[i] -= static_cast<float>(learning_rate * grad[i]);
  net.enforce_hex_mask();
}

UpdateStats reinforce_update(nn::Network<float>& net, ReinforceState& state, const ReinforceConfig& config) {
  config.validate();
  if (state.pool.empty()) throw ConfigError("opponent pool is empty");
  UpdateStats stats;
  stats.baseline_used = state.baseline;
  std::vector<nn::Example> batch;
  for (int g = 0; g < config.games_per_update; ++g) {
    Rng rng(derive_seed(config.seed, Stream::reinforce, {state.updates, static_cast<uint64_t>(g)}));
    const auto& opponent = *state.pool[static_cast<size_t>(uniform_int(rng, static_cast<int>(state.pool.size())))];
    const Color colour = (state.games + static_cast<uint64_t>(g)) % 2 == 0 ? Color::Black : Color::White;
    Trajectory t = play_learner_game(net, opponent, colour, config.temperature, rng);
    const double z = t.learner_won ? 1.0 : 0.0;
    for (nn::Example& e : t.moves) {
      e.weight = z - state.baseline;
      batch.push_back(std::move(e));
    }
    stats.wins += t.learner_won;
    stats.evaluations += t.evaluations;
    ++stats.games;
  }
  policy_gradient_step(net, batch, config.learning_rate);

  const double win_rate = static_cast<double>(stats.wins) / stats.games;
  state.baseline += config.baseline_rate * (win_rate - state.baseline);
  state.games += static_cast<uint64_t>(stats.games);
  state.evaluations += stats.evaluations;
  ++state.updates;
  if (config.snapshot_interval > 0 && state.updates % static_cast<uint64_t>(config.snapshot_interval) == 0) {
    state.pool.push_back(std::make_shared<const nn::Network<float>>(net));
    if (state.pool.size() > static_cast<size_t>(config.pool_size)) state.pool.erase(state.pool.begin());
  }
  return stats;
}

ReinforceState run_reinforce(nn::Network<float>& net, const ReinforceConfig& config, uint64_t evaluation_budget) {
  ReinforceState state = make_reinforce_state(net);
  while (state.evaluations < evaluation_budget) reinforce_update(net, state, config);
  return state;
}

}  // namespace hexit::baseline
