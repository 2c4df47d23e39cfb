#include "hexit/imitation/builder.hpp"

#include <algorithm>
#include <iostream>
#include <map>
#include <numeric>

namespace hexit::imitation {

Board sample_position(int board_size, Agent& explorer, Rng& rng) {
  Board game(board_size);
  std::vector<int> history;
  while (!game.terminal()) {
    const Move m = explorer.select_move(game, rng);
    game.apply(m);
    history.push_back(m.index(board_size));
  }
  const int ply = uniform_int(rng, static_cast<int>(history.size()));
  return Board::from_history(board_size, std::span<const int>(history.data(), static_cast<size_t>(ply)));
}

std::vector<LabelTask> explore_positions(int board_size, Agent& explorer, uint64_t master, uint32_t iteration,
                                         uint32_t first_game, int count) {
  std::vector<LabelTask> tasks;
  tasks.reserve(static_cast<size_t>(std::max(count, 0)));
  for (int k = 0; k < count; ++k) {
    const uint32_t game = first_game + static_cast<uint32_t>(k);
    Rng rng(derive_seed(master, Stream::explore, {iteration, game}));
    LabelTask t;
    t.position = sample_position(board_size, explorer, rng);
    t.provenance = {iteration, game, static_cast<uint32_t>(t.position.ply())};
    t.seed = derive_seed(master, Stream::label, {iteration, game});
    tasks.push_back(std::move(t));
  }
  return tasks;
}

std::optional<TrainingSample> label_with_expert(const LabelTask& task, const search::SearchConfig& expert,
                                                search::Evaluator* network) {
  if (task.position.terminal()) {
    std::cerr << "warning: skipping terminal position (iteration " << task.provenance.iteration << ", game "
              << task.provenance.game << ")\n";
    return std::nullopt;
  }
  search::SearchConfig c = expert;
  c.seed = task.seed;
  return make_sample(task.position, search::run_search(task.position, c, network), task.provenance);
}

std::vector<TrainingSample> label_sequential(std::span<const LabelTask> tasks, const search::SearchConfig& expert,
                                             search::Evaluator* network) {
  std::vector<TrainingSample> out;
  out.reserve(tasks.size());
  for (const LabelTask& t : tasks) {
    if (auto s = label_with_expert(t, expert, network)) out.push_back(std::move(*s));
  }
  return out;
}

std::string explorer_descriptor(int explore_iterations) {
  return "mcts:" + std::to_string(explore_iterations) + ":sample";
}

std::string expert_descriptor(const search::SearchConfig& expert) {
  return std::string(search::to_string(expert.mode)) + ":" + std::to_string(expert.iterations);
}

Dataset build_initial_dataset(const InitialDatasetConfig& config) {
  search::SearchConfig explore = search::SearchConfig::defaults(search::SearchMode::vanilla);
  explore.iterations = config.explore_iterations;
  MctsAgent explorer(explore, nullptr, Selection::sample);
  Dataset d;
  d.info = {config.board_size, expert_descriptor(config.expert), explorer_descriptor(config.explore_iterations)};
  const auto tasks = explore_positions(config.board_size, explorer, config.seed, config.iteration, 0, config.count);
  d.samples = label_sequential(tasks, config.expert, nullptr);
  return d;
}

void dagger_extend(Dataset& dataset, std::shared_ptr<const nn::Network<float>> apprentice, int count,
                   const search::SearchConfig& expert, search::Evaluator* network, uint64_t master,
                   uint32_t iteration) {
  if (count <= 0) return;
  uint32_t next_game = 0;
  for (const TrainingSample& s : dataset.samples) {
    if (s.provenance.iteration == iteration) next_game = std::max(next_game, s.provenance.game + 1);
  }
  ApprenticeAgent explorer(std::move(apprentice), Selection::sample, 1.0);
  const auto tasks = explore_positions(dataset.info.board_size, explorer, master, iteration, next_game, count);
  auto labelled = label_sequential(tasks, expert, network);
  dataset.samples.insert(dataset.samples.end(), labelled.begin(), labelled.end());
}

std::pair<std::vector<nn::Example>, std::vector<nn::Example>> split_validation(std::span<const TrainingSample> samples,
                                                                               double fraction, uint64_t seed) {
  std::map<uint32_t, std::vector<size_t>> by_iteration;
  for (size_t i = 0; i < samples.size(); ++i) by_iteration[samples[i].provenance.iteration].push_back(i);
  std::vector<uint8_t> held_out(samples.size(), 0);
  for (auto& [iteration, indices] : by_iteration) {
    Rng rng(derive_seed(seed, Stream::train, {iteration}));
    std::shuffle(indices.begin(), indices.end(), rng);
    const auto k = static_cast<size_t>(fraction * static_cast<double>(indices.size()));
    for (size_t j = 0; j < k; ++j) held_out[indices[j]] = 1;
  }
  std::pair<std::vector<nn::Example>, std::vector<nn::Example>> out;
  for (size_t i = 0; i < samples.size(); ++i) (held_out[i] ? out.second : out.first).push_back(samples[i].to_example());
  return out;
}

}  // namespace hexit::imitation
