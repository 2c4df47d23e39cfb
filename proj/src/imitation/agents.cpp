#include "hexit/imitation/agents.hpp"

#include <stdexcept>

#include "hexit/core/error.hpp"

namespace hexit::imitation {

size_t sample_index(std::span<const double> weights, Rng& rng) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) throw std::invalid_argument("sample_index: weights sum to zero");
  double u = uniform_real(rng) * total;
  size_t last = 0;
  for (size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    last = i;
    if (u < weights[i]) return i;
    u -= weights[i];
  }
  return last;
}

Decision RandomAgent::choose(const Board& board, Rng& rng) {
  const auto moves = board.legal_moves();
  if (moves.empty()) throw InvalidMove("no legal moves");
  return {moves[static_cast<size_t>(uniform_int(rng, static_cast<int>(moves.size())))], 0};
}

MctsAgent::MctsAgent(search::SearchConfig config, std::shared_ptr<search::Evaluator> network, Selection selection,
                     std::string name)
    : config_(config), network_(std::move(network)), selection_(selection), name_(std::move(name)) {
  if (config_.uses_network()) {
    if (!network_) throw ConfigError("search mode '" + std::string(search::to_string(config_.mode)) + "' requires a network");
    if (config_.mode == search::SearchMode::policy_value && !network_->has_value()) {
      throw ConfigError("policy_value search requires a network with value heads");
    }
  }
}

std::string MctsAgent::id() const {
  if (!name_.empty()) return name_;
  std::string out = std::string(search::to_string(config_.mode)) + "-mcts:" + std::to_string(config_.iterations);
  if (selection_ == Selection::sample) out += ":sample";
  return out;
}

Decision MctsAgent::choose(const Board& board, Rng& rng) {
  search::SearchConfig c = config_;
  c.seed = rng();
  search::Search s(board, c);
  uint64_t evaluations = 0;
  while (auto request = s.advance()) {
    s.resume(network_->evaluate(std::span<const search::EvalRequest>(&*request, 1)).front());
    ++evaluations;
  }
  const search::SearchResult r = s.result();
  if (selection_ == Selection::greedy) return {r.chosen, evaluations};
  std::vector<double> weights;
  weights.reserve(r.root_visits.size());
  for (const auto& [cell, count] : r.root_visits) weights.push_back(count);
  return {Move::from_index(r.root_visits[sample_index(weights, rng)].first, board.size()), evaluations};
}

ApprenticeAgent::ApprenticeAgent(std::shared_ptr<const nn::Network<float>> network, Selection selection,
                                 double temperature, std::string name)
    : network_(std::move(network)), selection_(selection), temperature_(temperature), name_(std::move(name)) {}

Decision ApprenticeAgent::choose(const Board& board, Rng& rng) {
  if (board.size() != network_->board_size()) throw InvalidMove("apprentice board size mismatch");
  const nn::Output out = network_->forward(encode(board), board.legal_mask(), board.to_move(), temperature_);
  if (selection_ == Selection::sample) {
    return {Move::from_index(static_cast<int>(sample_index(out.policy, rng)), board.size()), 1};
  }
  int best = -1;
  for (int cell = 0; cell < board.cell_count(); ++cell) {
    if (board.at(cell) != Cell::Empty) continue;
    if (best < 0 || out.policy[cell] > out.policy[best]) best = cell;
  }
  return {Move::from_index(best, board.size()), 1};
}

}  // namespace hexit::imitation
