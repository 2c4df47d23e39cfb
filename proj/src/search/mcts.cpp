#include "hexit/search/mcts.hpp"

#include <algorithm>
#include <stdexcept>

#include "hexit/core/error.hpp"

namespace hexit::search {

std::string_view to_string(SearchMode mode) {
  switch (mode) {
    case SearchMode::vanilla: return "vanilla";
    case SearchMode::policy: return "policy";
    case SearchMode::policy_value: return "policy_value";
  }
  return "?";
}

SearchMode parse_search_mode(std::string_view text) {
  if (text == "vanilla") return SearchMode::vanilla;
  if (text == "policy") return SearchMode::policy;
  if (text == "policy_value") return SearchMode::policy_value;
  throw ConfigError("unknown search mode '" + std::string(text) + "'");
}

SearchConfig SearchConfig::defaults(SearchMode mode) {
  SearchConfig c;
  c.mode = mode;
  c.iterations = 10000;
  c.c_rave = 3000.0;
  if (mode == SearchMode::vanilla) {
    c.c_b = 0.25;
    c.expansion_threshold = 0;
    return c;
  }
  c.c_b = 0.05;
  c.expansion_threshold = 1;
  c.w_a = 100.0;
  c.tau = 0.1;
  if (mode == SearchMode::policy_value) c.w_v = 0.75;
  return c;
}

EvalRequest make_request(const Board& board, double temperature) {
  return {encode(board), board.legal_mask(), board.to_move(), temperature};
}

std::vector<double> SearchResult::distribution() const {
  std::vector<double> dist(static_cast<size_t>(board_size) * board_size, 0.0);
  for (const auto& [cell, count] : root_visits) dist[cell] = static_cast<double>(count) / total_visits;
  return dist;
}

int argmax_cell(std::span<const std::pair<int, uint32_t>> visits) {
  int best = -1;
  uint32_t best_count = 0;
  for (const auto& [cell, count] : visits) {
    if (best < 0 || count > best_count || (count == best_count && cell < best)) {
      best = cell;
      best_count = count;
    }
  }
  return best;
}

Search::Search(const Board& root, const SearchConfig& config)
    : root_(root), config_(config), rng_(config.seed), board_(root) {
  if (root.terminal()) throw InvalidMove("cannot search from a terminal position");
  if (config.iterations < 0) throw ConfigError("iterations must be non-negative");
  nodes_.reserve(static_cast<size_t>(config.iterations) + 1);
  played_ply_.assign(static_cast<size_t>(root.cell_count()), -1);
  empties_.reserve(static_cast<size_t>(root.cell_count()));
  add_node(root_);
  nodes_[0].stats.visits = 1;
}

int Search::add_node(const Board& board) {
  SearchNode node;
  node.to_move = board.to_move();
  node.first_edge = static_cast<int>(edges_.size());
  const bool terminal = board.terminal();
  if (!terminal) {
    for (int cell = 0; cell < board.cell_count(); ++cell) {
      if (board.at(cell) != Cell::Empty) continue;
      EdgeStats e;
      e.cell = cell;
      edges_.push_back(e);
    }
  }
  node.edge_count = static_cast<int>(edges_.size()) - node.first_edge;
  node.evaluated = !config_.uses_network() || terminal;
  node.stats.has_prior = terminal;
  nodes_.push_back(node);
  return static_cast<int>(nodes_.size()) - 1;
}

std::optional<EvalRequest> Search::advance() {
  if (pending_) throw std::logic_error("search is suspended awaiting an evaluation");
  if (!nodes_[0].evaluated) {
    pending_ = Pending{0, true};
    return make_request(root_, config_.tau);
  }
  while (completed_ < config_.iterations) {
    if (begin_simulation()) return make_request(board_, config_.tau);
    finish_simulation(std::nullopt);
  }
  return std::nullopt;
}

void Search::resume(const Evaluation& evaluation) {
  if (!pending_) throw std::logic_error("resume() without a pending evaluation");
  const Pending p = *pending_;
  pending_.reset();
  apply_evaluation(p.node, evaluation);
  if (!p.is_root) finish_simulation(evaluation.value);
}

void Search::apply_evaluation(int node, const Evaluation& evaluation) {
  if (static_cast<int>(evaluation.policy.size()) != root_.cell_count()) {
    throw std::invalid_argument("evaluation policy has the wrong size");
  }
  if (config_.mode == SearchMode::policy_value && !evaluation.value) {
    throw ConfigError("policy_value search requires value estimates");
  }
  SearchNode& n = nodes_[node];
  for (int i = 0; i < n.edge_count; ++i) {
    EdgeStats& e = edges_[n.first_edge + i];
    e.prior = evaluation.policy[e.cell];
  }
  n.stats.has_prior = true;
  n.evaluated = true;
}

bool Search::begin_simulation() {
  board_ = root_;
  path_.clear();
  leaf_ = -1;
  std::fill(played_ply_.begin(), played_ply_.end(), -1);

  int node = 0;
  while (!board_.terminal()) {
    leaf_ = -1;
    const SearchNode& n = nodes_[node];
    const int e = n.first_edge + select_edge(edges_of(node), n.stats, config_);
    path_.push_back({node, e});
    const int cell = edges_[e].cell;
    played_ply_[cell] = static_cast<int>(path_.size()) - 1;
    board_.apply_unchecked(cell);

    if (edges_[e].child >= 0) {
      node = edges_[e].child;
      leaf_ = node;
      continue;
    }
    if (edges_[e].visits >= static_cast<uint32_t>(config_.expansion_threshold)) {
      const int child = add_node(board_);
      edges_[e].child = child;
      leaf_ = child;
      if (!nodes_[child].evaluated) {
        pending_ = Pending{child, false};
        return true;
      }
    }
    break;
  }
  return false;
}

void Search::finish_simulation(std::optional<double> leaf_value) {
  // Uniform rollout to the end of the game.
  if (!board_.terminal()) {
    empties_.clear();
    for (int cell = 0; cell < board_.cell_count(); ++cell) {
      if (board_.at(cell) == Cell::Empty) empties_.push_back(cell);
    }
    int ply = static_cast<int>(path_.size());
    for (size_t k = 0; !board_.terminal(); ++k, ++ply) {
      const size_t pick = k + static_cast<size_t>(uniform_int(rng_, static_cast<int>(empties_.size() - k)));
      std::swap(empties_[k], empties_[pick]);
      const int cell = empties_[k];
      played_ply_[cell] = ply;
      board_.apply_unchecked(cell);
    }
  }
  const Color winner = *board_.winner();
  // A leaf value is P(player to move at the leaf wins).
  const Color evaluated_side = leaf_value ? nodes_[leaf_].to_move : Color::Black;

  auto rave_update = [&](int node, int ply, double reward) {
    SearchNode& n = nodes_[node];
    for (int i = 0; i < n.edge_count; ++i) {
      EdgeStats& f = edges_[n.first_edge + i];
      const int p = played_ply_[f.cell];
      if (p >= ply && (p - ply) % 2 == 0) {
        ++f.rave_visits;
        f.rave_reward += reward;
        ++n.stats.rave_visits;
      }
    }
  };

  for (size_t i = 0; i < path_.size(); ++i) {
    const Step& step = path_[i];
    SearchNode& n = nodes_[step.node];
    const Color actor = n.to_move;
    const double reward = winner == actor ? 1.0 : 0.0;
    EdgeStats& e = edges_[step.edge];
    ++e.visits;
    e.reward += reward;
    ++n.stats.visits;
    if (leaf_value) {
      e.value_sum += actor == evaluated_side ? *leaf_value : 1.0 - *leaf_value;
      ++e.value_count;
    }
    rave_update(step.node, static_cast<int>(i), reward);
  }
  if (leaf_ >= 0) {
    SearchNode& leaf = nodes_[leaf_];
    ++leaf.stats.visits;
    rave_update(leaf_, static_cast<int>(path_.size()), winner == leaf.to_move ? 1.0 : 0.0);
  }
  ++completed_;
}

SearchResult Search::result() const {
  SearchResult r;
  r.board_size = root_.size();
  double reward = 0.0;
  for (const EdgeStats& e : edges_of(0)) {
    r.root_visits.emplace_back(e.cell, e.visits);
    r.total_visits += e.visits;
    reward += e.reward;
  }
  if (r.total_visits > 0) {
    r.chosen = Move::from_index(argmax_cell(r.root_visits), root_.size());
    r.root_value = reward / r.total_visits;
  } else {
    r.chosen = Move::from_index(edges_of(0).front().cell, root_.size());
  }
  return r;
}

SearchResult run_search(const Board& root, const SearchConfig& config, Evaluator* network) {
  if (config.uses_network()) {
    if (network == nullptr) throw ConfigError("search mode '" + std::string(to_string(config.mode)) + "' requires a network");
    if (config.mode == SearchMode::policy_value && !network->has_value()) {
      throw ConfigError("policy_value search requires a network with value heads");
    }
  }
  Search search(root, config);
  while (auto request = search.advance()) {
    auto out = network->evaluate(std::span<const EvalRequest>(&*request, 1));
    search.resume(out.front());
  }
  return search.result();
}

}  // namespace hexit::search
