#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "hexit/core/board.hpp"
#include "hexit/core/rng.hpp"
#include "hexit/search/config.hpp"
#include "hexit/search/evaluator.hpp"
#include "hexit/search/formulas.hpp"

namespace hexit::search {

struct SearchNode {
  NodeStats stats;
  int first_edge = 0;
  int edge_count = 0;
  Color to_move = Color::Black;
  bool evaluated = false;
};

struct SearchResult {
  int board_size = 0;
  std::vector<std::pair<int, uint32_t>> root_visits;  // (cell, n(s,a)) in row-major order
  uint32_t total_visits = 0;                         // sum of n(s,a) at the root
  Move chosen;                                       // most visited, row-major ties
  double root_value = 0.0;                           // mean root reward for the player to move

  std::vector<double> distribution() const;  // dense n*n, sums to 1
};

// Move with the highest count; ties go to the lowest cell index.
int argmax_cell(std::span<const std::pair<int, uint32_t>> visits);

/// One MCTS tree with RAVE and optional network guidance, runnable in
/// suspend/resume steps.
///
/// advance() runs simulations until the iteration budget is spent (returns
/// nullopt) or a freshly expanded node needs a network evaluation (returns the
/// request). The search then stays suspended until resume() supplies the
/// evaluation for exactly that node. All randomness comes from the config
/// seed and is consumed in the same order however the evaluations are
/// scheduled.
class Search {
 public:
  Search(const Board& root, const SearchConfig& config);

  std::optional<EvalRequest> advance();
  void resume(const Evaluation& evaluation);

  bool done() const { return completed_ >= config_.iterations && !pending_; }
  bool awaiting_evaluation() const { return pending_.has_value(); }
  int completed_simulations() const { return completed_; }

  SearchResult result() const;

  const SearchConfig& config() const { return config_; }
  std::span<const SearchNode> nodes() const { return nodes_; }
  std::span<const EdgeStats> edges() const { return edges_; }
  std::span<const EdgeStats> edges_of(int node) const {
    return {edges_.data() + nodes_[node].first_edge, static_cast<size_t>(nodes_[node].edge_count)};
  }

 private:
  struct Step {
    int node;
    int edge;  // absolute edge index
  };
  struct Pending {
    int node;
    bool is_root;
  };

  int add_node(const Board& board);
  void apply_evaluation(int node, const Evaluation& evaluation);
  // Runs the tree phase; returns true when the simulation must wait for an evaluation.
  bool begin_simulation();
  void finish_simulation(std::optional<double> leaf_value);

  Board root_;
  SearchConfig config_;
  Rng rng_;
  std::vector<SearchNode> nodes_;
  std::vector<EdgeStats> edges_;
  int completed_ = 0;
  std::optional<Pending> pending_;

  // Per-simulation scratch.
  Board board_;
  std::vector<Step> path_;
  int leaf_ = -1;
  std::vector<int> played_ply_;
  std::vector<int> empties_;
};

// Runs a complete search, answering evaluation requests one at a time.
// Throws ConfigError when the mode needs a network and none (or one without
// value heads) is supplied, InvalidMove when the root is terminal.
SearchResult run_search(const Board& root, const SearchConfig& config, Evaluator* network = nullptr);

}  // namespace hexit::search
