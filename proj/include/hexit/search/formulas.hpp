#pragma once

#include <cstdint>
#include <span>

#include "hexit/search/config.hpp"

namespace hexit::search {

// Per-edge accumulators. Rewards are stored from the perspective of the
// player to move at the edge's parent node.
struct EdgeStats {
  int cell = -1;
  int child = -1;
  uint32_t visits = 0;
  double reward = 0.0;
  uint32_t rave_visits = 0;
  double rave_reward = 0.0;
  double prior = 0.0;
  double value_sum = 0.0;
  uint32_t value_count = 0;
};

struct NodeStats {
  uint32_t visits = 0;
  uint64_t rave_visits = 0;  // sum of rave_visits over the node's edges
  bool has_prior = false;
};

// r/n + c_b * sqrt(ln n_s / n); +inf for an unvisited edge.
double uct(double reward, uint32_t visits, uint64_t parent_visits, double c_b);

// sqrt(c_rave / (3 n_s + c_rave)).
double rave_beta(uint64_t parent_visits, double c_rave);

// Blended RAVE/UCT score plus the mode's network bonuses.
double tree_policy_score(const EdgeStats& edge, const NodeStats& node, const SearchConfig& config);

// Index of the edge with the highest score. Ties (including several +inf
// scores) go to the higher prior, then to the lower index, which is row-major
// order because edges are created that way.
int select_edge(std::span<const EdgeStats> edges, const NodeStats& node, const SearchConfig& config);

}  // namespace hexit::search
