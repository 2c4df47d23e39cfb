#include "hexit/search/formulas.hpp"

#include <cmath>
#include <limits>

#include "hexit/core/error.hpp"

namespace hexit::search {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct NodeTerms {
  double log_visits;
  double log_rave_visits;
  double beta;
};

NodeTerms node_terms(const NodeStats& node, const SearchConfig& config) {
  return {node.visits > 0 ? std::log(static_cast<double>(node.visits)) : 0.0,
          node.rave_visits > 0 ? std::log(static_cast<double>(node.rave_visits)) : 0.0,
          rave_beta(node.visits, config.c_rave)};
}

double bound(double reward, uint32_t visits, double log_parent, double c_b) {
  if (visits == 0) return kInf;
  const double n = visits;
  return reward / n + c_b * std::sqrt(log_parent / n);
}

double score(const EdgeStats& e, const NodeTerms& t, const SearchConfig& config) {
  const double plain = bound(e.reward, e.visits, t.log_visits, config.c_b);
  const double rave = bound(e.rave_reward, e.rave_visits, t.log_rave_visits, config.c_b);
  // The endpoints are handled explicitly so that 0 * inf never appears.
  double s;
  if (t.beta >= 1.0) {
    s = rave;
  } else if (t.beta <= 0.0) {
    s = plain;
  } else {
    s = t.beta * rave + (1.0 - t.beta) * plain;
  }
  if (config.mode != SearchMode::vanilla) s += config.w_a * e.prior / (e.visits + 1.0);
  if (config.mode == SearchMode::policy_value && e.value_count > 0) {
    s += config.w_v * (e.value_sum / e.value_count);
  }
  return s;
}

void require_prior(const NodeStats& node, const SearchConfig& config) {
  if (config.mode != SearchMode::vanilla && !node.has_prior) {
    throw ConfigError("neural search mode requires a policy prior at every node");
  }
}

}  // namespace

double uct(double reward, uint32_t visits, uint64_t parent_visits, double c_b) {
  const double log_parent = parent_visits > 0 ? std::log(static_cast<double>(parent_visits)) : 0.0;
  return bound(reward, visits, log_parent, c_b);
}

double rave_beta(uint64_t parent_visits, double c_rave) {
  if (c_rave <= 0.0) return 0.0;
  return std::sqrt(c_rave / (3.0 * static_cast<double>(parent_visits) + c_rave));
}

double tree_policy_score(const EdgeStats& edge, const NodeStats& node, const SearchConfig& config) {
  require_prior(node, config);
  return score(edge, node_terms(node, config), config);
}

int select_edge(std::span<const EdgeStats> edges, const NodeStats& node, const SearchConfig& config) {
  require_prior(node, config);
  const NodeTerms terms = node_terms(node, config);
  int best = -1;
  double best_score = -kInf;
  double best_prior = -kInf;
  for (int i = 0; i < static_cast<int>(edges.size()); ++i) {
    const double s = score(edges[i], terms, config);
    if (best < 0 || s > best_score || (s == best_score && edges[i].prior > best_prior)) {
      best = i;
      best_score = s;
      best_prior = edges[i].prior;
    }
  }
  return best;
}

}  // namespace hexit::search
