#include "hexit/evaluation/elo.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include "hexit/core/error.hpp"

namespace hexit::evaluation {

namespace {

// Tarjan's strongly connected components over the "beat at least once" graph.
std::vector<int> strong_components(const std::vector<std::vector<int>>& edges) {
  const int n = static_cast<int>(edges.size());
  std::vector<int> index(n, -1), low(n, 0), comp(n, -1), stack;
  std::vector<bool> on_stack(n, false);
  int counter = 0, components = 0;
  std::function<void(int)> visit = [&](int v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (int w : edges[v]) {
      if (index[w] < 0) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      int w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp[w] = components;
      } while (w != v);
      ++components;
    }
  };
  for (int v = 0; v < n; ++v) {
    if (index[v] < 0) visit(v);
  }
  return comp;
}

void check_connected(const std::vector<std::string>& agents, const std::vector<int>& comp, const char* what) {
  const int count = *std::max_element(comp.begin(), comp.end()) + 1;
  if (count <= 1) return;
  std::vector<std::vector<std::string>> groups(static_cast<size_t>(count));
  for (size_t i = 0; i < agents.size(); ++i) groups[static_cast<size_t>(comp[i])].push_back(agents[i]);
  std::ostringstream msg;
  msg << "cannot fit Elo: the " << what << " splits into " << count << " components:";
  for (const auto& g : groups) {
    msg << " {";
    for (size_t i = 0; i < g.size(); ++i) msg << (i ? ", " : "") << g[i];
    msg << "}";
  }
  throw ConfigError(msg.str());
}

}  // namespace

double EloTable::rating(const std::string& agent) const {
  for (size_t i = 0; i < agents.size(); ++i) {
    if (agents[i] == agent) return ratings[i];
  }
  throw ConfigError("no rating for agent '" + agent + "'");
}

double elo_win_probability(double r_i, double r_j) { return 1.0 / (1.0 + std::pow(10.0, (r_j - r_i) / 400.0)); }

EloTable fit_elo(const std::vector<MatchRecord>& records, const EloOptions& options) {
  if (options.prior_draws < 0) throw ConfigError("prior_draws must be non-negative");
  EloTable table;
  std::map<std::string, int> ids;
  auto id_of = [&](const std::string& name) {
    auto [it, inserted] = ids.try_emplace(name, static_cast<int>(table.agents.size()));
    if (inserted) table.agents.push_back(name);
    return it->second;
  };
  // wins[i][j]: games i won against j.
  std::map<std::pair<int, int>, double> wins;
  for (const MatchRecord& r : records) {
    const int a = id_of(r.agent_a);
    const int b = id_of(r.agent_b);
    if (a == b) throw ConfigError("record pits '" + r.agent_a + "' against itself");
    if (r.winner == r.agent_a) {
      wins[{a, b}] += 1;
    } else if (r.winner == r.agent_b) {
      wins[{b, a}] += 1;
    } else {
      throw ConfigError("record winner '" + r.winner + "' is not a participant");
    }
  }
  const int n = static_cast<int>(table.agents.size());
  table.ratings.assign(n, 0.0);
  table.games.assign(n, 0);
  table.scores.assign(n, 0.0);
  if (n == 0) {
    table.converged = true;
    return table;
  }

  // Symmetric game counts and (prior-adjusted) scores per pair.
  std::vector<std::vector<double>> games(n, std::vector<double>(n, 0.0));
  std::vector<std::vector<double>> won(n, std::vector<double>(n, 0.0));
  for (const auto& [pair, w] : wins) {
    games[pair.first][pair.second] += w;
    games[pair.second][pair.first] += w;
    won[pair.first][pair.second] += w;
    table.scores[pair.first] += w;
    table.games[pair.first] += static_cast<int>(w);
    table.games[pair.second] += static_cast<int>(w);
  }

  std::vector<std::vector<int>> edges(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (options.prior_draws > 0 ? games[i][j] > 0 : won[i][j] > 0) edges[i].push_back(j);
    }
  }
  check_connected(table.agents, strong_components(edges),
                  options.prior_draws > 0 ? "match graph" : "win graph (some group never beats or never loses to the rest)");

  if (options.prior_draws > 0) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j || games[i][j] == 0) continue;
        games[i][j] += options.prior_draws;
        won[i][j] += options.prior_draws / 2;
      }
    }
  }
  std::vector<double> score(n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) score[i] += won[i][j];
  }

  std::vector<double> gamma(n, 1.0);
  const double elo_per_nat = 400.0 / std::log(10.0);
  for (table.sweeps = 1; table.sweeps <= options.max_sweeps; ++table.sweeps) {
    const std::vector<double> before = gamma;
    for (int i = 0; i < n; ++i) {
      double denom = 0.0;
      for (int j = 0; j < n; ++j) {
        if (games[i][j] > 0) denom += games[i][j] / (gamma[i] + gamma[j]);
      }
      gamma[i] = score[i] / denom;
    }
    // Keep gamma[0] at 1 so the scale never drifts.
    const double g0 = gamma[0];
    double max_change = 0.0;
    for (int i = 0; i < n; ++i) {
      gamma[i] /= g0;
      max_change = std::max(max_change, std::abs(std::log(gamma[i] / before[i])) * elo_per_nat);
    }
    table.final_change = max_change;
    if (max_change < options.tolerance) {
      table.converged = true;
      break;
    }
  }
  table.sweeps = std::min(table.sweeps, options.max_sweeps);
  for (int i = 0; i < n; ++i) table.ratings[i] = std::log(gamma[i]) * elo_per_nat;
  for (const auto& [pair, w] : wins) {
    table.log_likelihood += w * std::log(elo_win_probability(table.ratings[pair.first], table.ratings[pair.second]));
  }
  return table;
}

void write_elo_table(std::ostream& out, const EloTable& table) {
  out << "# hexit-elo v1 agents=" << table.agents.size() << " sweeps=" << table.sweeps
      << " converged=" << (table.converged ? "yes" : "no") << " log_likelihood=" << table.log_likelihood << '\n';
  std::vector<size_t> order(table.agents.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return table.ratings[a] > table.ratings[b]; });
  for (size_t i : order) {
    char rating[32];
    std::snprintf(rating, sizeof rating, "%.2f", table.ratings[i]);
    out << table.agents[i] << ' ' << rating << ' ' << table.games[i] << ' ' << table.scores[i] << '\n';
  }
}

}  // namespace hexit::evaluation
