#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hexit/evaluation/match.hpp"

namespace hexit::evaluation {

struct EloOptions {
  // Virtual draws added to every pair that met. Zero gives the plain
  // maximum-likelihood fit, which needs every agent to have both won and lost
  // within each group (strong connectivity of the win graph).
  double prior_draws = 0.0;
  double tolerance = 0.01;  // Elo; stop once no rating moves more per sweep
  int max_sweeps = 100000;
};

struct EloTable {
  std::vector<std::string> agents;  // order of first appearance; agents[0] is anchored at 0
  std::vector<double> ratings;
  std::vector<int> games;
  std::vector<double> scores;  // wins per agent
  int sweeps = 0;
  double final_change = 0.0;
  bool converged = false;
  double log_likelihood = 0.0;

  double rating(const std::string& agent) const;
};

// p(i beats j) on the Elo scale.
double elo_win_probability(double r_i, double r_j);

// Bradley-Terry fit by minorization-maximization. Throws ConfigError naming
// the components when the records do not tie all agents together.
EloTable fit_elo(const std::vector<MatchRecord>& records, const EloOptions& options = {});

// "agent rating games score" lines behind a header with the fit diagnostics.
void write_elo_table(std::ostream& out, const EloTable& table);

}  // namespace hexit::evaluation
