#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "hexit/evaluation/elo.hpp"

namespace hexit::evaluation {

struct CurveConfig {
  int games_per_pair = 20;
  int opening_plies = 2;  // greedy apprentices are deterministic, so games start from random openings
  double prior_draws = 1.0;
  uint64_t seed = 0;
  int workers = 1;
};

struct CurvePoint {
  int iteration = 0;  // 0 is the initial checkpoint
  std::string checkpoint;
  uint64_t evaluations = 0;  // cumulative network evaluations when the checkpoint was written
  double elo = 0.0;
};

struct Curve {
  std::vector<CurvePoint> points;
  EloTable table;
  std::vector<MatchRecord> records;
};

// Round robin between the greedy apprentices of every checkpoint in a run
// directory, rated relative to ckpt_0.
Curve training_curve(const std::filesystem::path& run_dir, const CurveConfig& config = {});

// Two-column "evaluations elo" table.
void write_curve(std::ostream& out, const Curve& curve);

}  // namespace hexit::evaluation
