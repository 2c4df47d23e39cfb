#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "hexit/imitation/agents.hpp"

namespace hexit::evaluation {

struct MatchRecord {
  std::string agent_a;
  std::string agent_b;
  std::string black;  // id of the agent playing Black
  int opening = -1;   // forced first cell in a sweep, -1 otherwise
  std::string winner;
  int plies = 0;
  std::vector<int> moves;  // full game, cell indices
  double seconds_per_move = 0.0;
  uint64_t evaluations_a = 0;  // network evaluations consumed by each agent in this game
  uint64_t evaluations_b = 0;

  bool operator==(const MatchRecord&) const = default;
};

struct MatchConfig {
  int board_size = 5;
  int games = 200;         // ignored with sweep
  bool sweep = false;      // every first move once per colour: 2 n^2 games
  int opening_plies = 0;   // random moves shared by each colour-swapped pair of games
  uint64_t seed = 0;
  int workers = 1;
};

struct MatchResult {
  std::vector<MatchRecord> records;
  int wins_a = 0;
  int wins_b = 0;
  int duplicates = 0;       // games repeating an earlier game move for move with the same colours
  bool degenerate = false;  // more than half of the games are duplicates

  double score_a() const { return records.empty() ? 0.0 : static_cast<double>(wins_a) / records.size(); }
};

// Games alternate colours (A is Black in even games). Deterministic given the
// seed: game k draws every random choice from its own stream.
MatchResult play_match(imitation::Agent& a, imitation::Agent& b, const MatchConfig& config);

// Line-delimited text, one record per line, behind a versioned header.
void write_match_records(std::ostream& out, const std::vector<MatchRecord>& records);
std::vector<MatchRecord> read_match_records(std::istream& in);
void save_match_records(const std::vector<MatchRecord>& records, const std::filesystem::path& path);
std::vector<MatchRecord> load_match_records(const std::filesystem::path& path);

}  // namespace hexit::evaluation
