#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hexit/core/board.hpp"
#include "hexit/nn/training.hpp"
#include "hexit/search/mcts.hpp"

namespace hexit::imitation {

struct Provenance {
  uint32_t iteration = 0;
  uint32_t game = 0;
  uint32_t ply = 0;

  auto operator<=>(const Provenance&) const = default;
};

// Monte Carlo value target: `wins` of `games` continuations were won by the
// player to move. A single continuation gives a binary z.
struct ValueTarget {
  uint32_t wins = 0;
  uint32_t games = 0;

  double z() const { return static_cast<double>(wins) / games; }
  bool operator==(const ValueTarget&) const = default;
};

/// One expert-labelled position. The position is kept as its move history;
/// the search target is kept as sparse visit counts so that it round-trips
/// exactly.
struct TrainingSample {
  int board_size = 0;
  std::vector<int> history;  // cell indices, Black first
  std::vector<std::pair<int, uint32_t>> visits;  // (cell, n(s,a)), cells ascending, counts > 0
  uint32_t total = 0;                            // n(s) = sum of counts
  int chosen = -1;                               // most visited cell, lowest index on ties
  std::optional<ValueTarget> value;
  Provenance provenance;

  Color to_move() const { return history.size() % 2 == 0 ? Color::Black : Color::White; }
  Board position() const;
  std::vector<double> tpt() const;  // dense n*n distribution
  nn::Example to_example() const;

  // Throws FormatError when an invariant does not hold.
  void validate() const;
  bool operator==(const TrainingSample&) const = default;
};

// Sample from a finished root search.
TrainingSample make_sample(const Board& position, const search::SearchResult& result, Provenance provenance);

struct DatasetInfo {
  int board_size = 0;
  std::string expert;    // expert descriptor, no whitespace
  std::string explorer;  // exploration policy descriptor, no whitespace

  bool operator==(const DatasetInfo&) const = default;
};

struct Dataset {
  DatasetInfo info;
  std::vector<TrainingSample> samples;

  size_t size() const { return samples.size(); }
  bool operator==(const Dataset&) const = default;
};

// Text format: a versioned header line followed by one record per line.
void write_dataset(std::ostream& out, const Dataset& dataset);
Dataset read_dataset(std::istream& in);
std::string dataset_to_string(const Dataset& dataset);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

// Descriptor with whitespace replaced so it fits in a header token.
std::string sanitize_descriptor(std::string text);

}  // namespace hexit::imitation
