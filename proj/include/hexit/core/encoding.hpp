#pragma once

#include <vector>

#include "hexit/core/board.hpp"

namespace hexit {

// Channel order of the network input.
enum Channel : int {
  kBlackStones = 0,
  kWhiteStones = 1,
  kBlackNorth = 2,
  kBlackSouth = 3,
  kWhiteWest = 4,
  kWhiteEast = 5,
  kChannelCount = 6,
};

constexpr int kEncodingPad = 2;

/// 6 x (n+4) x (n+4) binary planes, CHW order.
///
/// The board is framed by two rows/columns of dummy stones: Black on the
/// North and South bands, White on the West and East bands, both colours in
/// the four corner blocks. Dummy stones connect like real ones, so the North
/// band is always Black-connected-to-North, and so on.
struct EncodedState {
  int board_size = 0;
  std::vector<float> planes;

  int side() const { return board_size + 2 * kEncodingPad; }
  float at(int channel, int row, int col) const {
    return planes[(static_cast<size_t>(channel) * side() + row) * side() + col];
  }
};

EncodedState encode(const Board& board);

}  // namespace hexit
