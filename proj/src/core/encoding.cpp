#include "hexit/core/encoding.hpp"

namespace hexit {

EncodedState encode(const Board& board) {
  const int n = board.size();
  EncodedState out;
  out.board_size = n;
  const int side = out.side();
  out.planes.assign(static_cast<size_t>(kChannelCount) * side * side, 0.0f);
  auto set = [&](int channel, int r, int c) {
    out.planes[(static_cast<size_t>(channel) * side + r) * side + c] = 1.0f;
  };

  const bool black_won = board.edges_connected(Edge::North, Edge::South);
  const bool white_won = board.edges_connected(Edge::West, Edge::East);

  for (int r = 0; r < side; ++r) {
    for (int c = 0; c < side; ++c) {
      const bool north = r < kEncodingPad;
      const bool south = r >= n + kEncodingPad;
      const bool west = c < kEncodingPad;
      const bool east = c >= n + kEncodingPad;
      if (north || south) {
        set(kBlackStones, r, c);
        // A band is connected to its own edge, and to the far edge once Black has joined them.
        if (north || black_won) set(kBlackNorth, r, c);
        if (south || black_won) set(kBlackSouth, r, c);
      }
      if (west || east) {
        set(kWhiteStones, r, c);
        if (west || white_won) set(kWhiteWest, r, c);
        if (east || white_won) set(kWhiteEast, r, c);
      }
      if (north || south || west || east) continue;

      const int cell = (r - kEncodingPad) * n + (c - kEncodingPad);
      const Cell stone = board.at(cell);
      if (stone == Cell::Black) {
        set(kBlackStones, r, c);
        if (board.connected_to(cell, Edge::North)) set(kBlackNorth, r, c);
        if (board.connected_to(cell, Edge::South)) set(kBlackSouth, r, c);
      } else if (stone == Cell::White) {
        set(kWhiteStones, r, c);
        if (board.connected_to(cell, Edge::West)) set(kWhiteWest, r, c);
        if (board.connected_to(cell, Edge::East)) set(kWhiteEast, r, c);
      }
    }
  }
  return out;
}

}  // namespace hexit
