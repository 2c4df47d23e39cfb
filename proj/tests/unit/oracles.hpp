#pragma once

// Independent reference implementations used only by tests. Nothing here
// touches the union-find or the search code paths under test.

#include <map>
#include <optional>
#include <vector>

#include "hexit/core/board.hpp"

namespace hexit::testing {

// Flood fill from the starting edge of `colour` over its stones.
inline bool dfs_connected(const std::vector<Cell>& cells, int n, Color colour) {
  const Cell stone = stone_of(colour);
  std::vector<char> seen(cells.size(), 0);
  std::vector<int> stack;
  for (int k = 0; k < n; ++k) {
    const int cell = colour == Color::Black ? k : k * n;  // row 0 or column 0
    if (cells[cell] == stone) {
      stack.push_back(cell);
      seen[cell] = 1;
    }
  }
  while (!stack.empty()) {
    const int cell = stack.back();
    stack.pop_back();
    const int r = cell / n, c = cell % n;
    if ((colour == Color::Black && r == n - 1) || (colour == Color::White && c == n - 1)) return true;
    const int dr[6] = {-1, -1, 0, 0, 1, 1};
    const int dc[6] = {0, 1, -1, 1, -1, 0};
    for (int k = 0; k < 6; ++k) {
      const int rr = r + dr[k], cc = c + dc[k];
      if (rr < 0 || rr >= n || cc < 0 || cc >= n) continue;
      const int nb = rr * n + cc;
      if (!seen[nb] && cells[nb] == stone) {
        seen[nb] = 1;
        stack.push_back(nb);
      }
    }
  }
  return false;
}

inline std::optional<Color> dfs_winner(const std::vector<Cell>& cells, int n) {
  if (dfs_connected(cells, n, Color::Black)) return Color::Black;
  if (dfs_connected(cells, n, Color::White)) return Color::White;
  return std::nullopt;
}

// Exhaustive negamax over cell grids with DFS win detection; returns true if
// the player to move wins with perfect play.
class Solver {
 public:
  explicit Solver(int n) : n_(n) {}

  bool to_move_wins(std::vector<Cell> cells, Color to_move) {
    const auto w = dfs_winner(cells, n_);
    if (w) return *w == to_move;
    auto key = std::make_pair(cells, to_move);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    bool win = false;
    for (size_t i = 0; i < cells.size() && !win; ++i) {
      if (cells[i] != Cell::Empty) continue;
      cells[i] = stone_of(to_move);
      win = !to_move_wins(cells, opponent(to_move));
      cells[i] = Cell::Empty;
    }
    memo_[key] = win;
    return win;
  }

  bool move_wins(const Board& board, int cell) {
    std::vector<Cell> cells(board.cells().begin(), board.cells().end());
    cells[cell] = stone_of(board.to_move());
    return !to_move_wins(cells, opponent(board.to_move()));
  }

 private:
  int n_;
  std::map<std::pair<std::vector<Cell>, Color>, bool> memo_;
};

}  // namespace hexit::testing
