#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hexit {

// Black connects North-South, White connects West-East. Black moves first.
enum class Color : uint8_t { Black = 0, White = 1 };

constexpr Color opponent(Color c) { return c == Color::Black ? Color::White : Color::Black; }
constexpr int index_of(Color c) { return static_cast<int>(c); }
char color_char(Color c);

enum class Cell : uint8_t { Empty = 0, Black = 1, White = 2 };

constexpr Cell stone_of(Color c) { return c == Color::Black ? Cell::Black : Cell::White; }

constexpr int kMinBoardSize = 2;
constexpr int kMaxBoardSize = 13;

struct Move {
  int row = 0;
  int col = 0;

  constexpr int index(int size) const { return row * size + col; }
  static constexpr Move from_index(int index, int size) { return {index / size, index % size}; }

  auto operator<=>(const Move&) const = default;
};

// Hex neighbourhood offsets of a cell on the rhombus, in a fixed order.
inline constexpr std::array<std::array<int, 2>, 6> kHexNeighbours = {{
    {-1, 0}, {-1, 1}, {0, -1}, {0, 1}, {1, -1}, {1, 0}}};

enum class Edge : uint8_t { North = 0, South = 1, West = 2, East = 3 };

struct GameResult {
  Color winner;
  int length;  // plies
};

/// A Hex position with incremental edge connectivity.
///
/// Connectivity is a union-find over the n*n cells plus four virtual edge
/// nodes. Black stones on row 0 / row n-1 are joined to North / South, White
/// stones on column 0 / column n-1 to West / East. A colour has won once its
/// two virtual nodes share a component.
///
/// Value type: copying is cheap enough for rollouts and the object has no
/// hidden mutable state, so const instances are safe to share across threads.
class Board {
 public:
  explicit Board(int size);

  // Builds a position directly from a cell grid (row-major). Stone counts must
  // satisfy black - white in {0, 1}; the stored history is a reconstruction
  // alternating row-major black and white stones.
  static Board from_cells(int size, std::span<const Cell> cells);
  static Board from_history(int size, std::span<const int> cell_indices);

  int size() const { return size_; }
  int cell_count() const { return size_ * size_; }
  Color to_move() const { return to_move_; }
  Cell at(int row, int col) const { return cells_[row * size_ + col]; }
  Cell at(int index) const { return cells_[index]; }
  std::span<const Cell> cells() const { return cells_; }
  std::span<const Move> history() const { return history_; }
  int ply() const { return static_cast<int>(history_.size()); }

  bool on_board(Move m) const { return m.row >= 0 && m.row < size_ && m.col >= 0 && m.col < size_; }
  bool is_legal(Move m) const;

  // Empty cells in row-major order; empty once the game is decided.
  std::vector<Move> legal_moves() const;
  std::vector<uint8_t> legal_mask() const;

  // Returns the successor position. Throws InvalidMove for occupied or
  // off-board cells, or when the game is already over.
  Board play(Move m) const;
  // In-place variant used on locally owned copies (rollouts, tree descent).
  void apply(Move m);
  // Unchecked in-place placement of an empty cell index; the caller guarantees legality.
  void apply_unchecked(int cell);

  std::optional<Color> winner() const;
  bool terminal() const { return winner().has_value(); }

  // True if the stone at `cell` is in the same component as the virtual node of `edge`.
  bool connected_to(int cell, Edge edge) const;
  bool edges_connected(Edge a, Edge b) const { return find(virtual_node(a)) == find(virtual_node(b)); }

  // Text diagram with rows indented to show the rhombus.
  std::string to_text() const;

  bool operator==(const Board& other) const {
    return size_ == other.size_ && to_move_ == other.to_move_ && cells_ == other.cells_;
  }

 private:
  int virtual_node(Edge e) const { return size_ * size_ + static_cast<int>(e); }
  int find(int x) const;
  int find_compress(int x);
  void unite(int a, int b);
  void place(int cell, Color c);

  int size_;
  Color to_move_ = Color::Black;
  std::vector<Cell> cells_;
  std::vector<Move> history_;
  std::vector<int> parent_;
  std::vector<uint8_t> rank_;
};

int reward_for(const GameResult& result, Color perspective);

}  // namespace hexit
