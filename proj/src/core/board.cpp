#include "hexit/core/board.hpp"

#include <sstream>

#include "hexit/core/error.hpp"
#include "hexit/core/notation.hpp"

namespace hexit {

char color_char(Color c) { return c == Color::Black ? 'B' : 'W'; }

Board::Board(int size)
    : size_(size),
      cells_(static_cast<size_t>(size) * size, Cell::Empty),
      parent_(static_cast<size_t>(size) * size + 4),
      rank_(static_cast<size_t>(size) * size + 4, 0) {
  if (size < kMinBoardSize || size > kMaxBoardSize) {
    throw ConfigError("board size must be in [" + std::to_string(kMinBoardSize) + ", " +
                      std::to_string(kMaxBoardSize) + "], got " + std::to_string(size));
  }
  for (size_t i = 0; i < parent_.size(); ++i) parent_[i] = static_cast<int>(i);
  history_.reserve(cells_.size());
}

Board Board::from_cells(int size, std::span<const Cell> cells) {
  if (static_cast<int>(cells.size()) != size * size) throw FormatError("cell grid has the wrong size");
  std::vector<int> black, white;
  for (int i = 0; i < size * size; ++i) {
    if (cells[i] == Cell::Black) black.push_back(i);
    if (cells[i] == Cell::White) white.push_back(i);
  }
  const auto diff = static_cast<int>(black.size()) - static_cast<int>(white.size());
  if (diff != 0 && diff != 1) throw FormatError("stone counts are not reachable with Black moving first");
  Board board(size);
  for (size_t k = 0; k < black.size() + white.size(); ++k) {
    const bool black_turn = k % 2 == 0;
    const int cell = black_turn ? black[k / 2] : white[k / 2];
    board.place(cell, black_turn ? Color::Black : Color::White);
    board.history_.push_back(Move::from_index(cell, size));
    board.to_move_ = black_turn ? Color::White : Color::Black;
  }
  if (board.edges_connected(Edge::North, Edge::South) && board.edges_connected(Edge::West, Edge::East)) {
    throw FormatError("both colours connected; not a Hex position");
  }
  return board;
}

Board Board::from_history(int size, std::span<const int> cell_indices) {
  Board board(size);
  for (int cell : cell_indices) {
    if (cell < 0 || cell >= size * size) throw InvalidMove("history cell out of range: " + std::to_string(cell));
    board.apply(Move::from_index(cell, size));
  }
  return board;
}

bool Board::is_legal(Move m) const {
  return on_board(m) && cells_[m.index(size_)] == Cell::Empty && !terminal();
}

std::vector<Move> Board::legal_moves() const {
  std::vector<Move> moves;
  if (terminal()) return moves;
  moves.reserve(cells_.size() - history_.size());
  for (int i = 0; i < cell_count(); ++i) {
    if (cells_[i] == Cell::Empty) moves.push_back(Move::from_index(i, size_));
  }
  return moves;
}

std::vector<uint8_t> Board::legal_mask() const {
  std::vector<uint8_t> mask(cells_.size(), 0);
  if (terminal()) return mask;
  for (size_t i = 0; i < cells_.size(); ++i) mask[i] = cells_[i] == Cell::Empty;
  return mask;
}

Board Board::play(Move m) const {
  Board next = *this;
  next.apply(m);
  return next;
}

void Board::apply(Move m) {
  if (!on_board(m)) throw InvalidMove("move off the board: " + format_move(m));
  if (cells_[m.index(size_)] != Cell::Empty) throw InvalidMove("cell already occupied: " + format_move(m));
  if (terminal()) throw InvalidMove("game is already over");
  apply_unchecked(m.index(size_));
}

void Board::apply_unchecked(int cell) {
  place(cell, to_move_);
  history_.push_back(Move::from_index(cell, size_));
  to_move_ = opponent(to_move_);
}

void Board::place(int cell, Color c) {
  const Cell stone = stone_of(c);
  cells_[cell] = stone;
  const int row = cell / size_;
  const int col = cell % size_;
  for (const auto& [dr, dc] : kHexNeighbours) {
    const int r = row + dr;
    const int k = col + dc;
    if (r < 0 || r >= size_ || k < 0 || k >= size_) continue;
    const int nb = r * size_ + k;
    if (cells_[nb] == stone) unite(cell, nb);
  }
  if (c == Color::Black) {
    if (row == 0) unite(cell, virtual_node(Edge::North));
    if (row == size_ - 1) unite(cell, virtual_node(Edge::South));
  } else {
    if (col == 0) unite(cell, virtual_node(Edge::West));
    if (col == size_ - 1) unite(cell, virtual_node(Edge::East));
  }
}

std::optional<Color> Board::winner() const {
  if (edges_connected(Edge::North, Edge::South)) return Color::Black;
  if (edges_connected(Edge::West, Edge::East)) return Color::White;
  return std::nullopt;
}

bool Board::connected_to(int cell, Edge edge) const {
  if (cells_[cell] == Cell::Empty) return false;
  return find(cell) == find(virtual_node(edge));
}

int Board::find(int x) const {
  while (parent_[x] != x) x = parent_[x];
  return x;
}

int Board::find_compress(int x) {
  while (parent_[x] != x) {
    parent_[x] = parent_[parent_[x]];
    x = parent_[x];
  }
  return x;
}

void Board::unite(int a, int b) {
  a = find_compress(a);
  b = find_compress(b);
  if (a == b) return;
  if (rank_[a] < rank_[b]) std::swap(a, b);
  parent_[b] = a;
  if (rank_[a] == rank_[b]) ++rank_[a];
}

std::string Board::to_text() const {
  std::ostringstream out;
  out << "   ";
  for (int c = 0; c < size_; ++c) out << static_cast<char>('a' + c) << ' ';
  out << '\n';
  for (int r = 0; r < size_; ++r) {
    out << std::string(static_cast<size_t>(r), ' ');
    const std::string label = std::to_string(r + 1);
    out << std::string(label.size() < 2 ? 2 - label.size() : 0, ' ') << label << ' ';
    for (int c = 0; c < size_; ++c) {
      const Cell cell = at(r, c);
      out << (cell == Cell::Black ? 'B' : cell == Cell::White ? 'W' : '.');
      if (c + 1 < size_) out << ' ';
    }
    out << '\n';
  }
  return out.str();
}

int reward_for(const GameResult& result, Color perspective) { return result.winner == perspective ? 1 : 0; }

}  // namespace hexit
