#include "hexit/core/notation.hpp"

#include <cctype>
#include <sstream>
#include <vector>

#include "hexit/core/error.hpp"

namespace hexit {

std::string format_move(Move m) {
  return std::string(1, static_cast<char>('a' + m.col)) + std::to_string(m.row + 1);
}

Move parse_move(std::string_view text, int size) {
  std::string t;
  for (char ch : text) {
    if (!std::isspace(static_cast<unsigned char>(ch))) t += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  }
  if (t.size() < 2 || t[0] < 'a' || t[0] > 'z') throw InvalidMove("malformed move '" + std::string(text) + "'");
  int row = 0;
  for (size_t i = 1; i < t.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(t[i]))) throw InvalidMove("malformed move '" + std::string(text) + "'");
    row = row * 10 + (t[i] - '0');
    if (row > 1000) break;
  }
  const Move m{row - 1, t[0] - 'a'};
  if (m.row < 0 || m.row >= size || m.col < 0 || m.col >= size) {
    throw InvalidMove("move '" + std::string(text) + "' is off a " + std::to_string(size) + "x" +
                      std::to_string(size) + " board");
  }
  return m;
}

Board parse_diagram(std::string_view text) {
  std::vector<std::vector<Cell>> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    std::vector<Cell> row;
    bool has_stone_tokens = false;
    bool header = false;
    std::istringstream tokens(line);
    std::string tok;
    while (tokens >> tok) {
      if (tok == ".") {
        row.push_back(Cell::Empty);
        has_stone_tokens = true;
      } else if (tok == "B") {
        row.push_back(Cell::Black);
        has_stone_tokens = true;
      } else if (tok == "W") {
        row.push_back(Cell::White);
        has_stone_tokens = true;
      } else if (std::isdigit(static_cast<unsigned char>(tok[0]))) {
        continue;  // row label
      } else {
        header = true;  // column letters
      }
    }
    if (header && !has_stone_tokens) continue;
    if (header) throw FormatError("unexpected token in diagram line: " + line);
    if (!row.empty()) rows.push_back(std::move(row));
  }
  const int n = static_cast<int>(rows.size());
  std::vector<Cell> cells;
  for (const auto& r : rows) {
    if (static_cast<int>(r.size()) != n) throw FormatError("diagram is not square");
    cells.insert(cells.end(), r.begin(), r.end());
  }
  return Board::from_cells(n, cells);
}

}  // namespace hexit
