#pragma once

#include <string>
#include <string_view>

#include "hexit/core/board.hpp"

namespace hexit {

// Column letter + 1-based row number, e.g. "c2" is row 1, column 2.
std::string format_move(Move m);
// Throws InvalidMove on malformed text or a cell outside a board of `size`.
Move parse_move(std::string_view text, int size);

// Inverse of Board::to_text. Accepts any whitespace indentation; the column
// header line and row labels are optional.
Board parse_diagram(std::string_view text);

}  // namespace hexit
