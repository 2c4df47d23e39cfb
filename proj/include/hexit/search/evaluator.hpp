#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hexit/core/board.hpp"
#include "hexit/core/encoding.hpp"

namespace hexit::search {

// One position awaiting a network evaluation.
struct EvalRequest {
  EncodedState input;
  std::vector<uint8_t> legal;  // n*n mask, at least one entry set
  Color to_move = Color::Black;
  double temperature = 1.0;
};

struct Evaluation {
  std::vector<double> policy;   // n*n probabilities, zero on illegal cells
  std::optional<double> value;  // P(player to move wins), when value heads exist
};

EvalRequest make_request(const Board& board, double temperature);

// Batched network interface used by the search. Implementations must produce
// per-request results that do not depend on batch composition.
class Evaluator {
 public:
  virtual ~Evaluator() = default;
  virtual std::vector<Evaluation> evaluate(std::span<const EvalRequest> batch) = 0;
  virtual bool has_value() const = 0;
  virtual uint64_t evaluations() const = 0;
};

}  // namespace hexit::search
