#pragma once

#include <atomic>
#include <memory>
#include <string>

#include "hexit/core/board.hpp"
#include "hexit/core/rng.hpp"
#include "hexit/nn/evaluator.hpp"
#include "hexit/nn/network.hpp"
#include "hexit/search/mcts.hpp"

namespace hexit::imitation {

struct Decision {
  Move move;
  uint64_t evaluations = 0;  // network evaluations this move consumed
};

// A move-selection policy. All randomness comes from the caller's rng, and
// implementations are safe to call from several threads at once.
class Agent {
 public:
  virtual ~Agent() = default;
  virtual std::string id() const = 0;

  Decision decide(const Board& board, Rng& rng) {
    Decision d = choose(board, rng);
    total_ += d.evaluations;
    return d;
  }
  Move select_move(const Board& board, Rng& rng) { return decide(board, rng).move; }
  // Network evaluations consumed so far.
  uint64_t evaluations() const { return total_.load(); }

 protected:
  virtual Decision choose(const Board& board, Rng& rng) = 0;

 private:
  std::atomic<uint64_t> total_{0};
};

class RandomAgent final : public Agent {
 public:
  explicit RandomAgent(std::string name = "random") : name_(std::move(name)) {}
  std::string id() const override { return name_; }

 protected:
  Decision choose(const Board& board, Rng& rng) override;

 private:
  std::string name_;
};

enum class Selection {
  greedy,  // most visited / most probable move
  sample,  // proportional to visit counts / softmax probabilities
};

// Tree search; each move's search seed is drawn from the caller's rng.
class MctsAgent final : public Agent {
 public:
  MctsAgent(search::SearchConfig config, std::shared_ptr<search::Evaluator> network = nullptr,
            Selection selection = Selection::greedy, std::string name = "");

  std::string id() const override;
  const search::SearchConfig& config() const { return config_; }

 protected:
  Decision choose(const Board& board, Rng& rng) override;

 private:
  search::SearchConfig config_;
  std::shared_ptr<search::Evaluator> network_;
  Selection selection_;
  std::string name_;
};

// The bare apprentice: greedy argmax of its policy, or a sample at the given
// temperature.
class ApprenticeAgent final : public Agent {
 public:
  ApprenticeAgent(std::shared_ptr<const nn::Network<float>> network, Selection selection = Selection::greedy,
                  double temperature = 1.0, std::string name = "apprentice");

  std::string id() const override { return name_; }
  const nn::Network<float>& network() const { return *network_; }

 protected:
  Decision choose(const Board& board, Rng& rng) override;

 private:
  std::shared_ptr<const nn::Network<float>> network_;
  Selection selection_;
  double temperature_;
  std::string name_;
};

// Index drawn with probability proportional to the weights.
size_t sample_index(std::span<const double> weights, Rng& rng);

}  // namespace hexit::imitation
