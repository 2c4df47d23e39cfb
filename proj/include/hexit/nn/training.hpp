#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hexit/core/board.hpp"
#include "hexit/nn/network.hpp"

namespace hexit::nn {

enum class PolicyTarget { cat, tpt };

struct Example {
  Board position{2};
  std::vector<double> target;  // n*n distribution over legal cells
  int chosen_cell = -1;        // CAT target
  std::optional<double> value_target;  // P(player to move wins) target in [0,1]
  double weight = 1.0;
};

struct LossConfig {
  PolicyTarget policy = PolicyTarget::tpt;
  bool value = false;  // add the value loss (multitask); requires value heads
};

// Mean weighted loss over `batch`.
template <typename T>
double batch_loss(const Network<T>& net, std::span<const Example> batch, const LossConfig& loss);

// Mean weighted loss over `batch`; `grad` receives its exact gradient
// (resized and overwritten). Masked hexagonal taps always receive zero.
template <typename T>
double compute_gradient(const Network<T>& net, std::span<const Example> batch, const LossConfig& loss,
                        std::vector<T>& grad);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename T>
class Adam {
 public:
  Adam(size_t size, const AdamConfig& config) : config_(config), m_(size, 0.0), v_(size, 0.0) {}
  void step(std::span<T> params, std::span<const T> grad);

 private:
  AdamConfig config_;
  std::vector<double> m_, v_;
  uint64_t t_ = 0;
};

// Stops at the first epoch after which the validation loss has increased
// `rise_limit` times in a row, and points at the epoch just before that run
// of increases.
class EarlyStopping {
 public:
  explicit EarlyStopping(int rise_limit = 3) : rise_limit_(rise_limit) {}

  // Feed the validation loss of the next epoch; true means stop now.
  bool observe(double loss);
  int epochs() const { return epochs_; }
  int anchor_epoch() const { return anchor_; }
  bool anchor_moved() const { return anchor_moved_; }
  int rises() const { return rises_; }

 private:
  int rise_limit_;
  int epochs_ = 0;
  int anchor_ = 0;
  int rises_ = 0;
  bool anchor_moved_ = false;
  double last_ = 0.0;
};

struct TrainConfig {
  int batch_size = 250;
  int max_epochs = 200;
  int rise_limit = 3;
  AdamConfig adam;
  LossConfig loss;
  uint64_t seed = 0;
};

struct TrainReport {
  std::vector<double> train_loss;       // per epoch
  std::vector<double> validation_loss;  // per epoch, empty without a validation set
  int epochs_run = 0;
  bool stopped_early = false;
  int returned_epoch = 0;  // epoch whose parameters were kept
};

// Adam over shuffled minibatches with early stopping on `validation`. Without
// a validation set it runs max_epochs and keeps the final parameters.
template <typename T>
TrainReport train(Network<T>& net, std::span<const Example> train_set, std::span<const Example> validation,
                  const TrainConfig& config);

extern template double batch_loss(const Network<float>&, std::span<const Example>, const LossConfig&);
extern template double batch_loss(const Network<double>&, std::span<const Example>, const LossConfig&);
extern template double compute_gradient(const Network<float>&, std::span<const Example>, const LossConfig&,
                                        std::vector<float>&);
extern template double compute_gradient(const Network<double>&, std::span<const Example>, const LossConfig&,
                                        std::vector<double>&);
extern template TrainReport train(Network<float>&, std::span<const Example>, std::span<const Example>,
                                  const TrainConfig&);
extern template TrainReport train(Network<double>&, std::span<const Example>, std::span<const Example>,
                                  const TrainConfig&);

}  // namespace hexit::nn
