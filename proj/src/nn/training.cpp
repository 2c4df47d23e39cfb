#include "hexit/nn/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "hexit/core/encoding.hpp"
#include "hexit/core/rng.hpp"
#include "hexit/nn/losses.hpp"

namespace hexit::nn {

namespace {

struct SampleLoss {
  double loss;
  std::vector<double> d_logits;
  double d_value = 0.0;
};

template <typename T>
SampleLoss sample_loss(const Network<T>& net, const Example& ex, const LossConfig& cfg, Workspace<T>& ws) {
  const Board& pos = ex.position;
  const auto legal = pos.legal_mask();
  const Output out = net.forward(encode(pos), legal, pos.to_move(), 1.0, ws);

  SampleLoss s;
  std::vector<double> onehot;
  std::span<const double> target = ex.target;
  if (cfg.policy == PolicyTarget::cat) {
    onehot.assign(out.policy.size(), 0.0);
    onehot.at(static_cast<size_t>(ex.chosen_cell)) = 1.0;
    target = onehot;
    s.loss = loss_cat(out.policy, ex.chosen_cell);
  } else {
    s.loss = loss_tpt(out.policy, target, legal);
  }
  const double mass = std::accumulate(target.begin(), target.end(), 0.0);
  s.d_logits.resize(out.policy.size());
  for (size_t k = 0; k < out.policy.size(); ++k) {
    s.d_logits[k] = legal[k] ? ex.weight * (out.policy[k] * mass - target[k]) : 0.0;
  }
  if (cfg.value) {
    if (!net.has_value()) throw std::invalid_argument("value loss requested for a policy-only network");
    if (!ex.value_target) throw std::invalid_argument("value target absent from training example");
    s.loss += loss_value(*out.value, *ex.value_target);
    s.d_value = ex.weight * (*out.value - *ex.value_target);
  }
  s.loss *= ex.weight;
  return s;
}

}  // namespace

template <typename T>
double batch_loss(const Network<T>& net, std::span<const Example> batch, const LossConfig& loss) {
  if (batch.empty()) return 0.0;
  Workspace<T> ws;
  double total = 0.0;
  for (const Example& ex : batch) total += sample_loss(net, ex, loss, ws).loss;
  return total / static_cast<double>(batch.size());
}

template <typename T>
double compute_gradient(const Network<T>& net, std::span<const Example> batch, const LossConfig& loss,
                        std::vector<T>& grad) {
  if (batch.empty()) throw std::invalid_argument("gradient of an empty batch");
  grad.assign(net.params().size(), T(0));
  Workspace<T> ws, scratch;
  double total = 0.0;
  for (const Example& ex : batch) {
    const SampleLoss s = sample_loss(net, ex, loss, ws);
    total += s.loss;
    net.backward(ws, ex.position.to_move(), s.d_logits, s.d_value, grad, scratch);
  }
  const T scale = static_cast<T>(1.0 / static_cast<double>(batch.size()));
  for (T& g : grad) g *= scale;
  return total / static_cast<double>(batch.size());
}

template <typename T>
void Adam<T>::step(std::span<T> params, std::span<const T> grad) {
  ++t_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (size_t i = 0; i < params.size(); ++i) {
    const double g = grad[i];
    m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * g;
    v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * g * g;
    const double update = config_.learning_rate * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + config_.epsilon);
    params[i] = static_cast<T>(params[i] - update);
  }
}

bool EarlyStopping::observe(double loss) {
  ++epochs_;
  anchor_moved_ = false;
  if (epochs_ == 1 || !(loss > last_)) {
    anchor_ = epochs_;
    anchor_moved_ = true;
    rises_ = 0;
  } else {
    ++rises_;
  }
  last_ = loss;
  return rises_ >= rise_limit_;
}

template <typename T>
TrainReport train(Network<T>& net, std::span<const Example> train_set, std::span<const Example> validation,
                  const TrainConfig& config) {
  if (train_set.empty()) throw std::invalid_argument("cannot train on an empty dataset");
  if (config.batch_size < 1 || config.max_epochs < 0) throw std::invalid_argument("bad training configuration");

  Rng rng(derive_seed(config.seed, Stream::train, {}));
  Adam<T> adam(net.params().size(), config.adam);
  EarlyStopping stopper(config.rise_limit);
  std::vector<T> snapshot(net.params().begin(), net.params().end());
  std::vector<size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<Example> batch;
  std::vector<T> grad;
  TrainReport report;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    for (size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[static_cast<size_t>(uniform_int(rng, static_cast<int>(i)))]);
    }
    double epoch_loss = 0.0;
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(config.batch_size)) {
      const size_t end = std::min(order.size(), start + static_cast<size_t>(config.batch_size));
      batch.clear();
      for (size_t k = start; k < end; ++k) batch.push_back(train_set[order[k]]);
      epoch_loss += compute_gradient(net, std::span<const Example>(batch), config.loss, grad) * (end - start);
      adam.step(net.params(), grad);
      net.enforce_hex_mask();
    }
    report.train_loss.push_back(epoch_loss / static_cast<double>(order.size()));
    report.epochs_run = epoch;

    if (validation.empty()) continue;
    const double val = batch_loss(net, validation, config.loss);
    report.validation_loss.push_back(val);
    const bool stop = stopper.observe(val);
    if (stopper.anchor_moved()) std::copy(net.params().begin(), net.params().end(), snapshot.begin());
    if (stop) {
      report.stopped_early = true;
      break;
    }
  }
  if (validation.empty()) {
    report.returned_epoch = report.epochs_run;
  } else {
    std::copy(snapshot.begin(), snapshot.end(), net.params().begin());
    report.returned_epoch = stopper.anchor_epoch();
  }
  return report;
}

template class Adam<float>;
template class Adam<double>;
template double batch_loss(const Network<float>&, std::span<const Example>, const LossConfig&);
template double batch_loss(const Network<double>&, std::span<const Example>, const LossConfig&);
template double compute_gradient(const Network<float>&, std::span<const Example>, const LossConfig&,
                                 std::vector<float>&);
template double compute_gradient(const Network<double>&, std::span<const Example>, const LossConfig&,
                                 std::vector<double>&);
template TrainReport train(Network<float>&, std::span<const Example>, std::span<const Example>, const TrainConfig&);
template TrainReport train(Network<double>&, std::span<const Example>, std::span<const Example>, const TrainConfig&);

}  // namespace hexit::nn
