#include "hexit/nn/evaluator.hpp"

namespace hexit::nn {

NetworkEvaluator::NetworkEvaluator(std::shared_ptr<const Network<float>> network) : network_(std::move(network)) {}

std::vector<search::Evaluation> NetworkEvaluator::evaluate(std::span<const search::EvalRequest> batch) {
  std::vector<search::Evaluation> out;
  out.reserve(batch.size());
  Workspace<float> ws;
  // Each request is computed independently, so results never depend on
  // which other requests share the batch.
  for (const search::EvalRequest& r : batch) {
    Output o = network_->forward(r.input, r.legal, r.to_move, r.temperature, ws);
    out.push_back({std::move(o.policy), o.value});
  }
  count_ += batch.size();
  return out;
}

}  // namespace hexit::nn
