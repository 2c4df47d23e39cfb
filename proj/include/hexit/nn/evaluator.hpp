#pragma once

#include <atomic>
#include <memory>

#include "hexit/nn/network.hpp"
#include "hexit/search/evaluator.hpp"

namespace hexit::nn {

// Adapts an immutable network to the search's batched evaluation interface
// and counts every position it evaluates.
class NetworkEvaluator final : public search::Evaluator {
 public:
  explicit NetworkEvaluator(std::shared_ptr<const Network<float>> network);

  std::vector<search::Evaluation> evaluate(std::span<const search::EvalRequest> batch) override;
  bool has_value() const override { return network_->has_value(); }
  uint64_t evaluations() const override { return count_.load(); }

  const Network<float>& network() const { return *network_; }
  std::shared_ptr<const Network<float>> shared_network() const { return network_; }

 private:
  std::shared_ptr<const Network<float>> network_;
  std::atomic<uint64_t> count_{0};
};

}  // namespace hexit::nn
