#include "hexit/nn/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hexit::nn {

namespace {
double safe_log(double p) { return std::log(std::max(p, kLogFloor)); }
}  // namespace

double loss_cat(std::span<const double> policy, int chosen_cell) {
  if (chosen_cell < 0 || static_cast<size_t>(chosen_cell) >= policy.size()) {
    throw std::invalid_argument("chosen cell out of range");
  }
  return -safe_log(policy[chosen_cell]);
}

double loss_tpt(std::span<const double> policy, std::span<const double> target, std::span<const uint8_t> legal) {
  if (policy.size() != target.size() || legal.size() != target.size()) {
    throw std::invalid_argument("policy, target and mask differ in size");
  }
  double loss = 0.0;
  for (size_t a = 0; a < target.size(); ++a) {
    if (target[a] == 0.0) continue;
    if (!legal[a]) throw std::invalid_argument("target puts mass on illegal cell " + std::to_string(a));
    loss -= target[a] * safe_log(policy[a]);
  }
  return loss;
}

double loss_value(double value, double z) { return -z * safe_log(value) - (1.0 - z) * safe_log(1.0 - value); }

double loss_multitask(std::span<const double> policy, std::span<const double> target, std::span<const uint8_t> legal,
                      std::optional<double> value, std::optional<double> z) {
  const double policy_loss = loss_tpt(policy, target, legal);
  if (!value) return policy_loss;
  if (!z) throw std::invalid_argument("multitask loss needs a value target");
  return policy_loss + loss_value(*value, *z);
}

}  // namespace hexit::nn
