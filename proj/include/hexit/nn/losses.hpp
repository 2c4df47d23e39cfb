#pragma once

#include <cstdint>
#include <optional>
#include <span>

namespace hexit::nn {

// Logs are taken of max(p, kLogFloor) so that f32 underflow cannot produce inf.
inline constexpr double kLogFloor = 1e-12;

// -log pi(a*|s).
double loss_cat(std::span<const double> policy, int chosen_cell);

// -sum_a target(a) log pi(a|s). Throws std::invalid_argument if the target
// puts mass on a cell the mask marks illegal.
double loss_tpt(std::span<const double> policy, std::span<const double> target, std::span<const uint8_t> legal);

// -z log V - (1-z) log(1-V).
double loss_value(double value, double z);

// loss_tpt + loss_value. A missing value target is an error; a policy-only
// network (no value) contributes the policy term alone.
double loss_multitask(std::span<const double> policy, std::span<const double> target, std::span<const uint8_t> legal,
                      std::optional<double> value, std::optional<double> z);

}  // namespace hexit::nn
