#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hexit/core/board.hpp"
#include "hexit/core/encoding.hpp"

namespace hexit::nn {

// kernel is 3 (hexagonal) or 1. A padded 3x3 layer keeps the spatial shape,
// an unpadded one shrinks it by two.
struct ConvSpec {
  int kernel = 3;
  bool padded = true;

  bool operator==(const ConvSpec&) const = default;
};

struct NetworkConfig {
  int board_size = 9;
  int filters = 64;
  std::vector<ConvSpec> layers;
  bool value_heads = false;
  uint64_t seed = 0;
  bool calibrate_variance = false;  // see calibrate_variance()

  // 13 layers: 1-8 padded hex, 9-10 unpadded hex, 11 1x1, 12 padded hex, 13 1x1.
  static NetworkConfig full(int board_size);
  // Small stack for desk-scale experiments.
  static NetworkConfig desk(int board_size);

  // Spatial side of the input and of every layer output.
  std::vector<int> spatial_sides() const;
  void validate() const;

  // Equal architecture (seed and calibration flag ignored).
  bool same_shape(const NetworkConfig& other) const;
};

class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, int layer) : std::runtime_error(what), layer_(layer) {}
  int layer() const { return layer_; }

 private:
  int layer_;
};

struct TensorInfo {
  std::string name;
  std::vector<int> shape;
  size_t offset = 0;
  size_t size = 0;
};

struct Output {
  std::vector<double> policy;   // n*n, zero on illegal cells
  std::optional<double> value;  // strictly inside (0,1)
};

// Masked softmax of logits/temperature; illegal entries get exactly 0.
// Throws std::invalid_argument if no cell is legal.
std::vector<double> masked_softmax(std::span<const double> logits, std::span<const uint8_t> legal, double temperature);

template <typename T>
class Network;

// Intermediate buffers of one forward pass, kept for the backward pass.
template <typename T>
struct Workspace {
  std::vector<T> input;
  std::vector<std::vector<T>> cols;  // im2col matrix per layer
  std::vector<std::vector<T>> pre;   // pre-activation per layer
  std::vector<std::vector<T>> post;  // ELU output per layer
  std::vector<double> logits;        // active policy head
  double value_logit = 0.0;
  // Backward scratch.
  std::vector<T> d_post;
  std::vector<T> d_pre;
  std::vector<T> d_col;
};

/// Hexagonal-filter CNN with two masked softmax policy heads (one per colour
/// to move) and optional two sigmoid value heads.
///
/// All parameters live in one flat vector; named tensors are views into it.
/// Every conv layer adds a per-position bias and applies ELU. The heads read
/// the flattened final feature map.
template <typename T>
class Network {
 public:
  explicit Network(const NetworkConfig& config);

  const NetworkConfig& config() const { return config_; }
  int board_size() const { return config_.board_size; }
  bool has_value() const { return config_.value_heads; }

  std::span<T> params() { return params_; }
  std::span<const T> params() const { return params_; }
  const std::vector<TensorInfo>& tensors() const { return tensors_; }
  const TensorInfo& tensor_info(std::string_view name) const;
  std::span<T> tensor(std::string_view name);
  std::span<const T> tensor(std::string_view name) const;

  // Draws fresh weights from config().seed (variance targeting for ELU).
  void initialise();
  // Zero the two masked corner taps of every hexagonal kernel.
  void enforce_hex_mask();
  bool is_masked_tap(size_t param_index) const;

  Output forward(const EncodedState& x, std::span<const uint8_t> legal, Color to_move, double temperature,
                 Workspace<T>& ws) const;
  Output forward(const EncodedState& x, std::span<const uint8_t> legal, Color to_move, double temperature) const;

  // Accumulates the parameter gradient of a loss whose derivative w.r.t. the
  // active policy logits is d_logits and w.r.t. the active value logit is
  // d_value_logit, using buffers filled by the preceding forward() call.
  void backward(const Workspace<T>& ws, Color to_move, std::span<const double> d_logits, double d_value_logit,
                std::span<T> grad, Workspace<T>& scratch) const;

  // Pre-activation buffers of every conv layer for `x` (used by calibration and tests).
  std::vector<std::vector<T>> conv_preactivations(const EncodedState& x) const;
  // Scales each conv layer's weights so that its pre-activation variance over
  // `batch` becomes 1. Layers are processed in order.
  void calibrate_variance(std::span<const EncodedState> batch);

  template <typename U>
  Network<U> cast() const {
    Network<U> out(config_);
    auto dst = out.params();
    for (size_t i = 0; i < params_.size(); ++i) dst[i] = static_cast<U>(params_[i]);
    return out;
  }

  // Round every parameter to the nearest f32 (what a checkpoint stores).
  void round_to_f32();

 private:
  struct Tap {
    int dr, dc, kernel_index;
  };
  struct Layer {
    int in_channels, out_channels, in_side, out_side, kernel;
    std::vector<Tap> taps;
    std::vector<int> gather;  // [tap][out position] -> input position or -1
    size_t weight_offset, bias_offset;
  };

  size_t add_tensor(std::string name, std::vector<int> shape);
  void conv_forward(const Layer& layer, const T* in, T* col, T* pre) const;
  int feature_size() const;

  NetworkConfig config_;
  std::vector<Layer> layers_;
  std::vector<TensorInfo> tensors_;
  std::vector<T> params_;
  size_t policy_weight_[2]{}, policy_bias_[2]{}, value_weight_[2]{}, value_bias_[2]{};
  std::vector<uint8_t> masked_;
};

extern template class Network<float>;
extern template class Network<double>;

}  // namespace hexit::nn
