#include "hexit/nn/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "hexit/core/error.hpp"
#include "hexit/core/rng.hpp"

namespace hexit::nn {

namespace {

// 3x3 kernel positions are indexed (dr+1)*3 + (dc+1). The hexagonal support
// drops (-1,-1) and (+1,+1).
constexpr int kMaskedTapA = 0;
constexpr int kMaskedTapB = 8;

constexpr double kEluVarianceGain = 1.55;

}  // namespace

NetworkConfig NetworkConfig::full(int board_size) {
  NetworkConfig c;
  c.board_size = board_size;
  c.filters = 64;
  for (int i = 0; i < 8; ++i) c.layers.push_back({3, true});
  c.layers.push_back({3, false});
  c.layers.push_back({3, false});
  c.layers.push_back({1, false});
  c.layers.push_back({3, true});
  c.layers.push_back({1, false});
  return c;
}

NetworkConfig NetworkConfig::desk(int board_size) {
  NetworkConfig c;
  c.board_size = board_size;
  c.filters = 24;
  c.layers = {{3, true}, {3, true}, {3, false}, {3, false}, {1, false}};
  return c;
}

std::vector<int> NetworkConfig::spatial_sides() const {
  std::vector<int> sides{board_size + 2 * kEncodingPad};
  for (const ConvSpec& l : layers) {
    const int s = sides.back();
    sides.push_back(l.kernel == 3 && !l.padded ? s - 2 : s);
  }
  return sides;
}

void NetworkConfig::validate() const {
  if (board_size < kMinBoardSize || board_size > kMaxBoardSize) throw ConfigError("network board size out of range");
  if (filters < 1) throw ConfigError("filters must be positive");
  if (layers.empty()) throw ConfigError("network needs at least one conv layer");
  for (const ConvSpec& l : layers) {
    if (l.kernel != 1 && l.kernel != 3) throw ConfigError("conv kernel must be 1 or 3");
  }
  if (spatial_sides().back() < 1) throw ConfigError("layer schedule shrinks the board to nothing");
}

bool NetworkConfig::same_shape(const NetworkConfig& other) const {
  return board_size == other.board_size && filters == other.filters && layers == other.layers &&
         value_heads == other.value_heads;
}

std::vector<double> masked_softmax(std::span<const double> logits, std::span<const uint8_t> legal, double temperature) {
  if (logits.size() != legal.size()) throw std::invalid_argument("mask and logits differ in size");
  double max_logit = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (size_t i = 0; i < logits.size(); ++i) {
    if (!legal[i]) continue;
    any = true;
    max_logit = std::max(max_logit, logits[i] / temperature);
  }
  if (!any) throw std::invalid_argument("policy mask has no legal cell");
  std::vector<double> p(logits.size(), 0.0);
  double total = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    if (!legal[i]) continue;
    p[i] = std::exp(logits[i] / temperature - max_logit);
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

template <typename T>
Network<T>::Network(const NetworkConfig& config) : config_(config) {
  config_.validate();
  const auto sides = config_.spatial_sides();
  int in_channels = kChannelCount;
  for (size_t l = 0; l < config_.layers.size(); ++l) {
    const ConvSpec& spec = config_.layers[l];
    Layer layer;
    layer.in_channels = in_channels;
    layer.out_channels = config_.filters;
    layer.in_side = sides[l];
    layer.out_side = sides[l + 1];
    layer.kernel = spec.kernel;
    if (spec.kernel == 3) {
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          const int k = (dr + 1) * 3 + (dc + 1);
          if (k == kMaskedTapA || k == kMaskedTapB) continue;
          layer.taps.push_back({dr, dc, k});
        }
      }
    } else {
      layer.taps.push_back({0, 0, 0});
    }
    const int offset = spec.kernel == 3 && !spec.padded ? 1 : 0;
    const int out_positions = layer.out_side * layer.out_side;
    layer.gather.assign(layer.taps.size() * out_positions, -1);
    for (size_t t = 0; t < layer.taps.size(); ++t) {
      for (int r = 0; r < layer.out_side; ++r) {
        for (int c = 0; c < layer.out_side; ++c) {
          const int sr = r + offset + layer.taps[t].dr;
          const int sc = c + offset + layer.taps[t].dc;
          if (sr < 0 || sr >= layer.in_side || sc < 0 || sc >= layer.in_side) continue;
          layer.gather[t * out_positions + r * layer.out_side + c] = sr * layer.in_side + sc;
        }
      }
    }
    const std::string prefix = "conv" + std::to_string(l + 1);
    layer.weight_offset = add_tensor(prefix + ".weight", {layer.out_channels, in_channels, spec.kernel, spec.kernel});
    layer.bias_offset = add_tensor(prefix + ".bias", {layer.out_channels, layer.out_side, layer.out_side});
    layers_.push_back(std::move(layer));
    in_channels = config_.filters;
  }
  const int cells = config_.board_size * config_.board_size;
  const int features = feature_size();
  const char* colour[2] = {"black", "white"};
  for (int c = 0; c < 2; ++c) {
    policy_weight_[c] = add_tensor(std::string("policy_") + colour[c] + ".weight", {cells, features});
    policy_bias_[c] = add_tensor(std::string("policy_") + colour[c] + ".bias", {cells});
  }
  if (config_.value_heads) {
    for (int c = 0; c < 2; ++c) {
      value_weight_[c] = add_tensor(std::string("value_") + colour[c] + ".weight", {features});
      value_bias_[c] = add_tensor(std::string("value_") + colour[c] + ".bias", {1});
    }
  }
  masked_.assign(params_.size(), 0);
  for (const Layer& layer : layers_) {
    if (layer.kernel != 3) continue;
    for (int o = 0; o < layer.out_channels; ++o) {
      for (int i = 0; i < layer.in_channels; ++i) {
        const size_t base = layer.weight_offset + (static_cast<size_t>(o) * layer.in_channels + i) * 9;
        masked_[base + kMaskedTapA] = 1;
        masked_[base + kMaskedTapB] = 1;
      }
    }
  }
  initialise();
}

template <typename T>
size_t Network<T>::add_tensor(std::string name, std::vector<int> shape) {
  size_t size = 1;
  for (int d : shape) size *= static_cast<size_t>(d);
  TensorInfo info{std::move(name), std::move(shape), params_.size(), size};
  params_.resize(params_.size() + size, T(0));
  tensors_.push_back(info);
  return info.offset;
}

template <typename T>
int Network<T>::feature_size() const {
  const Layer& last = layers_.back();
  return last.out_channels * last.out_side * last.out_side;
}

template <typename T>
const TensorInfo& Network<T>::tensor_info(std::string_view name) const {
  for (const TensorInfo& t : tensors_) {
    if (t.name == name) return t;
  }
  throw std::out_of_range("no tensor named '" + std::string(name) + "'");
}

template <typename T>
std::span<T> Network<T>::tensor(std::string_view name) {
  const TensorInfo& t = tensor_info(name);
  return std::span<T>(params_).subspan(t.offset, t.size);
}

template <typename T>
std::span<const T> Network<T>::tensor(std::string_view name) const {
  const TensorInfo& t = tensor_info(name);
  return std::span<const T>(params_).subspan(t.offset, t.size);
}

template <typename T>
void Network<T>::initialise() {
  Rng rng(derive_seed(config_.seed, Stream::init, {}));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::fill(params_.begin(), params_.end(), T(0));
  for (const Layer& layer : layers_) {
    const double fan_in = static_cast<double>(layer.in_channels * layer.taps.size());
    const double scale = std::sqrt(kEluVarianceGain / fan_in);
    const int kk = layer.kernel * layer.kernel;
    for (int o = 0; o < layer.out_channels; ++o) {
      for (int i = 0; i < layer.in_channels; ++i) {
        for (const Tap& tap : layer.taps) {
          params_[layer.weight_offset + (static_cast<size_t>(o) * layer.in_channels + i) * kk + tap.kernel_index] =
              static_cast<T>(scale * normal(rng));
        }
      }
    }
  }
  const double head_scale = std::sqrt(1.0 / feature_size());
  const size_t cells = static_cast<size_t>(config_.board_size) * config_.board_size;
  for (int c = 0; c < 2; ++c) {
    for (size_t k = 0; k < cells * feature_size(); ++k) params_[policy_weight_[c] + k] = static_cast<T>(head_scale * normal(rng));
    if (config_.value_heads) {
      for (int k = 0; k < feature_size(); ++k) params_[value_weight_[c] + k] = static_cast<T>(head_scale * normal(rng));
    }
  }
}

template <typename T>
void Network<T>::enforce_hex_mask() {
  for (size_t i = 0; i < params_.size(); ++i) {
    if (masked_[i]) params_[i] = T(0);
  }
}

template <typename T>
bool Network<T>::is_masked_tap(size_t param_index) const {
  return masked_[param_index] != 0;
}

template <typename T>
void Network<T>::round_to_f32() {
  for (T& v : params_) v = static_cast<T>(static_cast<float>(v));
}

template <typename T>
void Network<T>::conv_forward(const Layer& layer, const T* in, T* col, T* pre) const {
  const int positions = layer.out_side * layer.out_side;
  const int in_plane = layer.in_side * layer.in_side;
  const int taps = static_cast<int>(layer.taps.size());
  for (int i = 0; i < layer.in_channels; ++i) {
    const T* src = in + static_cast<size_t>(i) * in_plane;
    for (int t = 0; t < taps; ++t) {
      T* row = col + (static_cast<size_t>(i) * taps + t) * positions;
      const int* g = layer.gather.data() + static_cast<size_t>(t) * positions;
      for (int p = 0; p < positions; ++p) row[p] = g[p] >= 0 ? src[g[p]] : T(0);
    }
  }
  const int kk = layer.kernel * layer.kernel;
  const T* weights = params_.data() + layer.weight_offset;
  const T* bias = params_.data() + layer.bias_offset;
  for (int o = 0; o < layer.out_channels; ++o) {
    T* out = pre + static_cast<size_t>(o) * positions;
    const T* b = bias + static_cast<size_t>(o) * positions;
    for (int p = 0; p < positions; ++p) out[p] = b[p];
    for (int i = 0; i < layer.in_channels; ++i) {
      const T* w = weights + (static_cast<size_t>(o) * layer.in_channels + i) * kk;
      for (int t = 0; t < taps; ++t) {
        const T wt = w[layer.taps[t].kernel_index];
        const T* row = col + (static_cast<size_t>(i) * taps + t) * positions;
        for (int p = 0; p < positions; ++p) out[p] += wt * row[p];
      }
    }
  }
}

template <typename T>
Output Network<T>::forward(const EncodedState& x, std::span<const uint8_t> legal, Color to_move, double temperature,
                           Workspace<T>& ws) const {
  if (x.board_size != config_.board_size) throw ConfigError("encoded state does not match network board size");
  const size_t cells = static_cast<size_t>(config_.board_size) * config_.board_size;
  if (legal.size() != cells) throw std::invalid_argument("legal mask has the wrong size");

  ws.input.assign(x.planes.begin(), x.planes.end());
  ws.cols.resize(layers_.size());
  ws.pre.resize(layers_.size());
  ws.post.resize(layers_.size());
  const T* in = ws.input.data();
  for (size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    const size_t positions = static_cast<size_t>(layer.out_side) * layer.out_side;
    ws.cols[l].resize(static_cast<size_t>(layer.in_channels) * layer.taps.size() * positions);
    ws.pre[l].resize(static_cast<size_t>(layer.out_channels) * positions);
    ws.post[l].resize(ws.pre[l].size());
    conv_forward(layer, in, ws.cols[l].data(), ws.pre[l].data());
    const std::vector<T>& z = ws.pre[l];
    std::vector<T>& a = ws.post[l];
    bool finite = true;
    for (size_t k = 0; k < z.size(); ++k) {
      finite &= std::isfinite(z[k]);
      a[k] = z[k] > T(0) ? z[k] : std::expm1(z[k]);
    }
    if (!finite) throw NumericError("non-finite activation in conv layer " + std::to_string(l + 1), static_cast<int>(l + 1));
    in = a.data();
  }

  const int head = index_of(to_move);
  const int features = feature_size();
  const T* f = ws.post.back().data();
  ws.logits.assign(cells, 0.0);
  const T* w = params_.data() + policy_weight_[head];
  const T* b = params_.data() + policy_bias_[head];
  for (size_t k = 0; k < cells; ++k) {
    T acc = b[k];
    const T* wk = w + k * features;
    for (int d = 0; d < features; ++d) acc += wk[d] * f[d];
    ws.logits[k] = static_cast<double>(acc);
  }
  Output out;
  for (double v : ws.logits) {
    if (!std::isfinite(v)) throw NumericError("non-finite policy logit", static_cast<int>(layers_.size() + 1));
  }
  out.policy = masked_softmax(ws.logits, legal, temperature);
  if (config_.value_heads) {
    const T* vw = params_.data() + value_weight_[head];
    T acc = params_[value_bias_[head]];
    for (int d = 0; d < features; ++d) acc += vw[d] * f[d];
    ws.value_logit = static_cast<double>(acc);
    // Clamp keeps the sigmoid strictly inside (0,1) even at f32-saturating logits.
    const double z = std::clamp(ws.value_logit, -30.0, 30.0);
    out.value = 1.0 / (1.0 + std::exp(-z));
  }
  return out;
}

template <typename T>
Output Network<T>::forward(const EncodedState& x, std::span<const uint8_t> legal, Color to_move,
                           double temperature) const {
  Workspace<T> ws;
  return forward(x, legal, to_move, temperature, ws);
}

template <typename T>
void Network<T>::backward(const Workspace<T>& ws, Color to_move, std::span<const double> d_logits, double d_value_logit,
                          std::span<T> grad, Workspace<T>& scratch) const {
  const int head = index_of(to_move);
  const int features = feature_size();
  const size_t cells = static_cast<size_t>(config_.board_size) * config_.board_size;
  const T* f = ws.post.back().data();

  std::vector<T>& d_post = scratch.d_post;
  d_post.assign(static_cast<size_t>(features), T(0));
  {
    const T* w = params_.data() + policy_weight_[head];
    T* gw = grad.data() + policy_weight_[head];
    T* gb = grad.data() + policy_bias_[head];
    for (size_t k = 0; k < cells; ++k) {
      const T g = static_cast<T>(d_logits[k]);
      if (g == T(0)) continue;
      gb[k] += g;
      T* gwk = gw + k * features;
      const T* wk = w + k * features;
      for (int d = 0; d < features; ++d) {
        gwk[d] += g * f[d];
        d_post[d] += g * wk[d];
      }
    }
  }
  if (config_.value_heads && d_value_logit != 0.0) {
    const T g = static_cast<T>(d_value_logit);
    const T* w = params_.data() + value_weight_[head];
    T* gw = grad.data() + value_weight_[head];
    grad[value_bias_[head]] += g;
    for (int d = 0; d < features; ++d) {
      gw[d] += g * f[d];
      d_post[d] += g * w[d];
    }
  }

  for (size_t li = layers_.size(); li-- > 0;) {
    const Layer& layer = layers_[li];
    const int positions = layer.out_side * layer.out_side;
    const int taps = static_cast<int>(layer.taps.size());
    const int kk = layer.kernel * layer.kernel;
    const std::vector<T>& a = ws.post[li];
    std::vector<T>& d_pre = scratch.d_pre;
    d_pre.resize(a.size());
    for (size_t k = 0; k < a.size(); ++k) d_pre[k] = d_post[k] * (ws.pre[li][k] > T(0) ? T(1) : a[k] + T(1));

    T* gb = grad.data() + layer.bias_offset;
    for (size_t k = 0; k < d_pre.size(); ++k) gb[k] += d_pre[k];

    const T* col = ws.cols[li].data();
    const T* weights = params_.data() + layer.weight_offset;
    T* gw = grad.data() + layer.weight_offset;
    const bool need_input_grad = li > 0;
    std::vector<T>& d_col = scratch.d_col;
    if (need_input_grad) d_col.assign(ws.cols[li].size(), T(0));
    for (int o = 0; o < layer.out_channels; ++o) {
      const T* dz = d_pre.data() + static_cast<size_t>(o) * positions;
      for (int i = 0; i < layer.in_channels; ++i) {
        const size_t wbase = (static_cast<size_t>(o) * layer.in_channels + i) * kk;
        for (int t = 0; t < taps; ++t) {
          const size_t j = static_cast<size_t>(i) * taps + t;
          const T* row = col + j * positions;
          T acc = T(0);
          for (int p = 0; p < positions; ++p) acc += dz[p] * row[p];
          gw[wbase + layer.taps[t].kernel_index] += acc;
          if (need_input_grad) {
            const T wt = weights[wbase + layer.taps[t].kernel_index];
            T* drow = d_col.data() + j * positions;
            for (int p = 0; p < positions; ++p) drow[p] += wt * dz[p];
          }
        }
      }
    }
    if (!need_input_grad) break;
    const int in_plane = layer.in_side * layer.in_side;
    d_post.assign(static_cast<size_t>(layer.in_channels) * in_plane, T(0));
    for (int i = 0; i < layer.in_channels; ++i) {
      T* dst = d_post.data() + static_cast<size_t>(i) * in_plane;
      for (int t = 0; t < taps; ++t) {
        const T* drow = d_col.data() + (static_cast<size_t>(i) * taps + t) * positions;
        const int* g = layer.gather.data() + static_cast<size_t>(t) * positions;
        for (int p = 0; p < positions; ++p) {
          if (g[p] >= 0) dst[g[p]] += drow[p];
        }
      }
    }
  }
}

template <typename T>
std::vector<std::vector<T>> Network<T>::conv_preactivations(const EncodedState& x) const {
  Workspace<T> ws;
  std::vector<uint8_t> legal(static_cast<size_t>(config_.board_size) * config_.board_size, 1);
  forward(x, legal, Color::Black, 1.0, ws);
  return ws.pre;
}

template <typename T>
void Network<T>::calibrate_variance(std::span<const EncodedState> batch) {
  if (batch.empty()) return;
  for (size_t l = 0; l < layers_.size(); ++l) {
    double sum = 0.0, sum_sq = 0.0, count = 0.0;
    for (const EncodedState& x : batch) {
      const auto pre = conv_preactivations(x);
      for (T v : pre[l]) {
        sum += v;
        sum_sq += static_cast<double>(v) * v;
        count += 1.0;
      }
    }
    const double mean = sum / count;
    const double var = sum_sq / count - mean * mean;
    if (!(var > 0.0)) continue;
    // Biases are part of the pre-activation; scale them too so the whole
    // affine map (and hence the variance) scales by the same factor.
    const T factor = static_cast<T>(1.0 / std::sqrt(var));
    const Layer& layer = layers_[l];
    const size_t wsize = static_cast<size_t>(layer.out_channels) * layer.in_channels * layer.kernel * layer.kernel;
    for (size_t k = 0; k < wsize; ++k) params_[layer.weight_offset + k] *= factor;
    const size_t bsize = static_cast<size_t>(layer.out_channels) * layer.out_side * layer.out_side;
    for (size_t k = 0; k < bsize; ++k) params_[layer.bias_offset + k] *= factor;
  }
}

template class Network<float>;
template class Network<double>;

}  // namespace hexit::nn
