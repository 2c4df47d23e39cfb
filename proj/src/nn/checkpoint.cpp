#include "hexit/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "hexit/core/error.hpp"

namespace hexit::nn {

namespace {

void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f32(std::string& out, float f) { put_u32(out, std::bit_cast<uint32_t>(f)); }

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  std::string str(size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(size_t n) const {
    if (pos_ + n > bytes_.size()) throw FormatError("checkpoint truncated");
  }
  const std::string& bytes_;
  size_t pos_ = 0;
};

}  // namespace

template <typename T>
std::string serialize_checkpoint(const Network<T>& net) {
  const NetworkConfig& cfg = net.config();
  std::string out(kCheckpointMagic, sizeof(kCheckpointMagic) - 1);
  put_u32(out, static_cast<uint32_t>(cfg.board_size));
  put_u32(out, static_cast<uint32_t>(cfg.filters));
  put_u32(out, static_cast<uint32_t>(cfg.layers.size()));
  for (const ConvSpec& l : cfg.layers) {
    put_u32(out, static_cast<uint32_t>(l.kernel));
    put_u32(out, l.padded ? 1u : 0u);
  }
  put_u32(out, cfg.value_heads ? 1u : 0u);
  put_u32(out, static_cast<uint32_t>(net.tensors().size()));
  const auto params = net.params();
  for (const TensorInfo& t : net.tensors()) {
    put_u32(out, static_cast<uint32_t>(t.name.size()));
    out += t.name;
    put_u32(out, static_cast<uint32_t>(t.shape.size()));
    for (int d : t.shape) put_u32(out, static_cast<uint32_t>(d));
    for (size_t k = 0; k < t.size; ++k) put_f32(out, static_cast<float>(params[t.offset + k]));
  }
  return out;
}

Network<float> deserialize_checkpoint(const std::string& bytes) {
  Reader in(bytes);
  if (in.str(sizeof(kCheckpointMagic) - 1) != kCheckpointMagic) throw FormatError("not a checkpoint (bad magic)");
  NetworkConfig cfg;
  cfg.board_size = static_cast<int>(in.u32());
  cfg.filters = static_cast<int>(in.u32());
  const uint32_t layers = in.u32();
  if (layers > 1024) throw FormatError("implausible layer count in checkpoint");
  for (uint32_t i = 0; i < layers; ++i) {
    ConvSpec l;
    l.kernel = static_cast<int>(in.u32());
    l.padded = in.u32() != 0;
    cfg.layers.push_back(l);
  }
  cfg.value_heads = in.u32() != 0;
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw FormatError(std::string("checkpoint header invalid: ") + e.what());
  }
  Network<float> net(cfg);
  const uint32_t count = in.u32();
  if (count != net.tensors().size()) throw FormatError("checkpoint tensor count does not match its layer schedule");
  auto params = net.params();
  for (uint32_t i = 0; i < count; ++i) {
    const std::string name = in.str(in.u32());
    const TensorInfo& info = net.tensor_info(name);
    const uint32_t rank = in.u32();
    if (rank != info.shape.size()) throw FormatError("tensor '" + name + "' has the wrong rank");
    for (uint32_t d = 0; d < rank; ++d) {
      if (in.u32() != static_cast<uint32_t>(info.shape[d])) throw FormatError("tensor '" + name + "' has the wrong shape");
    }
    for (size_t k = 0; k < info.size; ++k) params[info.offset + k] = in.f32();
  }
  if (!in.at_end()) throw FormatError("trailing bytes after checkpoint tensors");
  return net;
}

template <typename T>
void save_checkpoint(const Network<T>& net, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write checkpoint " + path.string());
  const std::string bytes = serialize_checkpoint(net);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("failed writing checkpoint " + path.string());
}

Network<float> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_checkpoint(buf.str());
}

template std::string serialize_checkpoint(const Network<float>&);
template std::string serialize_checkpoint(const Network<double>&);
template void save_checkpoint(const Network<float>&, const std::filesystem::path&);
template void save_checkpoint(const Network<double>&, const std::filesystem::path&);

}  // namespace hexit::nn
