#pragma once

#include <filesystem>
#include <string>

#include "hexit/nn/network.hpp"

namespace hexit::nn {

// Binary, little-endian:
//   "EXITNN1" | u32 board size | u32 filters | u32 layer count |
//   per layer: u32 kernel, u32 padded | u32 value heads |
//   u32 tensor count | per tensor: u32 name length, name bytes, u32 rank,
//   u32 dims[rank], f32 data[product(dims)]
inline constexpr char kCheckpointMagic[] = "EXITNN1";

template <typename T>
std::string serialize_checkpoint(const Network<T>& net);
Network<float> deserialize_checkpoint(const std::string& bytes);

template <typename T>
void save_checkpoint(const Network<T>& net, const std::filesystem::path& path);
Network<float> load_checkpoint(const std::filesystem::path& path);

}  // namespace hexit::nn
