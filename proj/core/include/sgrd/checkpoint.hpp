#pragma once

#include <map>
#include <string>
#include <vector>

#include "sgrd/tensor.hpp"

namespace sgrd {

// Shared on-disk tensor container, used for model checkpoints, triplet
// archives, and policy snapshots.
//
// Layout (all integers little-endian u32, floats little-endian f32):
//   magic "SGRD" | version | tensor count
//   per tensor: name length | name bytes (UTF-8) | rank | extents... | payload
//
// Round-trips are bit-exact.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_tensor_file(const std::string& path, const std::vector<std::pair<std::string, Tensor>>& tensors);
std::map<std::string, Tensor> read_tensor_file(const std::string& path);

// Ordered variant preserving file order (triplet archives rely on it).
std::vector<std::pair<std::string, Tensor>> read_tensor_file_ordered(const std::string& path);

}  // namespace sgrd
