#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "detbench/tensor.hpp"

namespace detbench {

// Ordered named tensors, the unit of weight serialization.
struct WeightEntry {
  std::string name;
  Tensor tensor;
};
using WeightMap = std::vector<WeightEntry>;

const Tensor& weight_named(const WeightMap& weights, const std::string& name);

// Weight file: magic "DBW1", u32 layer count, then per layer
// u32 name length, name bytes, u32 rank, u32 dims[rank], f32 data.
// Everything little-endian; payload is exactly 4 bytes per parameter.
std::vector<uint8_t> serialize_weights(const WeightMap& weights);
WeightMap deserialize_weights(std::span<const uint8_t> bytes);
void save_weights(const std::string& path, const WeightMap& weights);
WeightMap load_weights(const std::string& path);

// Raw tensor file: magic "DBT1", u32 rank, u32 dims[rank], f32 data.
std::vector<uint8_t> serialize_tensor(const Tensor& t);
Tensor deserialize_tensor(std::span<const uint8_t> bytes);
void save_tensor(const std::string& path, const Tensor& t);
Tensor load_tensor(const std::string& path);

}  // namespace detbench
