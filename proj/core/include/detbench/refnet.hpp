#pragma once

#include <array>
#include <vector>

#include "detbench/costmodel.hpp"
#include "detbench/image.hpp"
#include "detbench/nnops.hpp"
#include "detbench/weights.hpp"

namespace detbench {

// Miniature single-scale detector: three stride-2 3x3 conv+SiLU stages, an
// optional SE block after the middle stage, and a 1x1 detect head emitting
// A*(5+K) channels. Small enough to run end-to-end on a CPU in tests while
// exercising the same decode/NMS/eval pipeline as a real model.
struct RefNetSpec {
  int input_channels = 3;
  std::array<int, 3> stage_channels{8, 16, 32};
  bool use_se = true;
  int se_reduction = 16;
  int num_classes = 3;
  std::vector<std::array<double, 2>> anchors{{16.0, 16.0}, {32.0, 32.0}, {64.0, 64.0}};

  int total_stride() const { return 8; }
  int head_channels() const {
    return static_cast<int>(anchors.size()) * (5 + num_classes);
  }
  void validate() const;  // throws input_error
};

// Parameter names in serialization order ("backbone.stage1.conv.weight", ...).
std::vector<std::string> refnet_param_names(const RefNetSpec& spec);

// Deterministic uniform init, snapped to float32 so weight files round-trip
// bit-exactly.
WeightMap refnet_random_weights(const RefNetSpec& spec, uint64_t seed);

// [3,H,W] tensor from an RGB image.
Tensor image_to_tensor(const Image& image);

// Forward pass to the raw head tensor [A*(5+K), H/8, W/8]. Image sides must
// be divisible by the total stride.
Tensor refnet_forward(const RefNetSpec& spec, const WeightMap& weights,
                      const Image& image);

// Cost-model view of the same architecture, for FLOPs/storage accounting.
GraphIR refnet_graph(const RefNetSpec& spec);

}  // namespace detbench
