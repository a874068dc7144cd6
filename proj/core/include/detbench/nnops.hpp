#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "detbench/boxes.hpp"
#include "detbench/tensor.hpp"

namespace detbench {

struct Conv2dSpec {
  Tensor weight;             // [C_out, C_in, k_h, k_w]
  std::vector<double> bias;  // empty = no bias
  int stride = 1;
  int padding = 0;
};

// Standard cross-correlation on a [C,H,W] input, zero padding.
Tensor conv2d(const Tensor& x, const Conv2dSpec& spec);

enum class Activation { Sigmoid, Silu, Relu };

Tensor activation(Activation kind, const Tensor& x);
double sigmoid(double x);

// [C,H,W] -> [C]
Tensor global_avg_pool(const Tensor& x);

// y = W x + b, W stored [out, in] row-major.
std::vector<double> linear(std::span<const double> x, const Tensor& w,
                           std::span<const double> b);

// Squeeze-and-excitation channel attention: each channel of x is scaled by
// sigmoid(W2 relu(W1 gap(x) + b1) + b2).
struct SEBlockSpec {
  int channels = 0;
  int reduction = 16;
  Tensor w1;                // [mid, C], mid = ceil(C / reduction)
  std::vector<double> b1;   // [mid]
  Tensor w2;                // [C, mid]
  std::vector<double> b2;   // [C]

  int mid_channels() const { return (channels + reduction - 1) / reduction; }
  void validate() const;  // throws input_error
};

Tensor se_block(const Tensor& x, const SEBlockSpec& spec);

// Single-scale anchor-based head decoding. Channels per anchor are laid out
// [t_x, t_y, t_w, t_h, t_obj, t_cls...]. For cell (row i, col j) and anchor a:
//   center = (2*sigmoid(t_xy) - 0.5 + (j, i)) * stride
//   size   = (2*sigmoid(t_wh))^2 * anchor_a
//   score  = sigmoid(t_obj) * max_k sigmoid(t_cls_k)
// Detections with score >= conf_threshold are emitted in xyxy, scanning rows,
// then columns, then anchors.
std::vector<Detection> yolo_decode(const Tensor& raw,
                                   std::span<const std::array<double, 2>> anchors,
                                   double stride, double conf_threshold);

struct LossValue {
  double value = 0.0;
  std::vector<double> gradient;  // same shape as the prediction input
};

// Multi-class cross-entropy on raw logits; gradient is softmax - onehot.
LossValue cross_entropy(std::span<const double> logits, int target);

// Binary focal loss on a probability p in (0,1).
LossValue focal_loss(double p, bool target, double gamma = 2.0, double alpha = 0.25);

struct FreezeSpec {
  std::vector<std::string> frozen_prefixes;

  void validate() const;  // throws input_error on empty prefixes
};

struct FreezePlan {
  std::vector<bool> trainable;  // aligned with the input names
  size_t frozen_count = 0;
  size_t trainable_count = 0;
  std::vector<std::string> unmatched_prefixes;  // warnings, not errors
};

FreezePlan freeze_plan(std::span<const std::string> param_names, const FreezeSpec& spec);

}  // namespace detbench
