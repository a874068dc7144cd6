#include "detbench/refnet.hpp"

#include <cmath>

#include "detbench/errors.hpp"
#include "detbench/rng.hpp"

namespace detbench {

namespace {

Tensor random_tensor(std::vector<int64_t> shape, double bound, Rng& rng) {
  Tensor t(std::move(shape));
  for (auto& v : t.data()) {
    v = static_cast<double>(static_cast<float>(rng.uniform(-bound, bound)));
  }
  return t;
}

std::vector<double> random_bias(int64_t n, double bound, Rng& rng) {
  std::vector<double> b(n);
  for (auto& v : b) {
    v = static_cast<double>(static_cast<float>(rng.uniform(-bound, bound)));
  }
  return b;
}

std::vector<double> bias_from(const Tensor& t) { return t.data(); }

}  // namespace

void RefNetSpec::validate() const {
  if (input_channels < 1) throw input_error("RefNetSpec: input_channels must be >= 1");
  for (int c : stage_channels) {
    if (c < 1) throw input_error("RefNetSpec: stage channels must be >= 1");
  }
  if (se_reduction < 1) throw input_error("RefNetSpec: se_reduction must be >= 1");
  if (num_classes < 1) throw input_error("RefNetSpec: num_classes must be >= 1");
  if (anchors.empty()) throw input_error("RefNetSpec: need at least one anchor");
  for (const auto& a : anchors) {
    if (!(a[0] > 0.0 && a[1] > 0.0)) throw input_error("RefNetSpec: anchors must be positive");
  }
}

std::vector<std::string> refnet_param_names(const RefNetSpec& spec) {
  spec.validate();
  std::vector<std::string> names;
  for (int i = 0; i < 3; ++i) {
    const std::string stage = "backbone.stage" + std::to_string(i + 1) + ".conv.";
    names.push_back(stage + "weight");
    names.push_back(stage + "bias");
    if (i == 1 && spec.use_se) {
      names.push_back("backbone.se.fc1.weight");
      names.push_back("backbone.se.fc1.bias");
      names.push_back("backbone.se.fc2.weight");
      names.push_back("backbone.se.fc2.bias");
    }
  }
  names.push_back("head.conv.weight");
  names.push_back("head.conv.bias");
  return names;
}

WeightMap refnet_random_weights(const RefNetSpec& spec, uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  WeightMap weights;

  int in_ch = spec.input_channels;
  for (int i = 0; i < 3; ++i) {
    const int out_ch = spec.stage_channels[i];
    const double bound = 1.0 / std::sqrt(static_cast<double>(in_ch) * 9.0);
    const std::string stage = "backbone.stage" + std::to_string(i + 1) + ".conv.";
    weights.push_back({stage + "weight", random_tensor({out_ch, in_ch, 3, 3}, bound, rng)});
    weights.push_back({stage + "bias", random_tensor({out_ch}, bound, rng)});
    if (i == 1 && spec.use_se) {
      const int c = out_ch;
      const int mid = (c + spec.se_reduction - 1) / spec.se_reduction;
      const double se_bound = 1.0 / std::sqrt(static_cast<double>(c));
      weights.push_back({"backbone.se.fc1.weight", random_tensor({mid, c}, se_bound, rng)});
      weights.push_back({"backbone.se.fc1.bias", random_tensor({mid}, se_bound, rng)});
      weights.push_back({"backbone.se.fc2.weight", random_tensor({c, mid}, se_bound, rng)});
      weights.push_back({"backbone.se.fc2.bias", random_tensor({c}, se_bound, rng)});
    }
    in_ch = out_ch;
  }
  const int head_out = spec.head_channels();
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_ch));
  weights.push_back({"head.conv.weight", random_tensor({head_out, in_ch, 1, 1}, bound, rng)});
  weights.push_back({"head.conv.bias", random_tensor({head_out}, bound, rng)});
  return weights;
}

Tensor image_to_tensor(const Image& image) {
  const int h = image.height(), w = image.width();
  Tensor t({3, h, w});
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) t.at3(c, y, x) = image.at(y, x, c);
    }
  }
  return t;
}

Tensor refnet_forward(const RefNetSpec& spec, const WeightMap& weights,
                      const Image& image) {
  spec.validate();
  const int stride = spec.total_stride();
  if (image.height() % stride != 0 || image.width() % stride != 0) {
    throw input_error("refnet_forward: image sides must be divisible by " +
                      std::to_string(stride));
  }

  Tensor x = image_to_tensor(image);
  for (int i = 0; i < 3; ++i) {
    const std::string stage = "backbone.stage" + std::to_string(i + 1) + ".conv.";
    Conv2dSpec conv;
    conv.weight = weight_named(weights, stage + "weight");
    conv.bias = bias_from(weight_named(weights, stage + "bias"));
    conv.stride = 2;
    conv.padding = 1;
    x = activation(Activation::Silu, conv2d(x, conv));
    if (i == 1 && spec.use_se) {
      SEBlockSpec se;
      se.channels = spec.stage_channels[1];
      se.reduction = spec.se_reduction;
      se.w1 = weight_named(weights, "backbone.se.fc1.weight");
      se.b1 = bias_from(weight_named(weights, "backbone.se.fc1.bias"));
      se.w2 = weight_named(weights, "backbone.se.fc2.weight");
      se.b2 = bias_from(weight_named(weights, "backbone.se.fc2.bias"));
      x = se_block(x, se);
    }
  }

  Conv2dSpec head;
  head.weight = weight_named(weights, "head.conv.weight");
  head.bias = bias_from(weight_named(weights, "head.conv.bias"));
  head.stride = 1;
  head.padding = 0;
  return conv2d(x, head);
}

GraphIR refnet_graph(const RefNetSpec& spec) {
  spec.validate();
  GraphIR graph;
  std::string prev = "$in";
  for (int i = 0; i < 3; ++i) {
    GraphNode conv;
    conv.name = "stage" + std::to_string(i + 1);
    conv.kind = NodeKind::Conv;
    conv.kernel_h = conv.kernel_w = 3;
    conv.stride = 2;
    conv.padding = 1;
    conv.out_channels = spec.stage_channels[i];
    conv.inputs = {prev};
    graph.nodes.push_back(conv);

    GraphNode act;
    act.name = "silu" + std::to_string(i + 1);
    act.kind = NodeKind::Activation;
    act.inputs = {conv.name};
    graph.nodes.push_back(act);
    prev = act.name;

    if (i == 1 && spec.use_se) {
      GraphNode se;
      se.name = "se";
      se.kind = NodeKind::Se;
      se.reduction = spec.se_reduction;
      se.inputs = {prev};
      graph.nodes.push_back(se);
      prev = se.name;
    }
  }
  GraphNode head;
  head.name = "head";
  head.kind = NodeKind::Conv;
  head.kernel_h = head.kernel_w = 1;
  head.stride = 1;
  head.padding = 0;
  head.out_channels = spec.head_channels();
  head.inputs = {prev};
  graph.nodes.push_back(head);
  return graph;
}

}  // namespace detbench
