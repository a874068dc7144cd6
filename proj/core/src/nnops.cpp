#include "detbench/nnops.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "detbench/errors.hpp"

namespace detbench {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Tensor conv2d(const Tensor& x, const Conv2dSpec& spec) {
  if (x.rank() != 3) throw input_error("conv2d: input must be [C,H,W]");
  if (spec.weight.rank() != 4) throw input_error("conv2d: weight must be [C_out,C_in,k_h,k_w]");
  if (spec.stride < 1) throw input_error("conv2d: stride must be >= 1");
  if (spec.padding < 0) throw input_error("conv2d: negative padding");

  const int64_t c_in = x.dim(0), h = x.dim(1), w = x.dim(2);
  const int64_t c_out = spec.weight.dim(0);
  const int64_t k_h = spec.weight.dim(2), k_w = spec.weight.dim(3);
  if (spec.weight.dim(1) != c_in) throw input_error("conv2d: channel mismatch");
  if (!spec.bias.empty() && static_cast<int64_t>(spec.bias.size()) != c_out) {
    throw input_error("conv2d: bias size mismatch");
  }

  const int64_t s = spec.stride, p = spec.padding;
  const int64_t h_out = (h + 2 * p - k_h) / s + 1;
  const int64_t w_out = (w + 2 * p - k_w) / s + 1;
  if (h_out < 1 || w_out < 1) throw input_error("conv2d: output would be empty");

  Tensor out({c_out, h_out, w_out});
  for (int64_t co = 0; co < c_out; ++co) {
    const double bias = spec.bias.empty() ? 0.0 : spec.bias[co];
    for (int64_t oy = 0; oy < h_out; ++oy) {
      for (int64_t ox = 0; ox < w_out; ++ox) {
        double acc = bias;
        for (int64_t ci = 0; ci < c_in; ++ci) {
          for (int64_t ky = 0; ky < k_h; ++ky) {
            const int64_t iy = oy * s - p + ky;
            if (iy < 0 || iy >= h) continue;
            for (int64_t kx = 0; kx < k_w; ++kx) {
              const int64_t ix = ox * s - p + kx;
              if (ix < 0 || ix >= w) continue;
              acc += x.at3(ci, iy, ix) *
                     spec.weight[((co * c_in + ci) * k_h + ky) * k_w + kx];
            }
          }
        }
        out.at3(co, oy, ox) = acc;
      }
    }
  }
  return out;
}

Tensor activation(Activation kind, const Tensor& x) {
  Tensor out(x.shape());
  const auto& in = x.data();
  auto& dst = out.data();
  switch (kind) {
    case Activation::Sigmoid:
      for (size_t i = 0; i < in.size(); ++i) dst[i] = sigmoid(in[i]);
      break;
    case Activation::Silu:
      for (size_t i = 0; i < in.size(); ++i) dst[i] = in[i] * sigmoid(in[i]);
      break;
    case Activation::Relu:
      for (size_t i = 0; i < in.size(); ++i) dst[i] = in[i] > 0.0 ? in[i] : 0.0;
      break;
  }
  return out;
}

Tensor global_avg_pool(const Tensor& x) {
  if (x.rank() != 3) throw input_error("global_avg_pool: input must be [C,H,W]");
  const int64_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
  Tensor out({c});
  for (int64_t ci = 0; ci < c; ++ci) {
    double sum = 0.0;
    for (int64_t y = 0; y < h; ++y) {
      for (int64_t xx = 0; xx < w; ++xx) sum += x.at3(ci, y, xx);
    }
    out[ci] = sum / static_cast<double>(h * w);
  }
  return out;
}

std::vector<double> linear(std::span<const double> x, const Tensor& w,
                           std::span<const double> b) {
  if (w.rank() != 2) throw input_error("linear: weight must be [out, in]");
  const int64_t out_dim = w.dim(0), in_dim = w.dim(1);
  if (static_cast<int64_t>(x.size()) != in_dim) throw input_error("linear: input size mismatch");
  if (!b.empty() && static_cast<int64_t>(b.size()) != out_dim) {
    throw input_error("linear: bias size mismatch");
  }
  std::vector<double> y(out_dim, 0.0);
  for (int64_t o = 0; o < out_dim; ++o) {
    double acc = b.empty() ? 0.0 : b[o];
    for (int64_t i = 0; i < in_dim; ++i) acc += w[o * in_dim + i] * x[i];
    y[o] = acc;
  }
  return y;
}

void SEBlockSpec::validate() const {
  if (channels < 1) throw input_error("SEBlockSpec: channels must be >= 1");
  if (reduction < 1) throw input_error("SEBlockSpec: reduction must be >= 1");
  const int64_t mid = mid_channels();
  if (w1.rank() != 2 || w1.dim(0) != mid || w1.dim(1) != channels) {
    throw input_error("SEBlockSpec: w1 must be [mid, C]");
  }
  if (w2.rank() != 2 || w2.dim(0) != channels || w2.dim(1) != mid) {
    throw input_error("SEBlockSpec: w2 must be [C, mid]");
  }
  if (static_cast<int64_t>(b1.size()) != mid || static_cast<int64_t>(b2.size()) != channels) {
    throw input_error("SEBlockSpec: bias sizes inconsistent");
  }
}

Tensor se_block(const Tensor& x, const SEBlockSpec& spec) {
  spec.validate();
  if (x.rank() != 3 || x.dim(0) != spec.channels) {
    throw input_error("se_block: input channel count mismatch");
  }
  const Tensor squeezed = global_avg_pool(x);
  std::vector<double> hidden = linear(squeezed.data(), spec.w1, spec.b1);
  for (double& v : hidden) v = v > 0.0 ? v : 0.0;
  std::vector<double> scale = linear(hidden, spec.w2, spec.b2);
  for (double& v : scale) v = sigmoid(v);

  Tensor out(x.shape());
  const int64_t hw = x.dim(1) * x.dim(2);
  for (int64_t c = 0; c < spec.channels; ++c) {
    for (int64_t i = 0; i < hw; ++i) {
      out.data()[c * hw + i] = scale[c] * x.data()[c * hw + i];
    }
  }
  return out;
}

std::vector<Detection> yolo_decode(const Tensor& raw,
                                   std::span<const std::array<double, 2>> anchors,
                                   double stride, double conf_threshold) {
  if (raw.rank() != 3) throw input_error("yolo_decode: raw head must be [C,H,W]");
  const int64_t channels = raw.dim(0), h = raw.dim(1), w = raw.dim(2);
  const int64_t a = static_cast<int64_t>(anchors.size());
  if (a < 1) throw input_error("yolo_decode: need at least one anchor");
  if (channels % a != 0 || channels / a < 6) {
    throw input_error("yolo_decode: channel count is not A*(5+K)");
  }
  const int64_t k = channels / a - 5;
  for (const auto& anchor : anchors) {
    if (!(anchor[0] > 0.0 && anchor[1] > 0.0)) {
      throw input_error("yolo_decode: anchors must be positive");
    }
  }

  std::vector<Detection> dets;
  for (int64_t i = 0; i < h; ++i) {
    for (int64_t j = 0; j < w; ++j) {
      for (int64_t ai = 0; ai < a; ++ai) {
        const int64_t base = ai * (5 + k);
        const double cx = (2.0 * sigmoid(raw.at3(base + 0, i, j)) - 0.5 + j) * stride;
        const double cy = (2.0 * sigmoid(raw.at3(base + 1, i, j)) - 0.5 + i) * stride;
        const double tw = 2.0 * sigmoid(raw.at3(base + 2, i, j));
        const double th = 2.0 * sigmoid(raw.at3(base + 3, i, j));
        const double bw = tw * tw * anchors[ai][0];
        const double bh = th * th * anchors[ai][1];
        const double obj = sigmoid(raw.at3(base + 4, i, j));

        int best_class = 0;
        double best_prob = sigmoid(raw.at3(base + 5, i, j));
        for (int64_t c = 1; c < k; ++c) {
          const double prob = sigmoid(raw.at3(base + 5 + c, i, j));
          if (prob > best_prob) {
            best_prob = prob;
            best_class = static_cast<int>(c);
          }
        }
        const double score = obj * best_prob;
        if (score < conf_threshold) continue;
        dets.push_back(Detection{
            BBox{cx - 0.5 * bw, cy - 0.5 * bh, cx + 0.5 * bw, cy + 0.5 * bh},
            best_class, score});
      }
    }
  }
  return dets;
}

LossValue cross_entropy(std::span<const double> logits, int target) {
  const int k = static_cast<int>(logits.size());
  if (k < 2) throw input_error("cross_entropy: need at least 2 classes");
  if (target < 0 || target >= k) throw input_error("cross_entropy: target out of range");

  const double m = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  std::vector<double> ex(k);
  for (int i = 0; i < k; ++i) {
    ex[i] = std::exp(logits[i] - m);
    z += ex[i];
  }

  LossValue out;
  out.value = std::log(z) - (logits[target] - m);
  out.gradient.resize(k);
  for (int i = 0; i < k; ++i) {
    out.gradient[i] = ex[i] / z - (i == target ? 1.0 : 0.0);
  }
  return out;
}

LossValue focal_loss(double p, bool target, double gamma, double alpha) {
  if (!(p > 0.0 && p < 1.0)) {
    throw input_error("focal_loss: p must lie strictly inside (0,1); clamp upstream");
  }
  if (gamma < 0.0) throw input_error("focal_loss: gamma must be >= 0");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw input_error("focal_loss: alpha outside (0,1]");

  const double p_t = target ? p : 1.0 - p;
  const double mod = std::pow(1.0 - p_t, gamma);
  LossValue out;
  out.value = -alpha * mod * std::log(p_t);

  // d/dp_t [-a (1-p_t)^g log p_t] = a g (1-p_t)^(g-1) log p_t - a (1-p_t)^g / p_t
  double d_pt = -alpha * mod / p_t;
  if (gamma > 0.0) {
    d_pt += alpha * gamma * std::pow(1.0 - p_t, gamma - 1.0) * std::log(p_t);
  }
  out.gradient = {target ? d_pt : -d_pt};
  return out;
}

void FreezeSpec::validate() const {
  for (const auto& prefix : frozen_prefixes) {
    if (prefix.empty()) throw input_error("FreezeSpec: empty prefix");
  }
}

FreezePlan freeze_plan(std::span<const std::string> param_names, const FreezeSpec& spec) {
  spec.validate();
  std::set<std::string> seen;
  for (const auto& name : param_names) {
    if (!seen.insert(name).second) {
      throw input_error("freeze_plan: duplicate parameter name '" + name + "'");
    }
  }

  FreezePlan plan;
  plan.trainable.resize(param_names.size(), true);
  std::vector<bool> prefix_hit(spec.frozen_prefixes.size(), false);
  for (size_t i = 0; i < param_names.size(); ++i) {
    for (size_t p = 0; p < spec.frozen_prefixes.size(); ++p) {
      if (param_names[i].starts_with(spec.frozen_prefixes[p])) {
        plan.trainable[i] = false;
        prefix_hit[p] = true;
      }
    }
    if (plan.trainable[i]) ++plan.trainable_count; else ++plan.frozen_count;
  }
  for (size_t p = 0; p < prefix_hit.size(); ++p) {
    if (!prefix_hit[p]) plan.unmatched_prefixes.push_back(spec.frozen_prefixes[p]);
  }
  return plan;
}

}  // namespace detbench
