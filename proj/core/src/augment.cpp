#include "detbench/augment.hpp"

#include <algorithm>
#include <cmath>

#include "detbench/errors.hpp"

namespace detbench {

namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

struct Hsv {
  double h;  // turns, [0,1)
  double s;
  double v;
};

Hsv rgb_to_hsv(double r, double g, double b) {
  const double maxc = std::max({r, g, b});
  const double minc = std::min({r, g, b});
  const double d = maxc - minc;
  Hsv out{0.0, 0.0, maxc};
  if (maxc > 0.0) out.s = d / maxc;
  if (d > 0.0) {
    double h;
    if (maxc == r) {
      h = (g - b) / d;
      if (h < 0.0) h += 6.0;
    } else if (maxc == g) {
      h = (b - r) / d + 2.0;
    } else {
      h = (r - g) / d + 4.0;
    }
    out.h = h / 6.0;
  }
  return out;
}

void hsv_to_rgb(const Hsv& in, double& r, double& g, double& b) {
  auto channel = [&](double n) {
    const double k = std::fmod(n + in.h * 6.0, 6.0);
    return in.v - in.v * in.s * std::max(0.0, std::min({k, 4.0 - k, 1.0}));
  };
  r = channel(5.0);
  g = channel(3.0);
  b = channel(1.0);
}

// Clips a label box to [x0,x1]x[y0,y1]; drops it when the remnant is too
// small.
void clip_and_keep(std::vector<GroundTruth>& out, GroundTruth label, double x0,
                   double y0, double x1, double y1, double min_box_area) {
  label.bbox.x_min = std::clamp(label.bbox.x_min, x0, x1);
  label.bbox.x_max = std::clamp(label.bbox.x_max, x0, x1);
  label.bbox.y_min = std::clamp(label.bbox.y_min, y0, y1);
  label.bbox.y_max = std::clamp(label.bbox.y_max, y0, y1);
  if (label.bbox.area() >= min_box_area && label.bbox.area() > 0.0) {
    out.push_back(label);
  }
}

}  // namespace

void AugmentConfig::validate() const {
  if (translate_frac < 0.0) throw input_error("AugmentConfig: negative translate_frac");
  if (!(scale_range.first > 0.0) || scale_range.first > scale_range.second) {
    throw input_error("AugmentConfig: bad scale_range");
  }
  if (hflip_prob < 0.0 || hflip_prob > 1.0) {
    throw input_error("AugmentConfig: hflip_prob outside [0,1]");
  }
  if (hsv_gain_h < 0.0 || hsv_gain_s < 0.0 || hsv_gain_v < 0.0) {
    throw input_error("AugmentConfig: negative HSV gain");
  }
  if (!(mixup_beta > 0.0)) throw input_error("AugmentConfig: mixup_beta must be > 0");
  if (min_box_area < 0.0) throw input_error("AugmentConfig: negative min_box_area");
  if (target_size < 2) throw input_error("AugmentConfig: target_size must be >= 2");
}

std::pair<LabeledImage, BoxTransform> letterbox(const LabeledImage& src, int target,
                                                double pad_value) {
  if (target < 1) throw input_error("letterbox: target must be >= 1");
  const int w = src.image.width();
  const int h = src.image.height();
  const double scale = static_cast<double>(target) / std::max(w, h);
  const int new_w = static_cast<int>(std::lround(w * scale));
  const int new_h = static_cast<int>(std::lround(h * scale));
  const int pad_x = (target - new_w) / 2;
  const int pad_y = (target - new_h) / 2;

  LabeledImage out;
  out.image = Image(target, target, pad_value);
  for (int y = 0; y < new_h; ++y) {
    const int sy = std::min(h - 1, static_cast<int>((y + 0.5) / scale));
    for (int x = 0; x < new_w; ++x) {
      const int sx = std::min(w - 1, static_cast<int>((x + 0.5) / scale));
      for (int c = 0; c < 3; ++c) out.image.at(y + pad_y, x + pad_x, c) = src.image.at(sy, sx, c);
    }
  }
  for (const auto& label : src.labels) {
    GroundTruth moved = label;
    moved.bbox = BBox{label.bbox.x_min * scale + pad_x, label.bbox.y_min * scale + pad_y,
                      label.bbox.x_max * scale + pad_x, label.bbox.y_max * scale + pad_y};
    out.labels.push_back(moved);
  }

  BoxTransform t;
  t.scale = scale;
  t.pad_x = pad_x;
  t.pad_y = pad_y;
  t.orig_width = w;
  t.orig_height = h;
  t.target_width = target;
  t.target_height = target;
  return {std::move(out), t};
}

LabeledImage affine_translate_scale(const LabeledImage& src, double tx, double ty,
                                    double s, double min_box_area) {
  if (!(s > 0.0)) throw input_error("affine_translate_scale: scale must be > 0");
  const int w = src.image.width();
  const int h = src.image.height();
  LabeledImage out;
  out.image = Image(h, w, 0.0);
  for (int y = 0; y < h; ++y) {
    const int sy = static_cast<int>(std::floor((y + 0.5 - ty) / s));
    if (sy < 0 || sy >= h) continue;
    for (int x = 0; x < w; ++x) {
      const int sx = static_cast<int>(std::floor((x + 0.5 - tx) / s));
      if (sx < 0 || sx >= w) continue;
      for (int c = 0; c < 3; ++c) out.image.at(y, x, c) = src.image.at(sy, sx, c);
    }
  }
  for (const auto& label : src.labels) {
    GroundTruth moved = label;
    moved.bbox = BBox{label.bbox.x_min * s + tx, label.bbox.y_min * s + ty,
                      label.bbox.x_max * s + tx, label.bbox.y_max * s + ty};
    clip_and_keep(out.labels, moved, 0.0, 0.0, w, h, min_box_area);
  }
  return out;
}

LabeledImage hflip(const LabeledImage& src) {
  const int w = src.image.width();
  const int h = src.image.height();
  LabeledImage out;
  out.image = Image(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) out.image.at(y, x, c) = src.image.at(y, w - 1 - x, c);
    }
  }
  out.labels = src.labels;
  for (auto& label : out.labels) {
    const double x_min = label.bbox.x_min;
    label.bbox.x_min = w - label.bbox.x_max;
    label.bbox.x_max = w - x_min;
  }
  return out;
}

LabeledImage hsv_jitter(const LabeledImage& src, double dh, double ds, double dv) {
  LabeledImage out;
  out.image = Image(src.image.height(), src.image.width());
  out.labels = src.labels;
  const size_t n = src.image.data().size();
  for (size_t i = 0; i + 2 < n; i += 3) {
    Hsv hsv = rgb_to_hsv(src.image.data()[i], src.image.data()[i + 1], src.image.data()[i + 2]);
    hsv.h = hsv.h + dh - std::floor(hsv.h + dh);  // cyclic, stays in [0,1)
    hsv.s = clamp01(hsv.s * (1.0 + ds));
    hsv.v = clamp01(hsv.v * (1.0 + dv));
    hsv_to_rgb(hsv, out.image.data()[i], out.image.data()[i + 1], out.image.data()[i + 2]);
  }
  return out;
}

LabeledImage mosaic(std::span<const LabeledImage> srcs, int canvas,
                    std::pair<double, double> center, double min_box_area,
                    double pad_value) {
  if (srcs.size() != 4) throw input_error("mosaic: exactly 4 source images required");
  if (canvas < 2) throw input_error("mosaic: canvas must be >= 2");
  const int cx = static_cast<int>(std::lround(center.first));
  const int cy = static_cast<int>(std::lround(center.second));
  if (cx < 1 || cx > canvas - 1 || cy < 1 || cy > canvas - 1) {
    throw input_error("mosaic: center outside canvas interior");
  }

  LabeledImage out;
  out.image = Image(canvas, canvas, pad_value);

  for (int k = 0; k < 4; ++k) {
    const LabeledImage& src = srcs[k];
    const int sw = src.image.width();
    const int sh = src.image.height();
    const bool right = (k == 1 || k == 3);
    const bool bottom = (k == 2 || k == 3);

    // Visible extent of this tile inside its quadrant.
    const int vis_w = std::min(sw, right ? canvas - cx : cx);
    const int vis_h = std::min(sh, bottom ? canvas - cy : cy);
    const int dst_x0 = right ? cx : cx - vis_w;
    const int dst_y0 = bottom ? cy : cy - vis_h;
    const int src_x0 = right ? 0 : sw - vis_w;
    const int src_y0 = bottom ? 0 : sh - vis_h;
    // Labels shift by the placement of the tile's origin.
    const double off_x = right ? cx : cx - sw;
    const double off_y = bottom ? cy : cy - sh;

    for (int y = 0; y < vis_h; ++y) {
      for (int x = 0; x < vis_w; ++x) {
        for (int c = 0; c < 3; ++c) {
          out.image.at(dst_y0 + y, dst_x0 + x, c) = src.image.at(src_y0 + y, src_x0 + x, c);
        }
      }
    }
    for (const auto& label : src.labels) {
      GroundTruth moved = label;
      moved.bbox = BBox{label.bbox.x_min + off_x, label.bbox.y_min + off_y,
                        label.bbox.x_max + off_x, label.bbox.y_max + off_y};
      clip_and_keep(out.labels, moved, dst_x0, dst_y0, dst_x0 + vis_w, dst_y0 + vis_h,
                    min_box_area);
    }
  }
  return out;
}

LabeledImage mixup(const LabeledImage& a, const LabeledImage& b, double lambda) {
  if (!a.image.same_size(b.image)) throw input_error("mixup: image sizes differ");
  if (lambda < 0.0 || lambda > 1.0) throw input_error("mixup: lambda outside [0,1]");
  LabeledImage out;
  out.image = Image(a.image.height(), a.image.width());
  const auto& da = a.image.data();
  const auto& db = b.image.data();
  auto& dst = out.image.data();
  for (size_t i = 0; i < dst.size(); ++i) dst[i] = lambda * da[i] + (1.0 - lambda) * db[i];
  out.labels = a.labels;
  out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
  return out;
}

namespace {

LabeledImage compose_sample(std::span<const LabeledImage> pool, size_t index,
                            const AugmentConfig& config, Rng& rng, bool allow_mixup) {
  const int target = config.target_size;
  LabeledImage base;
  if (config.mosaic_enabled && pool.size() >= 4) {
    std::vector<LabeledImage> tiles;
    tiles.push_back(letterbox(pool[index], target).first);
    for (int k = 0; k < 3; ++k) {
      const size_t pick = static_cast<size_t>(
          rng.uniform_int(0, static_cast<int64_t>(pool.size()) - 1));
      tiles.push_back(letterbox(pool[pick], target).first);
    }
    const int big = 2 * target;
    // Center jitter stays in the central half of the canvas.
    const double cx = rng.uniform(big * 0.25, big * 0.75);
    const double cy = rng.uniform(big * 0.25, big * 0.75);
    LabeledImage merged = mosaic(tiles, big, {cx, cy}, config.min_box_area);
    base = letterbox(merged, target).first;
  } else {
    base = letterbox(pool[index], target).first;
  }

  if (allow_mixup && config.mixup_enabled && pool.size() >= 2) {
    const size_t other = static_cast<size_t>(
        rng.uniform_int(0, static_cast<int64_t>(pool.size()) - 1));
    LabeledImage partner = compose_sample(pool, other, config, rng, false);
    const double lambda = rng.beta(config.mixup_beta, config.mixup_beta);
    base = mixup(base, partner, lambda);
  }
  return base;
}

}  // namespace

LabeledImage apply_pipeline(std::span<const LabeledImage> pool, size_t index,
                            const AugmentConfig& config) {
  config.validate();
  if (index >= pool.size()) throw input_error("apply_pipeline: sample index out of range");
  Rng rng(config.seed, index);
  const int target = config.target_size;

  LabeledImage sample = compose_sample(pool, index, config, rng, true);

  const double s = rng.uniform(config.scale_range.first, config.scale_range.second);
  const double tx = rng.uniform(-config.translate_frac, config.translate_frac) * target +
                    (1.0 - s) * 0.5 * target;  // keep scaling centered on the canvas
  const double ty = rng.uniform(-config.translate_frac, config.translate_frac) * target +
                    (1.0 - s) * 0.5 * target;
  sample = affine_translate_scale(sample, tx, ty, s, config.min_box_area);

  if (rng.bernoulli(config.hflip_prob)) sample = hflip(sample);

  const double dh = rng.uniform(-config.hsv_gain_h, config.hsv_gain_h);
  const double ds = rng.uniform(-config.hsv_gain_s, config.hsv_gain_s);
  const double dv = rng.uniform(-config.hsv_gain_v, config.hsv_gain_v);
  return hsv_jitter(sample, dh, ds, dv);
}

}  // namespace detbench
