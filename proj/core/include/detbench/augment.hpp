#pragma once

#include <span>
#include <utility>
#include <vector>

#include "detbench/image.hpp"
#include "detbench/rng.hpp"

namespace detbench {

struct AugmentConfig {
  double translate_frac = 0.1;
  std::pair<double, double> scale_range{0.5, 1.5};
  double hflip_prob = 0.5;
  double hsv_gain_h = 0.015;
  double hsv_gain_s = 0.7;
  double hsv_gain_v = 0.4;
  bool mosaic_enabled = false;
  bool mixup_enabled = false;
  double mixup_beta = 32.0;
  double min_box_area = 4.0;
  int target_size = 320;
  uint64_t seed = 0;

  void validate() const;  // throws input_error
};

// Aspect-preserving resize so the longer side equals `target`, centered on a
// target x target canvas filled with pad_value. Nearest-neighbor resampling.
// The returned transform feeds unletterbox.
std::pair<LabeledImage, BoxTransform> letterbox(const LabeledImage& src, int target,
                                                double pad_value = 0.5);

// dst = s * src + (tx, ty) on a same-size canvas, nearest-neighbor, zero fill.
// Labels outside the canvas are clipped; remnants below min_box_area dropped.
LabeledImage affine_translate_scale(const LabeledImage& src, double tx, double ty,
                                    double s, double min_box_area = 4.0);

LabeledImage hflip(const LabeledImage& src);

// Cyclic hue shift (dh in turns), saturation scaled by 1+ds, value by 1+dv,
// clamped to [0,1]. Labels untouched.
LabeledImage hsv_jitter(const LabeledImage& src, double dh, double ds, double dv);

// Four images anchored to the quadrants around `center` on a square canvas:
// top-left image ends at the center, top-right starts there horizontally,
// and so on. Each source is cropped to its quadrant. Labels are offset,
// clipped, and dropped below min_box_area.
LabeledImage mosaic(std::span<const LabeledImage> srcs, int canvas,
                    std::pair<double, double> center, double min_box_area = 4.0,
                    double pad_value = 0.5);

// lambda * a + (1 - lambda) * b with the label sets concatenated (a then b).
LabeledImage mixup(const LabeledImage& a, const LabeledImage& b, double lambda);

// Seeded per-sample pipeline over a pool of samples: optional mosaic of four
// letterboxed sources, optional mixup against a second composite, then random
// translate/scale, horizontal flip, and HSV jitter. The RNG stream is derived
// from (config.seed, sample index), so output is bit-reproducible and samples
// can be generated concurrently.
LabeledImage apply_pipeline(std::span<const LabeledImage> pool, size_t index,
                            const AugmentConfig& config);

}  // namespace detbench
