#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace detbench {

// Axis-aligned box in continuous pixel coordinates, corner form.
struct BBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }
  double center_x() const { return 0.5 * (x_min + x_max); }
  double center_y() const { return 0.5 * (y_min + y_max); }
  bool valid() const;

  bool operator==(const BBox&) const = default;
};

struct Detection {
  BBox bbox;
  int class_id = 0;
  double score = 0.0;

  bool operator==(const Detection&) const = default;
};

struct GroundTruth {
  BBox bbox;
  int class_id = 0;
  bool ignore = false;

  bool operator==(const GroundTruth&) const = default;
};

// Bookkeeping for an aspect-preserving resize + pad, so detections made in
// the padded frame can be mapped back to original image coordinates.
struct BoxTransform {
  double scale = 1.0;
  double pad_x = 0.0;
  double pad_y = 0.0;
  int orig_width = 0;
  int orig_height = 0;
  int target_width = 0;
  int target_height = 0;

  static BoxTransform identity(int width, int height) {
    return BoxTransform{1.0, 0.0, 0.0, width, height, width, height};
  }
};

enum class BoxFormat {
  XYXY,     // x_min y_min x_max y_max
  CXCYWH,   // center_x center_y width height
  XYWH,     // x_min y_min width height
};

BoxFormat box_format_from_string(const std::string& tag);  // throws input_error
std::string to_string(BoxFormat fmt);

// Intersection over union. Two zero-area boxes give 0. Throws input_error
// on an invalid box (max < min or non-finite).
double iou(const BBox& a, const BBox& b);

// Complete IoU: IoU minus the center-distance and aspect-ratio penalties.
// Widths/heights are clamped to 1e-9 before the arctan term, so a collapsed
// prediction is still finite. gt must be non-degenerate.
double ciou(const BBox& pred, const BBox& gt);

struct CiouLoss {
  double value = 0.0;
  // d(loss)/d(x_min, y_min, x_max, y_max) of pred, with the aspect-ratio
  // coupling coefficient alpha held fixed at its evaluation-point value.
  std::array<double, 4> gradient{};
};

CiouLoss ciou_loss(const BBox& pred, const BBox& gt);

// Greedy suppression: repeatedly keep the highest-score remaining detection
// and discard remaining ones with IoU above the threshold against it (same
// class only when per_class). Output is sorted by descending score with ties
// broken by input index.
std::vector<Detection> nms(std::span<const Detection> dets, double iou_threshold,
                           bool per_class);

std::array<double, 4> convert_box(const std::array<double, 4>& box, BoxFormat from,
                                  BoxFormat to);

// Maps a box from the resized/padded frame back to original image
// coordinates, clipped to the original bounds.
BBox unletterbox(const BBox& box, const BoxTransform& t);

}  // namespace detbench
