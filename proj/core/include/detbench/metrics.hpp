#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "detbench/boxes.hpp"

namespace detbench {

struct AreaRange {
  std::string name;
  double lo = 0.0;                                      // inclusive
  double hi = std::numeric_limits<double>::infinity();  // exclusive

  bool contains(double area) const { return area >= lo && area < hi; }
};

struct EvalConfig {
  std::vector<double> iou_thresholds;  // strictly increasing, in (0, 1]
  int recall_points = 101;
  std::vector<AreaRange> area_ranges;  // first entry must be the "all" range
  int max_detections_per_image = 100;

  static EvalConfig coco_default();
  void validate() const;  // throws input_error
};

// Cumulative precision-recall points in detection-rank order, plus the
// ground-truth count they are measured against. n_gt == 0 marks the curve
// undefined (that class/stratum is excluded from means).
struct PRCurve {
  std::vector<std::pair<double, double>> points;  // (recall, precision)
  int64_t n_gt = 0;

  bool defined() const { return n_gt > 0; }
};

struct EvalSummary {
  std::optional<double> map;        // mean over classes and IoU thresholds
  std::optional<double> ap50;
  std::optional<double> ap75;
  std::optional<double> ap_small;
  std::optional<double> ap_medium;
  std::optional<double> ap_large;
  std::vector<double> iou_thresholds;
  // ap_table[class][threshold] for the "all" area range; nullopt where the
  // class has no ground truth.
  std::vector<std::vector<std::optional<double>>> ap_table;
  std::vector<std::optional<double>> per_class_ap;  // mean over thresholds
  int num_classes = 0;

  bool operator==(const EvalSummary&) const = default;
};

enum class MatchLabel : uint8_t { TP, FP, Ignored };

struct MatchResult {
  std::vector<MatchLabel> det_labels;  // aligned with input detections
  std::vector<bool> gt_matched;        // aligned with input ground truths
};

// COCO-style greedy matching for one image and one class. Detections are
// processed in descending score order (ties by input index); each takes the
// unmatched ground truth of highest IoU >= threshold (ties by input index).
// A detection whose best available match is an ignored ground truth is
// labeled Ignored and consumes it.
MatchResult match_detections(std::span<const Detection> dets,
                             std::span<const GroundTruth> gts, double iou_threshold);

// Builds the cumulative curve from dataset-wide labels already sorted by
// descending score. Ignored labels must have been removed by the caller.
PRCurve pr_curve(std::span<const MatchLabel> labels, int64_t n_gt);

// Interpolated average precision: mean over `recall_points` evenly spaced
// recall values of the best precision at recall >= r. Undefined curve gives
// nullopt; a defined but empty curve gives 0.
std::optional<double> ap_101(const PRCurve& curve, int recall_points = 101);

// Full evaluation over a dataset: dets[i] and gts[i] belong to image i.
// Throws input_error when no class has any ground truth. `threads` splits
// the per-image matching; the reduction is an ordered fold, so results are
// bit-identical for any worker count.
EvalSummary coco_map(std::span<const std::vector<Detection>> dets,
                     std::span<const std::vector<GroundTruth>> gts,
                     const EvalConfig& config = EvalConfig::coco_default(),
                     int threads = 1);

}  // namespace detbench
