#include "detbench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "detbench/errors.hpp"
#include "detbench/util.hpp"

namespace detbench {

namespace {

// One evaluated detection after matching, ready for dataset-wide pooling.
struct ScoredLabel {
  double score;
  int32_t image;      // filled during the fold
  int32_t det_index;  // original index within its image
  MatchLabel label;
};

struct PerImageEval {
  std::vector<std::vector<ScoredLabel>> labels;  // [c * R * T + r * T + t]
  std::vector<int64_t> gt_counts;                // [c * R + r]
};

// Greedy matcher over a precomputed IoU matrix. det_rank holds detection
// indices in (score desc, input index) order; returns one label per ranked
// detection plus which ground truth (if any) each consumed.
void greedy_match(const std::vector<std::vector<double>>& iou_mat,
                  std::span<const int> det_rank, std::span<const char> gt_ignored,
                  double threshold, std::vector<MatchLabel>& labels_out,
                  std::vector<int>& matched_gt_out) {
  const size_t n_gt = iou_mat.empty() ? gt_ignored.size() : iou_mat[0].size();
  std::vector<char> taken(n_gt, 0);
  labels_out.assign(det_rank.size(), MatchLabel::FP);
  matched_gt_out.assign(det_rank.size(), -1);
  for (size_t k = 0; k < det_rank.size(); ++k) {
    const int d = det_rank[k];
    int best = -1;
    double best_iou = 0.0;
    for (size_t g = 0; g < n_gt; ++g) {
      if (taken[g]) continue;
      const double o = iou_mat[d][g];
      if (o >= threshold && o > best_iou) {
        best = static_cast<int>(g);
        best_iou = o;
      }
    }
    if (best < 0) {
      labels_out[k] = MatchLabel::FP;
    } else {
      taken[best] = 1;
      matched_gt_out[k] = best;
      labels_out[k] = gt_ignored[best] ? MatchLabel::Ignored : MatchLabel::TP;
    }
  }
}

PerImageEval eval_one_image(const std::vector<Detection>& dets,
                            const std::vector<GroundTruth>& gts,
                            const EvalConfig& config, int num_classes) {
  const size_t R = config.area_ranges.size();
  const size_t T = config.iou_thresholds.size();
  const size_t C = static_cast<size_t>(num_classes);

  PerImageEval out;
  out.labels.resize(C * R * T);
  out.gt_counts.assign(C * R, 0);

  // Truncate to the top-scoring detections of the whole image before any
  // matching (ties keep input order).
  std::vector<int> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return dets[a].score > dets[b].score;
  });
  if (static_cast<int>(order.size()) > config.max_detections_per_image) {
    order.resize(config.max_detections_per_image);
  }

  std::vector<std::vector<int>> class_dets(C);  // ranked det indices per class
  for (int d : order) class_dets[dets[d].class_id].push_back(d);
  std::vector<std::vector<int>> class_gts(C);
  for (size_t g = 0; g < gts.size(); ++g) class_gts[gts[g].class_id].push_back(static_cast<int>(g));

  std::vector<MatchLabel> labels;
  std::vector<int> matched_gt;
  for (size_t c = 0; c < C; ++c) {
    const auto& dc = class_dets[c];
    const auto& gc = class_gts[c];
    if (dc.empty() && gc.empty()) continue;

    // IoU matrix indexed by rank within the class lists.
    std::vector<std::vector<double>> iou_mat(dc.size(), std::vector<double>(gc.size()));
    for (size_t i = 0; i < dc.size(); ++i) {
      for (size_t j = 0; j < gc.size(); ++j) {
        iou_mat[i][j] = iou(dets[dc[i]].bbox, gts[gc[j]].bbox);
      }
    }
    std::vector<int> det_rank(dc.size());
    std::iota(det_rank.begin(), det_rank.end(), 0);

    for (size_t r = 0; r < R; ++r) {
      const AreaRange& range = config.area_ranges[r];
      std::vector<char> gt_ignored(gc.size(), 0);
      int64_t count = 0;
      for (size_t j = 0; j < gc.size(); ++j) {
        const GroundTruth& gt = gts[gc[j]];
        gt_ignored[j] = gt.ignore || !range.contains(gt.bbox.area());
        if (!gt_ignored[j]) ++count;
      }
      out.gt_counts[c * R + r] = count;

      for (size_t t = 0; t < T; ++t) {
        greedy_match(iou_mat, det_rank, gt_ignored, config.iou_thresholds[t], labels,
                     matched_gt);
        auto& bucket = out.labels[c * R * T + r * T + t];
        for (size_t k = 0; k < dc.size(); ++k) {
          const Detection& det = dets[dc[k]];
          if (labels[k] == MatchLabel::Ignored) continue;
          if (labels[k] == MatchLabel::FP && !range.contains(det.bbox.area())) continue;
          bucket.push_back(ScoredLabel{det.score, 0, dc[k], labels[k]});
        }
      }
    }
  }
  return out;
}

std::optional<double> mean_of_defined(std::span<const std::optional<double>> values) {
  double sum = 0.0;
  int n = 0;
  for (const auto& v : values) {
    if (v) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

}  // namespace

EvalConfig EvalConfig::coco_default() {
  EvalConfig c;
  for (int i = 0; i <= 9; ++i) c.iou_thresholds.push_back((50 + 5 * i) / 100.0);
  const double inf = std::numeric_limits<double>::infinity();
  c.area_ranges = {
      {"all", 0.0, inf},
      {"small", 0.0, 32.0 * 32.0},
      {"medium", 32.0 * 32.0, 96.0 * 96.0},
      {"large", 96.0 * 96.0, inf},
  };
  return c;
}

void EvalConfig::validate() const {
  if (iou_thresholds.empty()) throw input_error("EvalConfig: no IoU thresholds");
  for (size_t i = 0; i < iou_thresholds.size(); ++i) {
    const double t = iou_thresholds[i];
    if (!(t > 0.0 && t <= 1.0)) throw input_error("EvalConfig: threshold outside (0,1]");
    if (i > 0 && t <= iou_thresholds[i - 1]) {
      throw input_error("EvalConfig: thresholds must be strictly increasing");
    }
  }
  if (recall_points < 2) throw input_error("EvalConfig: recall_points must be >= 2");
  if (area_ranges.empty() || area_ranges[0].lo != 0.0 ||
      area_ranges[0].hi != std::numeric_limits<double>::infinity()) {
    throw input_error("EvalConfig: first area range must cover [0, inf)");
  }
  for (size_t i = 1; i < area_ranges.size(); ++i) {
    for (size_t j = i + 1; j < area_ranges.size(); ++j) {
      const AreaRange& a = area_ranges[i];
      const AreaRange& b = area_ranges[j];
      if (a.lo < b.hi && b.lo < a.hi) {
        throw input_error("EvalConfig: overlapping area ranges '" + a.name + "' and '" +
                          b.name + "'");
      }
    }
  }
  if (max_detections_per_image < 1) {
    throw input_error("EvalConfig: max_detections_per_image must be >= 1");
  }
}

MatchResult match_detections(std::span<const Detection> dets,
                             std::span<const GroundTruth> gts, double iou_threshold) {
  std::vector<int> rank(dets.size());
  std::iota(rank.begin(), rank.end(), 0);
  std::stable_sort(rank.begin(), rank.end(), [&](int a, int b) {
    return dets[a].score > dets[b].score;
  });

  std::vector<std::vector<double>> iou_mat(dets.size(), std::vector<double>(gts.size()));
  for (size_t i = 0; i < dets.size(); ++i) {
    for (size_t j = 0; j < gts.size(); ++j) iou_mat[i][j] = iou(dets[i].bbox, gts[j].bbox);
  }
  std::vector<char> gt_ignored(gts.size());
  for (size_t j = 0; j < gts.size(); ++j) gt_ignored[j] = gts[j].ignore ? 1 : 0;

  // greedy_match indexes the matrix by ranked position, so rank maps back.
  std::vector<int> ranked_rows(dets.size());
  std::iota(ranked_rows.begin(), ranked_rows.end(), 0);
  std::vector<std::vector<double>> ranked_mat(dets.size());
  for (size_t k = 0; k < dets.size(); ++k) ranked_mat[k] = iou_mat[rank[k]];

  std::vector<MatchLabel> ranked_labels;
  std::vector<int> matched_gt;
  greedy_match(ranked_mat, ranked_rows, gt_ignored, iou_threshold, ranked_labels,
               matched_gt);

  MatchResult out;
  out.det_labels.resize(dets.size());
  out.gt_matched.assign(gts.size(), false);
  for (size_t k = 0; k < dets.size(); ++k) {
    out.det_labels[rank[k]] = ranked_labels[k];
    if (matched_gt[k] >= 0) out.gt_matched[matched_gt[k]] = true;
  }
  return out;
}

PRCurve pr_curve(std::span<const MatchLabel> labels, int64_t n_gt) {
  if (n_gt < 0) throw input_error("pr_curve: negative ground-truth count");
  PRCurve curve;
  curve.n_gt = n_gt;
  if (n_gt == 0) return curve;
  int64_t tp = 0, fp = 0;
  curve.points.reserve(labels.size());
  for (MatchLabel label : labels) {
    if (label == MatchLabel::Ignored) {
      throw input_error("pr_curve: ignored labels must be filtered out");
    }
    if (label == MatchLabel::TP) ++tp; else ++fp;
    const double recall = static_cast<double>(tp) / static_cast<double>(n_gt);
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    curve.points.emplace_back(recall, precision);
  }
  return curve;
}

std::optional<double> ap_101(const PRCurve& curve, int recall_points) {
  if (!curve.defined()) return std::nullopt;
  if (recall_points < 2) throw input_error("ap_101: need at least 2 recall points");
  const auto& pts = curve.points;
  if (pts.empty()) return 0.0;

  // Precision envelope from the right: env[i] = best precision at rank >= i.
  std::vector<double> env(pts.size());
  double running = 0.0;
  for (size_t i = pts.size(); i-- > 0;) {
    running = std::max(running, pts[i].second);
    env[i] = running;
  }

  double sum = 0.0;
  size_t lo = 0;
  for (int k = 0; k < recall_points; ++k) {
    const double r = static_cast<double>(k) / (recall_points - 1);
    while (lo < pts.size() && pts[lo].first < r) ++lo;
    if (lo < pts.size()) sum += env[lo];
  }
  return sum / recall_points;
}

EvalSummary coco_map(std::span<const std::vector<Detection>> dets,
                     std::span<const std::vector<GroundTruth>> gts,
                     const EvalConfig& config, int threads) {
  config.validate();
  if (dets.size() != gts.size()) {
    throw input_error("coco_map: detection and ground-truth image counts differ");
  }

  int num_classes = 0;
  for (const auto& image_dets : dets) {
    for (const auto& d : image_dets) {
      if (d.class_id < 0) throw input_error("coco_map: negative class id");
      if (!(d.score >= 0.0 && d.score <= 1.0)) {
        throw input_error("coco_map: score outside [0,1]");
      }
      num_classes = std::max(num_classes, d.class_id + 1);
    }
  }
  for (const auto& image_gts : gts) {
    for (const auto& g : image_gts) {
      if (g.class_id < 0) throw input_error("coco_map: negative class id");
      num_classes = std::max(num_classes, g.class_id + 1);
    }
  }

  const size_t n_images = dets.size();
  const size_t C = static_cast<size_t>(num_classes);
  const size_t R = config.area_ranges.size();
  const size_t T = config.iou_thresholds.size();

  std::vector<PerImageEval> per_image(n_images);
  parallel_for(n_images, threads, [&](size_t i) {
    per_image[i] = eval_one_image(dets[i], gts[i], config, num_classes);
  });

  std::vector<int64_t> gt_counts(C * R, 0);
  for (const auto& pi : per_image) {
    for (size_t i = 0; i < gt_counts.size(); ++i) gt_counts[i] += pi.gt_counts[i];
  }
  int64_t total_gt = 0;
  for (size_t c = 0; c < C; ++c) total_gt += gt_counts[c * R + 0];
  if (total_gt == 0) {
    throw input_error("coco_map: no class has any ground truth; summary undefined");
  }

  // ap[c][r][t]; ordered fold keeps results identical for any thread count.
  std::vector<std::optional<double>> ap(C * R * T);
  std::vector<ScoredLabel> pooled;
  std::vector<MatchLabel> labels;
  for (size_t c = 0; c < C; ++c) {
    for (size_t r = 0; r < R; ++r) {
      for (size_t t = 0; t < T; ++t) {
        pooled.clear();
        for (size_t img = 0; img < n_images; ++img) {
          for (ScoredLabel entry : per_image[img].labels[c * R * T + r * T + t]) {
            entry.image = static_cast<int32_t>(img);
            pooled.push_back(entry);
          }
        }
        // Per-image buckets are already (score desc, det index); a stable
        // sort on score alone yields (score desc, image, det index).
        std::stable_sort(pooled.begin(), pooled.end(),
                         [](const ScoredLabel& a, const ScoredLabel& b) {
                           return a.score > b.score;
                         });
        labels.clear();
        for (const auto& e : pooled) labels.push_back(e.label);
        ap[c * R * T + r * T + t] =
            ap_101(pr_curve(labels, gt_counts[c * R + r]), config.recall_points);
      }
    }
  }

  EvalSummary summary;
  summary.num_classes = num_classes;
  summary.iou_thresholds = config.iou_thresholds;
  summary.ap_table.assign(C, std::vector<std::optional<double>>(T));
  summary.per_class_ap.assign(C, std::nullopt);
  for (size_t c = 0; c < C; ++c) {
    for (size_t t = 0; t < T; ++t) summary.ap_table[c][t] = ap[c * R * T + 0 * T + t];
    summary.per_class_ap[c] = mean_of_defined(summary.ap_table[c]);
  }
  summary.map = mean_of_defined(summary.per_class_ap);

  auto threshold_slice = [&](double wanted) -> std::optional<double> {
    for (size_t t = 0; t < T; ++t) {
      if (std::abs(config.iou_thresholds[t] - wanted) < 1e-12) {
        std::vector<std::optional<double>> per_class(C);
        for (size_t c = 0; c < C; ++c) per_class[c] = ap[c * R * T + 0 * T + t];
        return mean_of_defined(per_class);
      }
    }
    return std::nullopt;
  };
  summary.ap50 = threshold_slice(0.50);
  summary.ap75 = threshold_slice(0.75);

  auto range_mean = [&](const std::string& name) -> std::optional<double> {
    for (size_t r = 0; r < R; ++r) {
      if (config.area_ranges[r].name != name) continue;
      std::vector<std::optional<double>> per_class(C);
      for (size_t c = 0; c < C; ++c) {
        std::vector<std::optional<double>> per_t(T);
        for (size_t t = 0; t < T; ++t) per_t[t] = ap[c * R * T + r * T + t];
        per_class[c] = mean_of_defined(per_t);
      }
      return mean_of_defined(per_class);
    }
    return std::nullopt;
  };
  summary.ap_small = range_mean("small");
  summary.ap_medium = range_mean("medium");
  summary.ap_large = range_mean("large");

  return summary;
}

}  // namespace detbench
