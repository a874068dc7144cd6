#include "detbench/boxes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "detbench/errors.hpp"

namespace detbench {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kMinSide = 1e-9;  // aspect-ratio guard for collapsed boxes

void require_valid(const BBox& b, const char* who) {
  if (!b.valid()) {
    throw input_error(std::string(who) + ": invalid box (" +
                      std::to_string(b.x_min) + "," + std::to_string(b.y_min) + "," +
                      std::to_string(b.x_max) + "," + std::to_string(b.y_max) + ")");
  }
}

double intersection_area(const BBox& a, const BBox& b) {
  const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  return iw * ih;
}

}  // namespace

bool BBox::valid() const {
  return std::isfinite(x_min) && std::isfinite(y_min) && std::isfinite(x_max) &&
         std::isfinite(y_max) && x_max >= x_min && y_max >= y_min;
}

BoxFormat box_format_from_string(const std::string& tag) {
  if (tag == "xyxy") return BoxFormat::XYXY;
  if (tag == "cxcywh") return BoxFormat::CXCYWH;
  if (tag == "xywh") return BoxFormat::XYWH;
  throw input_error("unknown box format: '" + tag + "' (expected xyxy, cxcywh or xywh)");
}

std::string to_string(BoxFormat fmt) {
  switch (fmt) {
    case BoxFormat::XYXY: return "xyxy";
    case BoxFormat::CXCYWH: return "cxcywh";
    case BoxFormat::XYWH: return "xywh";
  }
  throw input_error("unknown box format tag");
}

double iou(const BBox& a, const BBox& b) {
  require_valid(a, "iou");
  require_valid(b, "iou");
  const double inter = intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return inter / uni;
}

double ciou(const BBox& pred, const BBox& gt) {
  require_valid(pred, "ciou");
  require_valid(gt, "ciou");
  if (gt.width() <= 0.0 || gt.height() <= 0.0) {
    throw input_error("ciou: degenerate ground-truth box");
  }

  const double overlap = iou(pred, gt);

  const double dx = pred.center_x() - gt.center_x();
  const double dy = pred.center_y() - gt.center_y();
  const double rho2 = dx * dx + dy * dy;

  const double cw = std::max(pred.x_max, gt.x_max) - std::min(pred.x_min, gt.x_min);
  const double ch = std::max(pred.y_max, gt.y_max) - std::min(pred.y_min, gt.y_min);
  const double c2 = cw * cw + ch * ch;
  const double center_penalty = c2 > 0.0 ? rho2 / c2 : 0.0;

  const double w = std::max(pred.width(), kMinSide);
  const double h = std::max(pred.height(), kMinSide);
  const double diff = std::atan(gt.width() / gt.height()) - std::atan(w / h);
  const double v = (4.0 / (kPi * kPi)) * diff * diff;
  const double aspect_penalty = v > 0.0 ? v * (v / ((1.0 - overlap) + v)) : 0.0;

  return overlap - center_penalty - aspect_penalty;
}

CiouLoss ciou_loss(const BBox& pred, const BBox& gt) {
  require_valid(pred, "ciou_loss");
  require_valid(gt, "ciou_loss");
  if (gt.width() <= 0.0 || gt.height() <= 0.0) {
    throw input_error("ciou_loss: degenerate ground-truth box");
  }

  const double x1 = pred.x_min, y1 = pred.y_min, x2 = pred.x_max, y2 = pred.y_max;
  const double g1 = gt.x_min, gy1 = gt.y_min, g2 = gt.x_max, gy2 = gt.y_max;

  const double pw = x2 - x1, ph = y2 - y1;
  const double pred_area = pw * ph;
  const double gt_area = gt.area();

  // IoU and its gradient. Indicator terms switch off where the running
  // min/max is decided by the ground-truth box.
  const double ix1 = std::max(x1, g1), iy1 = std::max(y1, gy1);
  const double ix2 = std::min(x2, g2), iy2 = std::min(y2, gy2);
  const double iw = std::max(0.0, ix2 - ix1), ih = std::max(0.0, iy2 - iy1);
  const double inter = iw * ih;
  const double uni = pred_area + gt_area - inter;
  const double overlap = uni > 0.0 ? inter / uni : 0.0;

  std::array<double, 4> d_inter{};
  if (iw > 0.0 && ih > 0.0) {
    d_inter[0] = (x1 > g1 ? -1.0 : 0.0) * ih;
    d_inter[1] = (y1 > gy1 ? -1.0 : 0.0) * iw;
    d_inter[2] = (x2 < g2 ? 1.0 : 0.0) * ih;
    d_inter[3] = (y2 < gy2 ? 1.0 : 0.0) * iw;
  }
  const std::array<double, 4> d_area{-ph, -pw, ph, pw};

  std::array<double, 4> d_iou{};
  if (uni > 0.0) {
    for (int i = 0; i < 4; ++i) {
      const double d_uni = d_area[i] - d_inter[i];
      d_iou[i] = (d_inter[i] * uni - inter * d_uni) / (uni * uni);
    }
  }

  // Center-distance penalty rho^2 / c^2.
  const double dx = 0.5 * (x1 + x2) - 0.5 * (g1 + g2);
  const double dy = 0.5 * (y1 + y2) - 0.5 * (gy1 + gy2);
  const double rho2 = dx * dx + dy * dy;
  const double cw = std::max(x2, g2) - std::min(x1, g1);
  const double ch = std::max(y2, gy2) - std::min(y1, gy1);
  const double c2 = cw * cw + ch * ch;

  const std::array<double, 4> d_rho2{dx, dy, dx, dy};
  const std::array<double, 4> d_cw{x1 < g1 ? -1.0 : 0.0, 0.0, x2 > g2 ? 1.0 : 0.0, 0.0};
  const std::array<double, 4> d_ch{0.0, y1 < gy1 ? -1.0 : 0.0, 0.0, y2 > gy2 ? 1.0 : 0.0};

  double center_penalty = 0.0;
  std::array<double, 4> d_center{};
  if (c2 > 0.0) {
    center_penalty = rho2 / c2;
    for (int i = 0; i < 4; ++i) {
      const double d_c2 = 2.0 * cw * d_cw[i] + 2.0 * ch * d_ch[i];
      d_center[i] = (d_rho2[i] * c2 - rho2 * d_c2) / (c2 * c2);
    }
  }

  // Aspect-ratio penalty alpha * v, alpha frozen.
  const double w = std::max(pw, kMinSide);
  const double h = std::max(ph, kMinSide);
  const double diff = std::atan(gt.width() / gt.height()) - std::atan(w / h);
  const double v = (4.0 / (kPi * kPi)) * diff * diff;
  const double alpha = v > 0.0 ? v / ((1.0 - overlap) + v) : 0.0;

  const double denom = w * w + h * h;
  const double dv_dw = -(8.0 / (kPi * kPi)) * diff * (h / denom);
  const double dv_dh = (8.0 / (kPi * kPi)) * diff * (w / denom);
  const std::array<double, 4> d_v{-dv_dw, -dv_dh, dv_dw, dv_dh};

  CiouLoss out;
  out.value = 1.0 - (overlap - center_penalty - alpha * v);
  for (int i = 0; i < 4; ++i) {
    out.gradient[i] = -(d_iou[i] - d_center[i] - alpha * d_v[i]);
  }
  return out;
}

std::vector<Detection> nms(std::span<const Detection> dets, double iou_threshold,
                           bool per_class) {
  for (const auto& d : dets) require_valid(d.bbox, "nms");

  std::vector<size_t> order(dets.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (dets[a].score != dets[b].score) return dets[a].score > dets[b].score;
    return a < b;
  });

  std::vector<Detection> kept;
  std::vector<char> suppressed(dets.size(), 0);
  for (size_t i = 0; i < order.size(); ++i) {
    if (suppressed[order[i]]) continue;
    const Detection& top = dets[order[i]];
    kept.push_back(top);
    for (size_t j = i + 1; j < order.size(); ++j) {
      const Detection& other = dets[order[j]];
      if (suppressed[order[j]]) continue;
      if (per_class && other.class_id != top.class_id) continue;
      if (iou(top.bbox, other.bbox) > iou_threshold) suppressed[order[j]] = 1;
    }
  }
  return kept;
}

std::array<double, 4> convert_box(const std::array<double, 4>& box, BoxFormat from,
                                  BoxFormat to) {
  double x1, y1, x2, y2;
  switch (from) {
    case BoxFormat::XYXY:
      x1 = box[0]; y1 = box[1]; x2 = box[2]; y2 = box[3];
      break;
    case BoxFormat::CXCYWH:
      x1 = box[0] - 0.5 * box[2]; y1 = box[1] - 0.5 * box[3];
      x2 = box[0] + 0.5 * box[2]; y2 = box[1] + 0.5 * box[3];
      break;
    case BoxFormat::XYWH:
      x1 = box[0]; y1 = box[1]; x2 = box[0] + box[2]; y2 = box[1] + box[3];
      break;
    default:
      throw input_error("convert_box: unknown source format");
  }
  switch (to) {
    case BoxFormat::XYXY:
      return {x1, y1, x2, y2};
    case BoxFormat::CXCYWH:
      return {0.5 * (x1 + x2), 0.5 * (y1 + y2), x2 - x1, y2 - y1};
    case BoxFormat::XYWH:
      return {x1, y1, x2 - x1, y2 - y1};
  }
  throw input_error("convert_box: unknown target format");
}

BBox unletterbox(const BBox& box, const BoxTransform& t) {
  auto map_x = [&](double x) {
    return std::clamp((x - t.pad_x) / t.scale, 0.0, static_cast<double>(t.orig_width));
  };
  auto map_y = [&](double y) {
    return std::clamp((y - t.pad_y) / t.scale, 0.0, static_cast<double>(t.orig_height));
  };
  return BBox{map_x(box.x_min), map_y(box.y_min), map_x(box.x_max), map_y(box.y_max)};
}

}  // namespace detbench
