// Copyright 2026 The shiftrcnn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Rotated-box overlap and KITTI-style average precision.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "shiftrcnn/geometry.hpp"

namespace shiftrcnn::eval {

using Polygon = std::vector<Vec2>;

inline double polygon_area(const Polygon& p) {
  double s = 0.0;
  const std::size_t n = p.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = p[i];
    const Vec2& b = p[(i + 1) % n];
    s += a.x() * b.y() - b.x() * a.y();
  }
  return 0.5 * s;
}

namespace detail {

inline double cross(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

// Keeps the part of `subject` left of the directed line a->b.
inline Polygon clip_half_plane(const Polygon& subject, const Vec2& a, const Vec2& b) {
  Polygon out;
  const std::size_t n = subject.size();
  out.reserve(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& cur = subject[i];
    const Vec2& nxt = subject[(i + 1) % n];
    const double dc = cross(a, b, cur);
    const double dn = cross(a, b, nxt);
    if (dc >= 0.0) out.push_back(cur);
    if ((dc >= 0.0) != (dn >= 0.0)) {
      const double t = dc / (dc - dn);
      out.push_back(cur + t * (nxt - cur));
    }
  }
  return out;
}

}  // namespace detail

/// Intersection area of two convex counter-clockwise polygons
/// (Sutherland-Hodgman clipping of `a` by every edge of `b`).
inline double polygon_intersection_area(const Polygon& a, const Polygon& b) {
  Polygon clipped = a;
  const std::size_t n = b.size();
  for (std::size_t i = 0; i < n && clipped.size() >= 3; ++i) {
    clipped = detail::clip_half_plane(clipped, b[i], b[(i + 1) % n]);
  }
  if (clipped.size() < 3) return 0.0;
  return std::max(0.0, polygon_area(clipped));
}

/// Footprint of a box on the x-z ground plane.
struct OrientedBoxBEV {
  double cx = 0.0;
  double cz = 0.0;
  double l = 0.0;
  double w = 0.0;
  double yaw = 0.0;

  double area() const { return l * w; }

  /// Counter-clockwise in the (x, z) plane, rotated with rot_y.
  Polygon polygon() const {
    const double c = std::cos(yaw);
    const double s = std::sin(yaw);
    static constexpr double ring[4][2] = {{1, 1}, {-1, 1}, {-1, -1}, {1, -1}};
    Polygon p(4);
    for (int i = 0; i < 4; ++i) {
      const double x = ring[i][0] * 0.5 * l;
      const double z = ring[i][1] * 0.5 * w;
      p[static_cast<std::size_t>(i)] = Vec2(cx + x * c + z * s, cz - x * s + z * c);
    }
    return p;
  }
};

/// A y-axis-aligned box: KITTI location (bottom center), dims, rotation_y.
struct Box3D {
  Translation location;
  Dims3D dims;
  double rotation_y = 0.0;

  OrientedBoxBEV bev() const { return {location.tx, location.tz, dims.l, dims.w, rotation_y}; }
  double y_top() const { return location.ty - dims.h; }
  double y_bottom() const { return location.ty; }
};

inline double iou_bev(const OrientedBoxBEV& a, const OrientedBoxBEV& b) {
  const double inter = polygon_intersection_area(a.polygon(), b.polygon());
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

inline double iou_bev(const Box3D& a, const Box3D& b) { return iou_bev(a.bev(), b.bev()); }

inline double iou_3d(const Box3D& a, const Box3D& b) {
  const double overlap_y = std::min(a.y_bottom(), b.y_bottom()) - std::max(a.y_top(), b.y_top());
  if (overlap_y <= 0.0) return 0.0;
  const double inter = polygon_intersection_area(a.bev().polygon(), b.bev().polygon()) * overlap_y;
  const double uni = a.dims.volume() + b.dims.volume() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Average precision

struct Difficulty {
  std::string name;
  double min_bbox_height = 0.0;
  int max_occlusion = 0;
  double max_truncation = 0.0;
};

inline const Difficulty kEasy{"Easy", 40.0, 0, 0.15};
inline const Difficulty kModerate{"Moderate", 25.0, 1, 0.30};
inline const Difficulty kHard{"Hard", 25.0, 2, 0.50};

inline const std::vector<Difficulty>& all_difficulties() {
  static const std::vector<Difficulty> d{kEasy, kModerate, kHard};
  return d;
}

/// Box fields the evaluator needs from a ground-truth annotation.
struct GtObject {
  Box3D box;
  Box2D bbox;
  double truncated = 0.0;
  int occluded = 0;
};

struct Detection {
  Box3D box;
  Box2D bbox;
  double score = 0.0;
};

/// Ground truth and detections of one class in one image.
struct ImageSet {
  std::vector<GtObject> gt;
  std::vector<Detection> det;
};

using IouFn = std::function<double(const Box3D&, const Box3D&)>;

enum class IgnoreMode {
  Devkit,  // GT outside the difficulty and detections matched to it are ignored
  Strict,  // GT outside the difficulty is dropped; detections on it are false positives
};

struct ApOptions {
  int recall_points = 11;  // 11 (0.0, 0.1, ..., 1.0) or 40 (1/40, ..., 1.0)
  IgnoreMode ignore = IgnoreMode::Devkit;
};

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;
};

struct PrCurve {
  std::vector<PrPoint> points;
  double ap = 0.0;
  int num_positives = 0;
  int true_positives = 0;
  int false_positives = 0;
};

inline bool passes(const GtObject& g, const Difficulty& d) {
  return g.bbox.height() >= d.min_bbox_height && g.occluded <= d.max_occlusion &&
         g.truncated <= d.max_truncation;
}

/// Interpolated AP from a precision-recall curve, p_interp(r) = max precision
/// at recall >= r.
inline double interpolated_ap(const std::vector<PrPoint>& pts, int recall_points) {
  std::vector<double> samples;
  if (recall_points == 11) {
    for (int i = 0; i <= 10; ++i) samples.push_back(i / 10.0);
  } else if (recall_points == 40) {
    for (int i = 1; i <= 40; ++i) samples.push_back(i / 40.0);
  } else {
    throw Error(ErrorCode::InvalidArgument, "recall_points must be 11 or 40");
  }
  double sum = 0.0;
  for (double r : samples) {
    double best = 0.0;
    for (const auto& p : pts)
      if (p.recall >= r - 1e-12) best = std::max(best, p.precision);
    sum += best;
  }
  return sum / static_cast<double>(samples.size());
}

inline PrCurve average_precision(const std::vector<ImageSet>& images, const IouFn& iou_fn, double iou_threshold,
                                 const Difficulty& diff, const ApOptions& opt = {}) {
  struct Scored {
    double score;
    bool tp;
  };
  std::vector<Scored> scored;
  int npos = 0;

  for (const ImageSet& img : images) {
    std::vector<const GtObject*> gts;
    std::vector<bool> ignored;
    for (const auto& g : img.gt) {
      const bool ok = passes(g, diff);
      if (!ok && opt.ignore == IgnoreMode::Strict) continue;
      gts.push_back(&g);
      ignored.push_back(!ok);
      if (ok) ++npos;
    }

    std::vector<std::size_t> order(img.det.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return img.det[a].score > img.det[b].score; });

    std::vector<bool> matched(gts.size(), false);
    for (std::size_t di : order) {
      const Detection& det = img.det[di];
      double best_iou = -1.0;
      std::size_t best = gts.size();
      for (std::size_t gi = 0; gi < gts.size(); ++gi) {
        if (matched[gi]) continue;
        const double iou = iou_fn(det.box, gts[gi]->box);
        if (iou >= iou_threshold && iou > best_iou) {
          best_iou = iou;
          best = gi;
        }
      }
      if (best < gts.size()) {
        matched[best] = true;
        if (!ignored[best]) scored.push_back({det.score, true});
        continue;
      }
      const bool too_small = opt.ignore == IgnoreMode::Devkit && det.bbox.height() < diff.min_bbox_height;
      if (!too_small) scored.push_back({det.score, false});
    }
  }

  if (npos == 0) throw Error(ErrorCode::EmptyGroundTruth, "no ground truth passes the difficulty filter");

  std::stable_sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) { return a.score > b.score; });
  PrCurve curve;
  curve.num_positives = npos;
  int tp = 0;
  int fp = 0;
  for (const auto& s : scored) {
    (s.tp ? tp : fp) += 1;
    curve.points.push_back({static_cast<double>(tp) / npos, static_cast<double>(tp) / (tp + fp)});
  }
  curve.true_positives = tp;
  curve.false_positives = fp;
  curve.ap = interpolated_ap(curve.points, opt.recall_points);
  return curve;
}

/// Percentage of (prediction, ground truth) pairs with 3D IoU at or above
/// the threshold.
inline double accuracy_at_iou(const std::vector<std::pair<Box3D, Box3D>>& pairs, double threshold) {
  if (pairs.empty()) throw Error(ErrorCode::EmptyInput, "no box pairs");
  std::size_t hits = 0;
  for (const auto& [pred, gt] : pairs)
    if (iou_3d(pred, gt) >= threshold) ++hits;
  return 100.0 * static_cast<double>(hits) / static_cast<double>(pairs.size());
}

/// Default IoU thresholds per class.
inline double default_iou_threshold(const std::string& cls) { return cls == "Car" ? 0.7 : 0.5; }

}  // namespace shiftrcnn::eval
