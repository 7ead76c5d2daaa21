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

// Closed-form translation from a 2D box, 3D dimensions and local yaw.
//
// Each side of the 2D box is tied to one corner of the 3D box. The left and
// right sides take two diagonally opposite vertical edges, the top side one
// of the four top corners and the bottom side one of the four bottom
// corners, giving 4 x 1 x 4 x 4 = 64 assignments. For a fixed assignment the
// four side equations are linear in the translation and are solved in the
// least-squares sense. The assignment whose re-projected box best overlaps
// the input box wins.
//
// When only one face of the box is visible the leftmost and rightmost
// vertical edges are adjacent, not diagonal, and none of the 64 diagonal
// assignments fits an exact box. `EdgePairing::Any` adds the 128 adjacent
// assignments after the diagonal ones and is what `lift` uses by default.

#pragma once

#include <array>
#include <optional>
#include <vector>

#include "shiftrcnn/geometry.hpp"

namespace shiftrcnn::lift {

struct Configuration {
  int index = 0;
  int xmin_edge = 0;    // vertical edge 0..3 touching the left side
  int xmax_edge = 2;    // edge touching the right side; diagonal to xmin_edge in the 64-configuration set
  int ymin_corner = 4;  // top corner 4..7 touching the upper side
  int ymax_corner = 0;  // bottom corner 0..3 touching the lower side

  friend bool operator==(const Configuration&, const Configuration&) = default;
};

inline constexpr int kNumConfigurations = 64;
inline constexpr int kNumConfigurationsAnyPair = 192;

inline constexpr int opposite_edge(int edge) { return (edge + 2) % 4; }

enum class EdgePairing {
  Diagonal,  // right edge is diagonally opposite the left one (64 configurations)
  Any,       // diagonal configurations first, then adjacent ones (192)
};

inline std::vector<Configuration> enumerate_configurations(EdgePairing pairing = EdgePairing::Diagonal) {
  std::vector<Configuration> out;
  out.reserve(kNumConfigurationsAnyPair);
  auto emit = [&out](int edge, int other) {
    for (int top = 0; top < 4; ++top) {
      for (int bottom = 0; bottom < 4; ++bottom) {
        Configuration c;
        c.index = static_cast<int>(out.size());
        c.xmin_edge = edge;
        c.xmax_edge = other;
        c.ymin_corner = 4 + top;
        c.ymax_corner = bottom;
        out.push_back(c);
      }
    }
  };
  for (int edge = 0; edge < 4; ++edge) emit(edge, opposite_edge(edge));
  if (pairing == EdgePairing::Any) {
    for (int edge = 0; edge < 4; ++edge) {
      emit(edge, (edge + 1) % 4);
      emit(edge, (edge + 3) % 4);
    }
  }
  return out;
}

/// One linear equation a . t = b.
struct ConstraintRow {
  Vec3 a = Vec3::Zero();
  double b = 0.0;
};

using ConstraintSystem = std::array<ConstraintRow, 4>;

enum class Side { XMin, YMin, XMax, YMax };

/// Row for one box side, with the corner already rotated into the camera
/// orientation. M = P [I, R X; 0, 1], so its first three columns equal P's
/// and its last column is P [R X; 1].
inline ConstraintRow side_row(Side side, double side_value, const Vec3& rotated_corner,
                              const CameraMatrix& cam) {
  const Mat34& p = cam.matrix();
  const Vec3 m4 = p.leftCols<3>() * rotated_corner + p.col(3);
  const bool horizontal = side == Side::XMin || side == Side::XMax;
  const int row = horizontal ? 0 : 1;

  ConstraintRow r;
  r.a = p.row(row).head<3>().transpose() - p.row(2).head<3>().transpose() * side_value;
  r.b = m4(2) * side_value - m4(row);
  return r;
}

/// Rows in the order x_min, y_min, x_max, y_max. The horizontal rows use
/// the bottom corner of their vertical edge.
inline ConstraintSystem build_system(const Configuration& cfg, const Box2D& b2d, const Dims3D& d,
                                     double alpha_global, const CameraMatrix& cam) {
  const Corners3D local = corners_at_origin(d);
  const Mat3 r = rot_y(alpha_global);
  auto corner = [&](int i) -> Vec3 { return r * local.points[static_cast<std::size_t>(i)]; };
  return {
      side_row(Side::XMin, b2d.x_min, corner(cfg.xmin_edge), cam),
      side_row(Side::YMin, b2d.y_min, corner(cfg.ymin_corner), cam),
      side_row(Side::XMax, b2d.x_max, corner(cfg.xmax_edge), cam),
      side_row(Side::YMax, b2d.y_max, corner(cfg.ymax_corner), cam),
  };
}

/// Largest condition number of A^T A accepted before a system is treated as
/// degenerate.
inline constexpr double kMaxNormalCondition = 1e12;

/// Least-squares minimizer of ||A t - b||. Solved with a column-pivoting QR
/// on A rather than by forming (A^T A)^-1; both give the same minimizer.
inline Translation solve_normal_equations(const ConstraintSystem& rows) {
  Eigen::Matrix<double, 4, 3> a;
  Eigen::Vector4d b;
  for (int i = 0; i < 4; ++i) {
    a.row(i) = rows[static_cast<std::size_t>(i)].a.transpose();
    b(i) = rows[static_cast<std::size_t>(i)].b;
  }
  if (!a.allFinite() || !b.allFinite()) throw Error(ErrorCode::SingularSystem, "non-finite constraint rows");

  const Eigen::JacobiSVD<Eigen::Matrix<double, 4, 3>> svd(a);
  const Vec3 sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = sv(2);
  if (!(smin > 0.0) || (smax / smin) * (smax / smin) > kMaxNormalCondition) {
    throw Error(ErrorCode::SingularSystem, "A^T A is numerically singular");
  }
  const Vec3 t = a.colPivHouseholderQr().solve(b);
  return Translation::from(t);
}

inline double residual_norm(const ConstraintSystem& rows, const Translation& t) {
  const Vec3 tv = t.vec();
  double s = 0.0;
  for (const auto& r : rows) {
    const double e = r.a.dot(tv) - r.b;
    s += e * e;
  }
  return std::sqrt(s);
}

struct LiftSolution {
  Translation translation;
  Configuration configuration;
  double reprojection_iou = 0.0;
  double residual_norm = 0.0;
  double alpha_global = 0.0;
  double theta_ray = 0.0;
  Box2D reprojected;
};

struct LiftOptions {
  EdgePairing pairing = EdgePairing::Any;
  double min_depth = 0.5;          // candidates with tz at or below are discarded
  double min_corner_depth = 0.1;   // and so are those with any corner this close
};

/// Scores every configuration. Discarded candidates (singular system,
/// translation or corners too close / behind the camera) are absent.
inline std::vector<LiftSolution> evaluate_candidates(const Box2D& b2d, const Dims3D& d, double alpha_local,
                                                     const CameraMatrix& cam, const LiftOptions& opt = {}) {
  if (!b2d.valid()) throw Error(ErrorCode::InvalidArgument, "invalid 2D box");
  if (!d.valid()) throw Error(ErrorCode::InvalidArgument, "invalid dimensions");
  if (!std::isfinite(alpha_local)) throw Error(ErrorCode::InvalidArgument, "non-finite local angle");

  const double theta = ray_angle(b2d, cam);
  const double alpha_g = local_to_global(alpha_local, theta);
  const Corners3D local = corners_at_origin(d);

  std::vector<LiftSolution> out;
  out.reserve(kNumConfigurationsAnyPair);
  for (const Configuration& cfg : enumerate_configurations(opt.pairing)) {
    const ConstraintSystem rows = build_system(cfg, b2d, d, alpha_g, cam);
    Translation t;
    try {
      t = solve_normal_equations(rows);
    } catch (const Error&) {
      continue;
    }
    if (!t.finite() || t.tz <= opt.min_depth) continue;

    const Corners3D cam_corners = transform_corners(local, alpha_g, t);
    bool in_front = true;
    for (const auto& p : cam_corners.points) {
      if (cam.depth(p) <= opt.min_corner_depth) {
        in_front = false;
        break;
      }
    }
    if (!in_front) continue;

    LiftSolution s;
    s.translation = t;
    s.configuration = cfg;
    s.reprojected = projected_bbox(cam_corners, cam);
    s.reprojection_iou = iou_2d(b2d, s.reprojected);
    s.residual_norm = residual_norm(rows, t);
    s.alpha_global = alpha_g;
    s.theta_ray = theta;
    out.push_back(s);
  }
  return out;
}

/// Higher IoU wins, then the smaller residual, then the lower index.
inline bool better_candidate(const LiftSolution& a, const LiftSolution& b) {
  if (a.reprojection_iou != b.reprojection_iou) return a.reprojection_iou > b.reprojection_iou;
  if (a.residual_norm != b.residual_norm) return a.residual_norm < b.residual_norm;
  return a.configuration.index < b.configuration.index;
}

inline LiftSolution lift(const Box2D& b2d, const Dims3D& d, double alpha_local, const CameraMatrix& cam,
                         const LiftOptions& opt = {}) {
  const std::vector<LiftSolution> candidates = evaluate_candidates(b2d, d, alpha_local, cam, opt);
  if (candidates.empty()) throw Error(ErrorCode::NoValidSolution, "every configuration was discarded");
  const LiftSolution* best = &candidates.front();
  for (const auto& c : candidates)
    if (better_candidate(c, *best)) best = &c;
  return *best;
}

}  // namespace shiftrcnn::lift
