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

// Camera-frame geometry shared by every stage: box corners, the y-axis
// rotation, central projection and the orientation bookkeeping between the
// local (observation) angle and the global yaw.
//
// Frames follow the KITTI camera convention: x right, y down, z forward.
// An object's translation is the center of its bottom face, so the values
// read from a KITTI `location` field can be used directly.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <sstream>

#include "shiftrcnn/error.hpp"

namespace shiftrcnn {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat34 = Eigen::Matrix<double, 3, 4>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Wraps an angle into (-pi, pi].
inline double normalize_angle(double a) {
  double r = std::remainder(a, kTwoPi);
  if (r <= -kPi) r += kTwoPi;
  return r;
}

// ---------------------------------------------------------------------------
// Value types

struct Box2D {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }
  double center_u() const { return 0.5 * (x_min + x_max); }
  double center_v() const { return 0.5 * (y_min + y_max); }

  bool valid() const {
    return std::isfinite(x_min) && std::isfinite(y_min) && std::isfinite(x_max) &&
           std::isfinite(y_max) && x_min < x_max && y_min < y_max;
  }

  static Box2D checked(double x_min, double y_min, double x_max, double y_max) {
    Box2D b{x_min, y_min, x_max, y_max};
    if (!b.valid()) throw Error(ErrorCode::InvalidArgument, "Box2D needs x_min < x_max, y_min < y_max");
    return b;
  }

  friend bool operator==(const Box2D&, const Box2D&) = default;
};

/// Height, width, length in meters (KITTI order).
struct Dims3D {
  double h = 0.0;
  double w = 0.0;
  double l = 0.0;

  bool valid() const {
    return std::isfinite(h) && std::isfinite(w) && std::isfinite(l) && h > 0.0 && w > 0.0 && l > 0.0;
  }
  double volume() const { return h * w * l; }
  double max_extent() const { return std::max({h, w, l}); }

  static Dims3D checked(double h, double w, double l) {
    Dims3D d{h, w, l};
    if (!d.valid()) throw Error(ErrorCode::InvalidArgument, "Dims3D must be positive and finite");
    return d;
  }

  friend bool operator==(const Dims3D&, const Dims3D&) = default;
};

/// Bottom-face center of a box in camera coordinates. Whether it lies in
/// front of the camera is left to consumers.
struct Translation {
  double tx = 0.0;
  double ty = 0.0;
  double tz = 0.0;

  Vec3 vec() const { return {tx, ty, tz}; }
  static Translation from(const Vec3& v) { return {v.x(), v.y(), v.z()}; }
  bool finite() const { return std::isfinite(tx) && std::isfinite(ty) && std::isfinite(tz); }

  friend bool operator==(const Translation&, const Translation&) = default;
};

/// 3x4 projection matrix, stored as an Eigen matrix.
class CameraMatrix {
 public:
  CameraMatrix() = default;

  explicit CameraMatrix(const Mat34& p) : p_(p) {
    if (!p_.allFinite()) throw Error(ErrorCode::InvalidArgument, "camera matrix has non-finite entries");
    if (std::abs(p_.leftCols<3>().determinant()) < 1e-12) {
      throw Error(ErrorCode::InvalidArgument, "camera matrix left 3x3 block is singular");
    }
  }

  static CameraMatrix from_row_major(std::span<const double> v) {
    if (v.size() != 12) throw Error(ErrorCode::InvalidArgument, "camera matrix needs 12 values");
    Mat34 p;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 4; ++c) p(r, c) = v[static_cast<std::size_t>(4 * r + c)];
    return CameraMatrix(p);
  }

  /// Pinhole matrix K [I | 0].
  static CameraMatrix pinhole(double f, double cu, double cv) {
    Mat34 p = Mat34::Zero();
    p(0, 0) = f;
    p(1, 1) = f;
    p(0, 2) = cu;
    p(1, 2) = cv;
    p(2, 2) = 1.0;
    return CameraMatrix(p);
  }

  std::array<double, 12> row_major() const {
    std::array<double, 12> out{};
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 4; ++c) out[static_cast<std::size_t>(4 * r + c)] = p_(r, c);
    return out;
  }

  const Mat34& matrix() const { return p_; }
  double operator()(int r, int c) const { return p_(r, c); }

  /// Homogeneous image coordinates P [x; 1].
  Vec3 homogeneous(const Vec3& x) const { return p_.leftCols<3>() * x + p_.col(3); }

  /// Third homogeneous coordinate, the projective depth of x.
  double depth(const Vec3& x) const { return p_.row(2).head<3>().dot(x) + p_(2, 3); }

 private:
  Mat34 p_ = Mat34::Zero();
};

/// P = s K [R | t] with K upper triangular, positive diagonal, K(2,2) = 1.
struct CameraDecomposition {
  Mat3 intrinsics;
  Mat3 rotation;
  Vec3 translation;

  double fu() const { return intrinsics(0, 0); }
  double fv() const { return intrinsics(1, 1); }
  double cu() const { return intrinsics(0, 2); }
  double cv() const { return intrinsics(1, 2); }
};

/// RQ decomposition of the left 3x3 block. For KITTI rectified matrices the
/// rotation is the identity and the translation column carries the stereo
/// baseline offset.
inline CameraDecomposition decompose(const CameraMatrix& cam) {
  const Mat34& p = cam.matrix();
  Mat3 m = p.leftCols<3>();
  Mat3 flip = Mat3::Zero();
  flip(0, 2) = flip(1, 1) = flip(2, 0) = 1.0;

  Eigen::HouseholderQR<Mat3> qr((flip * m).transpose());
  Mat3 q = qr.householderQ();
  Mat3 u = qr.matrixQR().triangularView<Eigen::Upper>();

  Mat3 k = flip * u.transpose() * flip;
  Mat3 r = flip * q.transpose();
  for (int i = 0; i < 3; ++i) {
    if (k(i, i) < 0.0) {
      k.col(i) *= -1.0;
      r.row(i) *= -1.0;
    }
  }
  CameraDecomposition out;
  out.translation = k.triangularView<Eigen::Upper>().solve(p.col(3));
  out.intrinsics = k / k(2, 2);
  out.rotation = r;
  return out;
}

// ---------------------------------------------------------------------------
// Orientation

/// alpha_G = alpha_L + theta_ray. KITTI ground truth satisfies
/// rotation_y = alpha + atan2(x, z), and theta_ray grows to the right of the
/// principal point, so the ray angle is added.
inline double local_to_global(double alpha_local, double theta_ray) {
  return normalize_angle(alpha_local + theta_ray);
}

inline double global_to_local(double alpha_global, double theta_ray) {
  return normalize_angle(alpha_global - theta_ray);
}

struct OrientationY {
  double alpha_local = 0.0;
  double alpha_global = 0.0;
  double theta_ray = 0.0;

  static OrientationY from_local(double alpha_local, double theta_ray) {
    const double ray = normalize_angle(theta_ray);
    return {normalize_angle(alpha_local), local_to_global(alpha_local, ray), ray};
  }
  static OrientationY from_global(double alpha_global, double theta_ray) {
    const double ray = normalize_angle(theta_ray);
    return {global_to_local(alpha_global, ray), normalize_angle(alpha_global), ray};
  }
};

/// Horizontal angle of the ray through the box center, atan2(u_c - c_u, f_u).
inline double ray_angle(const Box2D& b, const CameraMatrix& cam) {
  const CameraDecomposition k = decompose(cam);
  return normalize_angle(std::atan2(b.center_u() - k.cu(), k.fu()));
}

// ---------------------------------------------------------------------------
// Boxes

/// x' = x cos a + z sin a, z' = -x sin a + z cos a.
inline Mat3 rot_y(double alpha) {
  const double c = std::cos(alpha);
  const double s = std::sin(alpha);
  Mat3 r;
  r << c, 0.0, s,  //
      0.0, 1.0, 0.0,  //
      -s, 0.0, c;
  return r;
}

enum class Frame { ObjectLocal, Camera };

/// Corner order: 0..3 walk the bottom face counter-clockwise seen from above
/// (+x+z, -x+z, -x-z, +x-z); 4..7 are the top corners above 0..3.
/// Vertical edge e joins corners e and e + 4.
struct Corners3D {
  std::array<Vec3, 8> points;
  Frame frame = Frame::ObjectLocal;

  const Vec3& operator[](std::size_t i) const { return points[i]; }
  Vec3 centroid() const {
    Vec3 c = Vec3::Zero();
    for (const auto& p : points) c += p;
    return c / 8.0;
  }
};

inline constexpr int kNumBottomCorners = 4;

inline Corners3D corners_at_origin(const Dims3D& d) {
  const double hl = 0.5 * d.l;
  const double hw = 0.5 * d.w;
  static constexpr std::array<std::array<double, 2>, 4> ring{{{1, 1}, {-1, 1}, {-1, -1}, {1, -1}}};
  Corners3D c;
  c.frame = Frame::ObjectLocal;
  for (std::size_t i = 0; i < 4; ++i) {
    c.points[i] = Vec3(ring[i][0] * hl, 0.0, ring[i][1] * hw);
    c.points[i + 4] = Vec3(ring[i][0] * hl, -d.h, ring[i][1] * hw);
  }
  return c;
}

inline Corners3D transform_corners(const Corners3D& c, double alpha_global, const Translation& t) {
  const Mat3 r = rot_y(alpha_global);
  const Vec3 tv = t.vec();
  Corners3D out;
  out.frame = Frame::Camera;
  for (std::size_t i = 0; i < 8; ++i) out.points[i] = r * c.points[i] + tv;
  return out;
}

inline Corners3D inverse_transform_corners(const Corners3D& c, double alpha_global, const Translation& t) {
  const Mat3 rt = rot_y(alpha_global).transpose();
  const Vec3 tv = t.vec();
  Corners3D out;
  out.frame = Frame::ObjectLocal;
  for (std::size_t i = 0; i < 8; ++i) out.points[i] = rt * (c.points[i] - tv);
  return out;
}

inline Corners3D box_corners(const Dims3D& d, double alpha_global, const Translation& t) {
  return transform_corners(corners_at_origin(d), alpha_global, t);
}

// ---------------------------------------------------------------------------
// Projection

inline constexpr double kMinProjectiveDepth = 1e-9;

inline Vec2 project(const Vec3& pt, const CameraMatrix& cam) {
  const Vec3 h = cam.homogeneous(pt);
  if (std::abs(h.z()) < kMinProjectiveDepth) {
    std::ostringstream os;
    os << "point (" << pt.transpose() << ") lies on the principal plane";
    throw Error(ErrorCode::DegenerateDepth, os.str());
  }
  return {h.x() / h.z(), h.y() / h.z()};
}

/// Tight image rectangle around the eight projected corners.
inline Box2D projected_bbox(const Corners3D& c, const CameraMatrix& cam) {
  Box2D b{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
          -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& p : c.points) {
    const Vec3 h = cam.homogeneous(p);
    if (!(h.z() > 0.0)) throw Error(ErrorCode::BehindCamera, "box corner is not in front of the camera");
    const double u = h.x() / h.z();
    const double v = h.y() / h.z();
    b.x_min = std::min(b.x_min, u);
    b.x_max = std::max(b.x_max, u);
    b.y_min = std::min(b.y_min, v);
    b.y_max = std::max(b.y_max, v);
  }
  return b;
}

inline double iou_2d(const Box2D& a, const Box2D& b) {
  const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

}  // namespace shiftrcnn
