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

// Regression targets and losses: the (sin, cos) angle encoding with its
// unit-norm penalty, log-scale dimension offsets against class means, and
// the volume displacement loss used to train the translation refiner.
//
// The multi-task weights used when these heads are trained jointly with a
// detector are 1.0 (classification), 2.0 (2D box), 5.0 (orientation) and
// 100.0 (dimensions). No detector is trained here.

#pragma once

#include <array>
#include <cmath>
#include <map>
#include <string>

#include "shiftrcnn/geometry.hpp"

namespace shiftrcnn::loss {

// ---------------------------------------------------------------------------
// Angle

struct AngleEncoding {
  double sin_hat = 0.0;
  double cos_hat = 0.0;
};

inline AngleEncoding encode_angle(double alpha) { return {std::sin(alpha), std::cos(alpha)}; }

inline double decode_angle(const AngleEncoding& e) {
  if (e.sin_hat == 0.0 && e.cos_hat == 0.0) throw Error(ErrorCode::ZeroVector, "cannot decode a zero angle vector");
  return normalize_angle(std::atan2(e.sin_hat, e.cos_hat));
}

struct AngleLoss {
  double value = 0.0;
  double d_sin = 0.0;
  double d_cos = 0.0;
};

/// (sin a - s)^2 + (cos a - c)^2 + (1 - (s^2 + c^2))^2 and its gradient with
/// respect to (s, c).
inline AngleLoss angle_loss(const AngleEncoding& pred, double alpha_gt) {
  const double es = std::sin(alpha_gt) - pred.sin_hat;
  const double ec = std::cos(alpha_gt) - pred.cos_hat;
  const double unit = 1.0 - (pred.sin_hat * pred.sin_hat + pred.cos_hat * pred.cos_hat);
  AngleLoss out;
  out.value = es * es + ec * ec + unit * unit;
  out.d_sin = -2.0 * es - 4.0 * unit * pred.sin_hat;
  out.d_cos = -2.0 * ec - 4.0 * unit * pred.cos_hat;
  return out;
}

// ---------------------------------------------------------------------------
// Dimensions

struct DimOffsets {
  double dh = 0.0;
  double dw = 0.0;
  double dl = 0.0;
};

/// Mean dimensions per class name.
class ClassMeans {
 public:
  ClassMeans() = default;

  void set(const std::string& cls, const Dims3D& mean) {
    if (!mean.valid()) throw Error(ErrorCode::NonPositive, "class mean for '" + cls + "' must be positive");
    means_[cls] = mean;
  }

  const Dims3D& at(const std::string& cls) const {
    auto it = means_.find(cls);
    if (it == means_.end()) throw Error(ErrorCode::InvalidArgument, "no mean dimensions for class '" + cls + "'");
    return it->second;
  }

  bool contains(const std::string& cls) const { return means_.count(cls) != 0; }

  /// Typical KITTI training-set means.
  static ClassMeans kitti() {
    ClassMeans m;
    m.set("Car", {1.53, 1.63, 3.88});
    m.set("Van", {2.21, 1.90, 5.08});
    m.set("Truck", {3.25, 2.59, 10.11});
    m.set("Pedestrian", {1.76, 0.66, 0.84});
    m.set("Person_sitting", {1.27, 0.59, 0.80});
    m.set("Cyclist", {1.74, 0.60, 1.76});
    m.set("Tram", {3.53, 2.54, 16.09});
    m.set("Misc", {1.91, 1.51, 3.58});
    return m;
  }

 private:
  std::map<std::string, Dims3D> means_;
};

namespace detail {
inline void require_positive(const Dims3D& d, const char* what) {
  if (!(d.h > 0.0 && d.w > 0.0 && d.l > 0.0)) throw Error(ErrorCode::NonPositive, std::string(what) + " must be positive");
}
}  // namespace detail

inline DimOffsets encode_dims(const Dims3D& d, const Dims3D& mean) {
  detail::require_positive(d, "dimensions");
  detail::require_positive(mean, "mean dimensions");
  return {std::log(d.h / mean.h), std::log(d.w / mean.w), std::log(d.l / mean.l)};
}

inline Dims3D decode_dims(const DimOffsets& off, const Dims3D& mean) {
  detail::require_positive(mean, "mean dimensions");
  return {std::exp(off.dh) * mean.h, std::exp(off.dw) * mean.w, std::exp(off.dl) * mean.l};
}

// ---------------------------------------------------------------------------
// Translation

/// Signed translation displacement error, prediction minus ground truth.
inline Vec3 stde(const Translation& pred, const Translation& gt) { return pred.vec() - gt.vec(); }

inline Vec3 rotate_displacement(const Vec3& dt, double alpha_global) { return rot_y(alpha_global) * dt; }

struct VdlLoss {
  double value = 0.0;
  Vec3 grad = Vec3::Zero();  // d value / d t_pred
};

namespace detail {
inline double sign0(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }
}  // namespace detail

/// Areas swept by the three faces when the box slides along its own x, y
/// and z axes: (w h, w l, h l).
inline Vec3 face_areas(const Dims3D& d) { return {d.w * d.h, d.w * d.l, d.h * d.l}; }

/// Volume displacement loss. The gradient uses sign(0) = 0.
inline VdlLoss vdl(const Translation& pred, const Translation& gt, const Dims3D& d, double alpha_global) {
  const Mat3 r = rot_y(alpha_global);
  const Vec3 disp = r * stde(pred, gt);
  const Vec3 areas = face_areas(d);
  VdlLoss out;
  Vec3 g;
  for (int i = 0; i < 3; ++i) {
    out.value += areas(i) * std::abs(disp(i));
    g(i) = areas(i) * detail::sign0(disp(i));
  }
  out.grad = r.transpose() * g;
  return out;
}

}  // namespace shiftrcnn::loss
