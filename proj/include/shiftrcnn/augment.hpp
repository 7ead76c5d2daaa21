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

// Training-sample synthesis: jitter a ground-truth 3D box, project it back
// through the camera to get its 2D box, run the closed-form lift on the
// jittered estimates and pair the result with the original translation.

#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "shiftrcnn/kitti_io.hpp"
#include "shiftrcnn/lift.hpp"
#include "shiftrcnn/shiftnet.hpp"

namespace shiftrcnn::kitti {

/// Gaussian jitter applied to a ground-truth box. The tz deviation is
/// translation_std.z() + depth_std_ratio * tz.
struct PerturbSpec {
  Vec3 translation_std{0.25, 0.10, 0.0};
  double depth_std_ratio = 0.02;
  double dims_std = 0.08;   // relative, d * (1 + N(0, dims_std))
  double angle_std = 0.05;  // radians, on rotation_y
  // Uniform +-bbox_noise_px on each side of the projected box. Models 2D
  // detector error that is not explained by a consistent 3D box.
  double bbox_noise_px = 0.0;
  double image_width = 1242.0;
  double image_height = 375.0;
  double min_dim = 0.1;
  double min_depth = 0.5;
  int max_redraws = 20;
  std::uint64_t seed = 0;

  static PerturbSpec zero() {
    PerturbSpec s;
    s.translation_std = Vec3::Zero();
    s.depth_std_ratio = 0.0;
    s.dims_std = 0.0;
    s.angle_std = 0.0;
    return s;
  }

  void validate() const {
    if ((translation_std.array() < 0.0).any() || depth_std_ratio < 0.0 || dims_std < 0.0 || angle_std < 0.0 ||
        bbox_noise_px < 0.0 || max_redraws < 1) {
      throw Error(ErrorCode::InvalidArgument, "perturbation deviations must be non-negative");
    }
  }
};

struct PerturbedBox {
  Dims3D dims;
  Translation location;
  double rotation_y = 0.0;
  Box2D bbox;
  int redraws = 0;
};

inline bool inside_image(const Box2D& b, const PerturbSpec& spec) {
  return b.valid() && b.x_min >= 0.0 && b.y_min >= 0.0 && b.x_max <= spec.image_width && b.y_max <= spec.image_height;
}

/// One draw that stays inside the image and in front of the camera.
/// `accept` may reject a draw for further reasons.
template <typename Rng, typename Accept>
PerturbedBox perturb_box(const LabelRecord& r, const PerturbSpec& spec, const CameraMatrix& cam, Rng& rng,
                         Accept&& accept) {
  if (r.is_dont_care()) throw Error(ErrorCode::InvalidArgument, "DontCare records cannot be perturbed");
  if (!r.dims.valid()) throw Error(ErrorCode::InvalidArgument, "record has invalid dimensions");
  spec.validate();

  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int attempt = 0; attempt < spec.max_redraws; ++attempt) {
    PerturbedBox p;
    p.redraws = attempt;
    const double z_std = spec.translation_std.z() + spec.depth_std_ratio * r.location.tz;
    p.location = {r.location.tx + spec.translation_std.x() * gauss(rng),
                  r.location.ty + spec.translation_std.y() * gauss(rng), r.location.tz + z_std * gauss(rng)};
    p.dims = {std::max(spec.min_dim, r.dims.h * (1.0 + spec.dims_std * gauss(rng))),
              std::max(spec.min_dim, r.dims.w * (1.0 + spec.dims_std * gauss(rng))),
              std::max(spec.min_dim, r.dims.l * (1.0 + spec.dims_std * gauss(rng)))};
    p.rotation_y = normalize_angle(r.rotation_y + spec.angle_std * gauss(rng));
    const double side_noise[4] = {unit(rng), unit(rng), unit(rng), unit(rng)};
    if (p.location.tz <= spec.min_depth) continue;

    try {
      p.bbox = projected_bbox(box_corners(p.dims, p.rotation_y, p.location), cam);
    } catch (const Error&) {
      continue;
    }
    p.bbox.x_min += spec.bbox_noise_px * side_noise[0];
    p.bbox.y_min += spec.bbox_noise_px * side_noise[1];
    p.bbox.x_max += spec.bbox_noise_px * side_noise[2];
    p.bbox.y_max += spec.bbox_noise_px * side_noise[3];
    if (!inside_image(p.bbox, spec)) continue;
    if (!accept(p)) continue;
    return p;
  }
  throw Error(ErrorCode::Degenerate, "no valid perturbation after " + std::to_string(spec.max_redraws) + " draws");
}

template <typename Rng>
PerturbedBox perturb_box(const LabelRecord& r, const PerturbSpec& spec, const CameraMatrix& cam, Rng& rng) {
  return perturb_box(r, spec, cam, rng, [](const PerturbedBox&) { return true; });
}

/// Builds the training sample for one perturbed estimate of `r`. The
/// features describe the perturbed box (its 2D box, dimensions, angles and
/// closed-form translation); the target stays the original location. The
/// result depends only on (r, spec, cam), with spec.seed seeding the draw.
inline shiftnet::Sample perturb_record(const LabelRecord& r, const PerturbSpec& spec, const CameraMatrix& cam,
                                       const lift::LiftOptions& lift_opt = {}) {
  std::mt19937_64 rng(spec.seed);
  lift::LiftSolution solution;
  double alpha_local = 0.0;
  auto solvable = [&](const PerturbedBox& p) {
    const double theta = ray_angle(p.bbox, cam);
    alpha_local = global_to_local(p.rotation_y, theta);
    try {
      solution = lift::lift(p.bbox, p.dims, alpha_local, cam, lift_opt);
    } catch (const Error&) {
      return false;
    }
    return true;
  };
  const PerturbedBox p = perturb_box(r, spec, cam, rng, solvable);

  shiftnet::Sample s;
  s.features = shiftnet::make_features(solution.translation, p.bbox, p.dims, alpha_local, solution.alpha_global, cam);
  s.target = r.location;
  s.dims = p.dims;
  s.alpha_global = solution.alpha_global;
  s.gt_dims = r.dims;
  s.gt_rotation_y = r.rotation_y;
  return s;
}

/// splitmix64 step; derives independent per-record seeds from one run seed.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t hash_string(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace shiftrcnn::kitti
