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

// Synthetic ground truth: road-level objects in front of a KITTI-like
// camera, fully inside the image, with exactly projected 2D boxes.

#pragma once

#include <random>
#include <string>
#include <vector>

#include "shiftrcnn/kitti_io.hpp"
#include "shiftrcnn/losses.hpp"

namespace shiftrcnn::synth {

/// P2 of a typical KITTI drive (left color camera, 2011_09_26).
inline CameraMatrix kitti_reference_p2() {
  return CameraMatrix::from_row_major(std::array<double, 12>{7.215377e+02, 0.0, 6.095593e+02, 4.485728e+01, 0.0,
                                                             7.215377e+02, 1.728540e+02, 2.163791e-01, 0.0, 0.0, 1.0,
                                                             2.745884e-03});
}

struct SceneSpec {
  std::vector<std::string> classes{"Car", "Pedestrian", "Cyclist"};
  loss::ClassMeans means = loss::ClassMeans::kitti();
  double min_depth = 5.0;
  double max_depth = 60.0;
  double dims_log_std = 0.08;  // d = mean * exp(N(0, s))
  double camera_height = 1.65;  // mean ty of the bottom face
  double height_std = 0.10;
  double u_margin = 50.0;  // box centers are drawn in [margin, width - margin]
  double image_width = 1242.0;
  double image_height = 375.0;
  int max_tries = 1000;
};

/// One object whose projected box lies inside the image. The label's
/// alpha is the local angle seen from the 2D box center.
template <typename Rng>
kitti::LabelRecord sample_object(const SceneSpec& spec, const CameraMatrix& cam, Rng& rng) {
  if (spec.classes.empty() || !(spec.max_depth > spec.min_depth) || spec.min_depth <= 0.0) {
    throw Error(ErrorCode::InvalidArgument, "bad scene specification");
  }
  const CameraDecomposition k = decompose(cam);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int attempt = 0; attempt < spec.max_tries; ++attempt) {
    const std::string& cls = spec.classes[static_cast<std::size_t>(rng() % spec.classes.size())];
    const Dims3D& mean = spec.means.at(cls);
    const Dims3D d{mean.h * std::exp(spec.dims_log_std * gauss(rng)), mean.w * std::exp(spec.dims_log_std * gauss(rng)),
                   mean.l * std::exp(spec.dims_log_std * gauss(rng))};
    const double tz = spec.min_depth + (spec.max_depth - spec.min_depth) * unit(rng);
    const double u = spec.u_margin + (spec.image_width - 2.0 * spec.u_margin) * unit(rng);
    const Translation t{(u - k.cu()) / k.fu() * tz, spec.camera_height + spec.height_std * gauss(rng), tz};
    const double ry = normalize_angle(-kPi + kTwoPi * unit(rng));

    Box2D b;
    try {
      b = projected_bbox(box_corners(d, ry, t), cam);
    } catch (const Error&) {
      continue;
    }
    if (b.x_min < 0.0 || b.y_min < 0.0 || b.x_max > spec.image_width || b.y_max > spec.image_height) continue;

    kitti::LabelRecord r;
    r.class_name = cls;
    r.bbox = b;
    r.dims = d;
    r.location = t;
    r.rotation_y = ry;
    r.alpha = global_to_local(ry, ray_angle(b, cam));
    return r;
  }
  throw Error(ErrorCode::Degenerate, "could not place an object inside the image");
}

template <typename Rng>
std::vector<kitti::LabelRecord> sample_objects(const SceneSpec& spec, const CameraMatrix& cam, std::size_t n, Rng& rng) {
  std::vector<kitti::LabelRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(sample_object(spec, cam, rng));
  return out;
}

}  // namespace shiftrcnn::synth
