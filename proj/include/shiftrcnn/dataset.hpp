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

// Sample datasets as newline-delimited JSON, one object per line:
//
//   {"v":1,"tag":"000001:2","features":[26 numbers],"target":[x,y,z],
//    "dims":[h,w,l],"alpha_global":a,"gt_dims":[h,w,l],"gt_rotation_y":r}
//
// Doubles are written in shortest round-trip form, so reading back is exact.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "shiftrcnn/kitti_io.hpp"
#include "shiftrcnn/shiftnet.hpp"

namespace shiftrcnn::dataset {

inline constexpr int kDatasetVersion = 1;

inline nlohmann::json to_json(const shiftnet::Sample& s) {
  nlohmann::json j;
  j["v"] = kDatasetVersion;
  j["tag"] = s.tag;
  j["features"] = s.features;
  j["target"] = {s.target.tx, s.target.ty, s.target.tz};
  j["dims"] = {s.dims.h, s.dims.w, s.dims.l};
  j["alpha_global"] = s.alpha_global;
  j["gt_dims"] = {s.gt_dims.h, s.gt_dims.w, s.gt_dims.l};
  j["gt_rotation_y"] = s.gt_rotation_y;
  return j;
}

inline shiftnet::Sample from_json(const nlohmann::json& j) {
  try {
    if (j.at("v").get<int>() != kDatasetVersion) throw Error(ErrorCode::FormatVersionMismatch, "unsupported dataset version");
    shiftnet::Sample s;
    s.tag = j.value("tag", std::string{});
    const auto f = j.at("features").get<std::vector<double>>();
    if (f.size() != shiftnet::kNumFeatures) throw Error(ErrorCode::ParseError, "features must hold 26 numbers");
    std::copy(f.begin(), f.end(), s.features.begin());
    auto triple = [&j](const char* key) {
      const auto v = j.at(key).get<std::vector<double>>();
      if (v.size() != 3) throw Error(ErrorCode::ParseError, std::string(key) + " must hold 3 numbers");
      return v;
    };
    const auto t = triple("target");
    const auto d = triple("dims");
    const auto g = triple("gt_dims");
    s.target = {t[0], t[1], t[2]};
    s.dims = {d[0], d[1], d[2]};
    s.gt_dims = {g[0], g[1], g[2]};
    s.alpha_global = j.at("alpha_global").get<double>();
    s.gt_rotation_y = j.at("gt_rotation_y").get<double>();
    if (!(s.target.tz > 0.0)) throw Error(ErrorCode::RangeError, "target depth must be positive");
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

inline std::string write_samples(const std::vector<shiftnet::Sample>& samples) {
  std::string out;
  for (const auto& s : samples) out += to_json(s).dump() + '\n';
  return out;
}

inline std::vector<shiftnet::Sample> parse_samples(const std::string& text) {
  std::vector<shiftnet::Sample> out;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    const std::string line = text.substr(pos, end - pos);
    ++line_no;
    if (line.find_first_not_of(" \t\r") != std::string::npos) {
      try {
        out.push_back(from_json(nlohmann::json::parse(line)));
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + e.what());
      } catch (const Error& e) {
        throw Error(e.code(), "line " + std::to_string(line_no) + ": " + e.message());
      }
    }
    pos = end + 1;
  }
  return out;
}

inline void save_samples(const std::vector<shiftnet::Sample>& samples, const std::filesystem::path& path) {
  kitti::write_text_file_atomic(path, write_samples(samples));
}

inline std::vector<shiftnet::Sample> load_samples(const std::filesystem::path& path) {
  return parse_samples(kitti::read_text_file(path));
}

}  // namespace shiftrcnn::dataset
