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

// KITTI object label and calibration text formats.
//
// Label lines hold, whitespace separated:
//   type truncated occluded alpha x1 y1 x2 y2 h w l x y z rotation_y [score]

#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "shiftrcnn/geometry.hpp"

namespace shiftrcnn::kitti {

struct LabelRecord {
  std::string class_name;
  double truncated = 0.0;
  int occluded = 0;
  double alpha = 0.0;
  Box2D bbox;
  Dims3D dims;
  Translation location;
  double rotation_y = 0.0;
  std::optional<double> score;

  bool is_dont_care() const { return class_name == "DontCare"; }
};

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  auto is_ws = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f'; };
  while (i < s.size()) {
    while (i < s.size() && is_ws(s[i])) ++i;
    const std::size_t start = i;
    while (i < s.size() && !is_ws(s[i])) ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

inline double parse_real(std::string_view tok, std::string_view field) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw Error(ErrorCode::ParseError, "field '" + std::string(field) + "': '" + std::string(tok) + "' is not a number");
  }
  return v;
}

inline int parse_int(std::string_view tok, std::string_view field) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw Error(ErrorCode::ParseError, "field '" + std::string(field) + "': '" + std::string(tok) + "' is not an integer");
  }
  return v;
}

inline std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

}  // namespace detail

inline LabelRecord parse_label_line(std::string_view line) {
  const auto tok = detail::split_ws(line);
  if (tok.size() != 15 && tok.size() != 16) {
    throw Error(ErrorCode::FieldCount, "expected 15 or 16 fields, got " + std::to_string(tok.size()));
  }
  LabelRecord r;
  r.class_name = std::string(tok[0]);
  r.truncated = detail::parse_real(tok[1], "truncated");
  r.occluded = detail::parse_int(tok[2], "occluded");
  if (r.occluded < -1 || r.occluded > 3) {
    throw Error(ErrorCode::RangeError, "occluded must be in {0,1,2,3} (or -1), got " + std::to_string(r.occluded));
  }
  r.alpha = detail::parse_real(tok[3], "alpha");
  r.bbox = {detail::parse_real(tok[4], "x1"), detail::parse_real(tok[5], "y1"), detail::parse_real(tok[6], "x2"),
            detail::parse_real(tok[7], "y2")};
  r.dims = {detail::parse_real(tok[8], "h"), detail::parse_real(tok[9], "w"), detail::parse_real(tok[10], "l")};
  r.location = {detail::parse_real(tok[11], "x"), detail::parse_real(tok[12], "y"), detail::parse_real(tok[13], "z")};
  r.rotation_y = detail::parse_real(tok[14], "rotation_y");
  if (tok.size() == 16) r.score = detail::parse_real(tok[15], "score");
  return r;
}

/// KITTI writes two decimals for everything but the score, which gets four.
/// More decimals are still valid label text.
struct LabelFormat {
  int decimals = 2;
  int score_decimals = 4;
};

inline std::string write_label_line(const LabelRecord& r, const LabelFormat& fmt = {}) {
  auto fixed = [&fmt](double v) { return detail::fixed(v, fmt.decimals); };
  std::string s = r.class_name;
  s += ' ' + fixed(r.truncated);
  s += ' ' + std::to_string(r.occluded);
  s += ' ' + fixed(r.alpha);
  for (double v : {r.bbox.x_min, r.bbox.y_min, r.bbox.x_max, r.bbox.y_max}) s += ' ' + fixed(v);
  for (double v : {r.dims.h, r.dims.w, r.dims.l}) s += ' ' + fixed(v);
  for (double v : {r.location.tx, r.location.ty, r.location.tz}) s += ' ' + fixed(v);
  s += ' ' + fixed(r.rotation_y);
  if (r.score) s += ' ' + detail::fixed(*r.score, fmt.score_decimals);
  return s;
}

inline std::vector<LabelRecord> parse_label_text(std::string_view text) {
  std::vector<LabelRecord> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    const std::string_view line = text.substr(pos, end - pos);
    ++line_no;
    if (!detail::split_ws(line).empty()) {
      try {
        out.push_back(parse_label_line(line));
      } catch (const Error& e) {
        throw Error(e.code(), "line " + std::to_string(line_no) + ": " + e.message());
      }
    }
    if (end == text.size()) break;
    pos = end + 1;
  }
  return out;
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

/// Writes via a temporary file and a rename so readers never see a partial file.
inline void write_text_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorCode::IoFailure, "cannot open " + tmp.string() + " for writing");
    f << content;
    if (!f) throw Error(ErrorCode::IoFailure, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot rename onto " + path.string() + ": " + ec.message());
}

inline std::vector<LabelRecord> read_label_file(const std::filesystem::path& path) {
  return parse_label_text(read_text_file(path));
}

inline void write_label_file(const std::vector<LabelRecord>& records, const std::filesystem::path& path,
                             const LabelFormat& fmt = {}) {
  std::string out;
  for (const auto& r : records) out += write_label_line(r, fmt) + '\n';
  write_text_file_atomic(path, out);
}

/// Detection files require a score on every record.
inline void write_detection(const std::vector<LabelRecord>& records, const std::filesystem::path& path,
                            const LabelFormat& fmt = {}) {
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!records[i].score) throw Error(ErrorCode::MissingScore, "record " + std::to_string(i) + " has no score");
  }
  write_label_file(records, path, fmt);
}

// ---------------------------------------------------------------------------
// Calibration

struct CalibRecord {
  CameraMatrix p2;
  std::map<std::string, std::vector<double>> matrices;  // every key, P2 included
};

inline CalibRecord parse_calib(std::string_view text) {
  CalibRecord out;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    const std::string_view line = text.substr(pos, end - pos);
    ++line_no;
    if (!detail::split_ws(line).empty()) {
      const std::size_t colon = line.find(':');
      if (colon == std::string_view::npos) {
        throw Error(ErrorCode::ParseError, "calib line " + std::to_string(line_no) + " has no 'KEY:' prefix");
      }
      const auto key_tok = detail::split_ws(line.substr(0, colon));
      if (key_tok.size() != 1) throw Error(ErrorCode::ParseError, "calib line " + std::to_string(line_no) + " has a bad key");
      std::vector<double> values;
      for (auto tok : detail::split_ws(line.substr(colon + 1))) values.push_back(detail::parse_real(tok, key_tok[0]));
      out.matrices[std::string(key_tok[0])] = std::move(values);
    }
    if (end == text.size()) break;
    pos = end + 1;
  }
  const auto it = out.matrices.find("P2");
  if (it == out.matrices.end()) throw Error(ErrorCode::MissingP2, "calibration has no P2 entry");
  if (it->second.size() != 12) {
    throw Error(ErrorCode::ParseError, "P2 needs 12 values, got " + std::to_string(it->second.size()));
  }
  try {
    out.p2 = CameraMatrix::from_row_major(it->second);
  } catch (const Error& e) {
    throw Error(ErrorCode::ParseError, "P2 is not a valid projection: " + e.message());
  }
  return out;
}

inline CalibRecord read_calib_file(const std::filesystem::path& path) { return parse_calib(read_text_file(path)); }

inline std::string write_calib(const CalibRecord& c) {
  std::string s;
  auto emit = [&s](const std::string& key, const std::vector<double>& v) {
    s += key + ':';
    for (double x : v) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), " %.17g", x);
      s += buf;
    }
    s += '\n';
  };
  std::map<std::string, std::vector<double>> all = c.matrices;
  const auto p = c.p2.row_major();
  all["P2"] = std::vector<double>(p.begin(), p.end());
  for (const auto& [k, v] : all) emit(k, v);
  return s;
}

}  // namespace shiftrcnn::kitti
