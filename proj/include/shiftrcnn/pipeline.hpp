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

// Directory-level commands behind the command-line tool. Each one logs
// progress to `log`, writes its outputs atomically and returns a report with
// record-level error counts; the caller turns those into an exit code.
//
// Directories follow the KITTI layout: one `<stem>.txt` label file per image
// and a calibration file with the same stem.

#pragma once

#include <algorithm>
#include <filesystem>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "shiftrcnn/augment.hpp"
#include "shiftrcnn/dataset.hpp"
#include "shiftrcnn/eval.hpp"
#include "shiftrcnn/kitti_io.hpp"
#include "shiftrcnn/lift.hpp"
#include "shiftrcnn/shiftnet.hpp"
#include "shiftrcnn/synthetic.hpp"

namespace shiftrcnn::pipeline {

namespace fs = std::filesystem;

/// Sorted stems of the `*.txt` files in `dir`.
inline std::vector<std::string> list_stems(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw Error(ErrorCode::IoFailure, dir.string() + " is not a directory");
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".txt") out.push_back(e.path().stem().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir)) throw Error(ErrorCode::IoFailure, "cannot create " + dir.string());
}

struct RunReport {
  int files = 0;
  int records = 0;
  int written = 0;
  int skipped = 0;  // records without a usable result (no lift solution, degenerate perturbation)
  int errors = 0;   // files or records that failed to parse or write

  bool ok() const { return errors == 0; }
};

// ---------------------------------------------------------------------------
// lift / predict

struct LiftArgs {
  fs::path labels_dir;
  fs::path calib_dir;
  fs::path out_dir;
  lift::LiftOptions options;
  kitti::LabelFormat format;
  std::optional<fs::path> model;  // when set, translations are refined by the network
};

namespace detail {

inline std::optional<kitti::LabelRecord> lift_record(const kitti::LabelRecord& r, const CameraMatrix& cam,
                                                     const lift::LiftOptions& opt, const shiftnet::Mlp* model) {
  lift::LiftSolution s;
  try {
    s = lift::lift(r.bbox, r.dims, r.alpha, cam, opt);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NoValidSolution || e.code() == ErrorCode::InvalidArgument) return std::nullopt;
    throw;
  }
  kitti::LabelRecord out = r;
  out.location = s.translation;
  out.rotation_y = s.alpha_global;
  out.score = s.reprojection_iou;
  if (model != nullptr) {
    out.location = shiftnet::forward(
        *model, shiftnet::make_features(s.translation, r.bbox, r.dims, r.alpha, s.alpha_global, cam));
  }
  return out;
}

}  // namespace detail

/// Runs the closed-form lift (and optionally the refiner) on every
/// non-DontCare record. Scores are the lift's re-projection IoU.
inline RunReport cmd_lift(const LiftArgs& args, std::ostream& log) {
  RunReport rep;
  std::optional<shiftnet::Mlp> model;
  if (args.model) model = shiftnet::load_model(args.model->string());
  const auto stems = list_stems(args.labels_dir);
  ensure_directory(args.out_dir);

  for (const auto& stem : stems) {
    ++rep.files;
    std::vector<kitti::LabelRecord> records;
    CameraMatrix cam;
    try {
      records = kitti::read_label_file(args.labels_dir / (stem + ".txt"));
      cam = kitti::read_calib_file(args.calib_dir / (stem + ".txt")).p2;
    } catch (const Error& e) {
      log << "error: " << stem << ": " << e.what() << '\n';
      ++rep.errors;
      continue;
    }
    std::vector<kitti::LabelRecord> dets;
    for (const auto& r : records) {
      if (r.is_dont_care()) continue;
      ++rep.records;
      try {
        auto d = detail::lift_record(r, cam, args.options, model ? &*model : nullptr);
        if (d) {
          dets.push_back(*d);
        } else {
          ++rep.skipped;
        }
      } catch (const Error& e) {
        log << "error: " << stem << ": " << e.what() << '\n';
        ++rep.errors;
      }
    }
    kitti::write_detection(dets, args.out_dir / (stem + ".txt"), args.format);
    rep.written += static_cast<int>(dets.size());
  }
  log << "lift: " << rep.files << " files, " << rep.records << " records, " << rep.written << " written, "
      << rep.skipped << " without solution, " << rep.errors << " errors\n";
  return rep;
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
  fs::path labels_dir;
  fs::path calib_dir;
  fs::path out;
  kitti::PerturbSpec spec;
  int copies = 1;  // perturbed samples drawn per record
  lift::LiftOptions options;
};

/// Per-record seeds mix the run seed, the file stem and the record index,
/// so output does not depend on processing order.
inline RunReport cmd_synth(const SynthArgs& args, std::ostream& log, std::vector<shiftnet::Sample>* samples_out = nullptr) {
  if (args.copies < 1) throw Error(ErrorCode::InvalidArgument, "copies must be at least 1");
  args.spec.validate();
  RunReport rep;
  std::vector<shiftnet::Sample> samples;
  for (const auto& stem : list_stems(args.labels_dir)) {
    ++rep.files;
    std::vector<kitti::LabelRecord> records;
    CameraMatrix cam;
    try {
      records = kitti::read_label_file(args.labels_dir / (stem + ".txt"));
      cam = kitti::read_calib_file(args.calib_dir / (stem + ".txt")).p2;
    } catch (const Error& e) {
      log << "error: " << stem << ": " << e.what() << '\n';
      ++rep.errors;
      continue;
    }
    const std::uint64_t file_seed = kitti::mix_seed(args.spec.seed, kitti::hash_string(stem));
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (records[i].is_dont_care()) continue;
      ++rep.records;
      for (int c = 0; c < args.copies; ++c) {
        kitti::PerturbSpec spec = args.spec;
        spec.seed = kitti::mix_seed(file_seed, i * static_cast<std::size_t>(args.copies) + static_cast<std::size_t>(c));
        try {
          shiftnet::Sample s = kitti::perturb_record(records[i], spec, cam, args.options);
          s.tag = stem + ":" + std::to_string(i);
          samples.push_back(std::move(s));
        } catch (const Error& e) {
          if (e.code() != ErrorCode::Degenerate && e.code() != ErrorCode::InvalidArgument) throw;
          ++rep.skipped;
        }
      }
    }
  }
  rep.written = static_cast<int>(samples.size());
  dataset::save_samples(samples, args.out);
  log << "synth: " << rep.records << " records, " << rep.written << " samples, " << rep.skipped << " degenerate skipped, "
      << rep.errors << " errors\n";
  if (samples_out) *samples_out = std::move(samples);
  return rep;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  fs::path pretrain_data;
  std::optional<fs::path> finetune_data;
  std::optional<fs::path> init_model;  // skip pre-training and fine-tune this model
  fs::path model_out;
  shiftnet::TrainConfig config;
};

struct TrainReport {
  double pretrain_initial = 0.0;
  double pretrain_final = 0.0;
  double finetune_initial = 0.0;
  double finetune_final = 0.0;
};

inline TrainReport cmd_train(const TrainArgs& args, std::ostream& log) {
  TrainReport rep;
  auto print = [&log](shiftnet::Phase phase, int epoch, double loss) {
    log << (phase == shiftnet::Phase::Pretrain ? "pretrain" : "finetune") << " epoch " << (epoch + 1)
        << " mean VDL " << loss << '\n';
  };
  shiftnet::Mlp model;
  if (args.init_model) {
    model = shiftnet::load_model(args.init_model->string());
  } else {
    const auto data = dataset::load_samples(args.pretrain_data);
    log << "pretrain: " << data.size() << " samples\n";
    auto r = shiftnet::train(data, args.config, shiftnet::Phase::Pretrain, nullptr, print);
    rep.pretrain_initial = r.initial_loss;
    rep.pretrain_final = r.epoch_loss.empty() ? r.initial_loss : r.epoch_loss.back();
    model = std::move(r.model);
  }
  if (args.finetune_data) {
    const auto data = dataset::load_samples(*args.finetune_data);
    log << "finetune: " << data.size() << " samples\n";
    auto r = shiftnet::train(data, args.config, shiftnet::Phase::Finetune, &model, print);
    rep.finetune_initial = r.initial_loss;
    rep.finetune_final = r.epoch_loss.empty() ? r.initial_loss : r.epoch_loss.back();
    model = std::move(r.model);
  }
  shiftnet::save_model(model, args.model_out.string());
  log << "model written to " << args.model_out.string() << '\n';
  return rep;
}

// ---------------------------------------------------------------------------
// gen

struct GenArgs {
  fs::path labels_dir;
  fs::path calib_dir;
  int images = 10;
  int objects_per_image = 5;
  std::uint64_t seed = 0;
  synth::SceneSpec scene;
  kitti::LabelFormat format;
};

/// Writes a synthetic KITTI-style dataset: exactly projected, untruncated
/// objects and the reference calibration for every image.
inline RunReport cmd_gen(const GenArgs& args, std::ostream& log) {
  if (args.images < 0 || args.objects_per_image < 0) throw Error(ErrorCode::InvalidArgument, "counts must be >= 0");
  ensure_directory(args.labels_dir);
  ensure_directory(args.calib_dir);
  const CameraMatrix cam = synth::kitti_reference_p2();
  kitti::CalibRecord calib;
  calib.p2 = cam;
  const std::string calib_text = kitti::write_calib(calib);
  RunReport rep;
  std::mt19937_64 rng(args.seed);
  for (int i = 0; i < args.images; ++i) {
    char stem[16];
    std::snprintf(stem, sizeof(stem), "%06d", i);
    auto objects = synth::sample_objects(args.scene, cam, static_cast<std::size_t>(args.objects_per_image), rng);
    kitti::write_label_file(objects, args.labels_dir / (std::string(stem) + ".txt"), args.format);
    kitti::write_text_file_atomic(args.calib_dir / (std::string(stem) + ".txt"), calib_text);
    ++rep.files;
    rep.written += static_cast<int>(objects.size());
  }
  rep.records = rep.written;
  log << "gen: " << rep.files << " images, " << rep.written << " objects\n";
  return rep;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  fs::path gt_dir;
  fs::path det_dir;
  std::vector<std::string> classes{"Car", "Pedestrian", "Cyclist"};
  std::map<std::string, double> iou_threshold{{"Car", 0.7}, {"Pedestrian", 0.5}, {"Cyclist", 0.5}};
  eval::ApOptions ap;
  std::optional<fs::path> metrics_out;
};

struct ApCell {
  std::string cls;
  std::string difficulty;
  std::optional<double> ap_3d;  // percent; empty when the class has no ground truth
  std::optional<double> ap_bev;
};

struct AccuracyRow {
  std::string cls;
  int num_gt = 0;
  std::optional<double> accuracy;  // percent of GT whose best detection reaches the threshold
};

struct EvalReport {
  std::vector<ApCell> cells;
  std::vector<AccuracyRow> accuracy;
  RunReport run;

  std::string table() const;
  std::string key_values() const;
};

namespace detail {

inline std::string fmt_pct(const std::optional<double>& v) {
  if (!v) return "n/a";
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(2) << *v;
  return ss.str();
}

inline eval::Box3D to_box(const kitti::LabelRecord& r) { return {r.location, r.dims, r.rotation_y}; }

}  // namespace detail

inline std::string EvalReport::table() const {
  std::ostringstream ss;
  ss << std::left << std::setw(12) << "class" << std::setw(10) << "difficulty" << std::right << std::setw(10) << "AP_3D"
     << std::setw(10) << "AP_BEV" << '\n';
  for (const auto& c : cells) {
    ss << std::left << std::setw(12) << c.cls << std::setw(10) << c.difficulty << std::right << std::setw(10)
       << detail::fmt_pct(c.ap_3d) << std::setw(10) << detail::fmt_pct(c.ap_bev) << '\n';
  }
  ss << '\n' << std::left << std::setw(12) << "class" << std::right << std::setw(10) << "GT" << std::setw(12)
     << "accuracy" << '\n';
  for (const auto& a : accuracy) {
    ss << std::left << std::setw(12) << a.cls << std::right << std::setw(10) << a.num_gt << std::setw(12)
       << detail::fmt_pct(a.accuracy) << '\n';
  }
  return ss.str();
}

inline std::string EvalReport::key_values() const {
  std::ostringstream ss;
  for (const auto& c : cells) {
    ss << "ap3d." << c.cls << '.' << c.difficulty << '=' << detail::fmt_pct(c.ap_3d) << '\n';
    ss << "apbev." << c.cls << '.' << c.difficulty << '=' << detail::fmt_pct(c.ap_bev) << '\n';
  }
  for (const auto& a : accuracy) ss << "accuracy." << a.cls << '=' << detail::fmt_pct(a.accuracy) << '\n';
  return ss.str();
}

/// A missing detection file counts as an image without detections.
inline EvalReport cmd_eval(const EvalArgs& args, std::ostream& log) {
  EvalReport rep;
  std::vector<std::pair<std::vector<kitti::LabelRecord>, std::vector<kitti::LabelRecord>>> images;
  for (const auto& stem : list_stems(args.gt_dir)) {
    ++rep.run.files;
    try {
      auto gt = kitti::read_label_file(args.gt_dir / (stem + ".txt"));
      std::vector<kitti::LabelRecord> det;
      const fs::path det_path = args.det_dir / (stem + ".txt");
      if (fs::exists(det_path)) det = kitti::read_label_file(det_path);
      for (const auto& d : det) {
        if (!d.score) throw Error(ErrorCode::MissingScore, "detection without score in " + det_path.string());
      }
      rep.run.records += static_cast<int>(gt.size());
      images.emplace_back(std::move(gt), std::move(det));
    } catch (const Error& e) {
      log << "error: " << stem << ": " << e.what() << '\n';
      ++rep.run.errors;
    }
  }

  for (const auto& cls : args.classes) {
    const auto thr_it = args.iou_threshold.find(cls);
    const double thr = thr_it != args.iou_threshold.end() ? thr_it->second : eval::default_iou_threshold(cls);

    std::vector<eval::ImageSet> sets;
    AccuracyRow acc{cls, 0, std::nullopt};
    std::vector<std::pair<eval::Box3D, eval::Box3D>> pairs;
    for (const auto& [gt, det] : images) {
      eval::ImageSet set;
      for (const auto& g : gt) {
        if (g.class_name != cls) continue;
        set.gt.push_back({detail::to_box(g), g.bbox, g.truncated, g.occluded});
      }
      for (const auto& d : det) {
        if (d.class_name != cls) continue;
        set.det.push_back({detail::to_box(d), d.bbox, *d.score});
      }
      for (const auto& g : set.gt) {
        ++acc.num_gt;
        const eval::Detection* best = nullptr;
        double best_iou = -1.0;
        for (const auto& d : set.det) {
          const double iou = eval::iou_3d(d.box, g.box);
          if (iou > best_iou) {
            best_iou = iou;
            best = &d;
          }
        }
        if (best) pairs.emplace_back(best->box, g.box);
      }
      sets.push_back(std::move(set));
    }
    if (acc.num_gt > 0) {
      acc.accuracy = pairs.empty() ? 0.0
                                   : eval::accuracy_at_iou(pairs, thr) * static_cast<double>(pairs.size()) /
                                         static_cast<double>(acc.num_gt);
    }
    rep.accuracy.push_back(acc);

    for (const auto& diff : eval::all_difficulties()) {
      ApCell cell{cls, diff.name, std::nullopt, std::nullopt};
      try {
        cell.ap_3d = 100.0 * eval::average_precision(sets, eval::iou_3d, thr, diff, args.ap).ap;
        cell.ap_bev =
            100.0 * eval::average_precision(
                        sets, [](const eval::Box3D& a, const eval::Box3D& b) { return eval::iou_bev(a, b); }, thr, diff,
                        args.ap)
                        .ap;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::EmptyGroundTruth) throw;
      }
      rep.cells.push_back(cell);
    }
  }
  if (args.metrics_out) kitti::write_text_file_atomic(*args.metrics_out, rep.key_values());
  return rep;
}

}  // namespace shiftrcnn::pipeline
