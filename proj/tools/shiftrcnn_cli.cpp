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

// shiftrcnn: command-line front end.
//
//   shiftrcnn gen     --labels L --calib C [--images N --objects K --seed S]
//   shiftrcnn lift    --labels L --calib C --out D
//   shiftrcnn synth   --labels L --calib C --out data.ndjson [--noise-t X Y Z ...]
//   shiftrcnn train   --dataset gt.ndjson [--finetune noisy.ndjson] --model m.bin
//   shiftrcnn predict --labels L --calib C --model m.bin --out D
//   shiftrcnn eval    --labels GT --det D [--ap-points 11|40]
//
// Exit status: 0 on success, 1 when some record or file failed (0 with
// --lenient), 2 on a fatal error.

#include <CLI11.hpp>

#include <iostream>

#include "shiftrcnn.hpp"

namespace {

using namespace shiftrcnn;

struct Options {
  bool lenient = false;

  pipeline::GenArgs gen;
  pipeline::LiftArgs lift;
  bool diagonal_only = false;
  int decimals = 2;

  pipeline::SynthArgs synth;
  std::vector<double> noise_t{0.25, 0.10, 0.0};

  pipeline::TrainArgs train;
  std::string finetune_path;
  std::string init_path;
  bool residual = false;

  pipeline::EvalArgs eval;
  bool strict = false;
  std::string metrics_path;
};

int finish(const pipeline::RunReport& rep, bool lenient) { return rep.ok() || lenient ? 0 : 1; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monocular 3D box lifting, translation refinement and KITTI-style evaluation"};
  app.require_subcommand(1);
  app.allow_extras(false);
  Options o;
  app.add_flag("--lenient", o.lenient, "Exit 0 even when some records fail");

  // gen
  auto* gen = app.add_subcommand("gen", "Write a synthetic KITTI-style label/calib set");
  gen->add_option("--labels", o.gen.labels_dir, "Output label directory")->required();
  gen->add_option("--calib", o.gen.calib_dir, "Output calibration directory")->required();
  gen->add_option("--images", o.gen.images, "Number of images")->check(CLI::NonNegativeNumber);
  gen->add_option("--objects", o.gen.objects_per_image, "Objects per image")->check(CLI::NonNegativeNumber);
  gen->add_option("--seed", o.gen.seed, "RNG seed");
  gen->add_option("--decimals", o.decimals, "Decimals written per field")->check(CLI::Range(2, 12));

  // lift and predict share their inputs
  auto* lift_cmd = app.add_subcommand("lift", "Closed-form translation for every labelled 2D box");
  auto* predict = app.add_subcommand("predict", "Closed-form translation refined by a trained model");
  std::string model_in;
  for (auto* sc : {lift_cmd, predict}) {
    sc->add_option("--labels", o.lift.labels_dir, "Label directory (2D box, dims, alpha)")
        ->required()
        ->check(CLI::ExistingDirectory);
    sc->add_option("--calib", o.lift.calib_dir, "Calibration directory")->required()->check(CLI::ExistingDirectory);
    sc->add_option("--out", o.lift.out_dir, "Detection output directory")->required();
    sc->add_option("--decimals", o.decimals, "Decimals written per field")->check(CLI::Range(2, 12));
    sc->add_flag("--diagonal-only", o.diagonal_only, "Search only the 64 diagonal-edge configurations");
  }
  predict->add_option("--model", model_in, "Trained model file")->required()->check(CLI::ExistingFile);

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Perturb ground-truth boxes into a training dataset");
  synth_cmd->add_option("--labels", o.synth.labels_dir, "Ground-truth label directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  synth_cmd->add_option("--calib", o.synth.calib_dir, "Calibration directory")->required()->check(CLI::ExistingDirectory);
  synth_cmd->add_option("--out", o.synth.out, "Output dataset (newline-delimited JSON)")->required();
  synth_cmd->add_option("--seed", o.synth.spec.seed, "RNG seed");
  synth_cmd->add_option("--noise-t", o.noise_t, "Translation std per axis in meters (x y z)")->expected(3);
  synth_cmd->add_option("--noise-depth", o.synth.spec.depth_std_ratio, "Extra depth std as a fraction of tz")
      ->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--noise-d", o.synth.spec.dims_std, "Relative dimension std")->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--noise-a", o.synth.spec.angle_std, "Yaw std in radians")->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--noise-box", o.synth.spec.bbox_noise_px, "Uniform +- pixels added to each 2D box side")
      ->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--copies", o.synth.copies, "Samples drawn per record")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--image-width", o.synth.spec.image_width, "Image width for the redraw check");
  synth_cmd->add_option("--image-height", o.synth.spec.image_height, "Image height for the redraw check");

  // train
  auto* train_cmd = app.add_subcommand("train", "Pre-train and fine-tune the translation refiner");
  auto& tc = o.train.config;
  train_cmd->add_option("--dataset", o.train.pretrain_data, "Pre-training dataset")->check(CLI::ExistingFile);
  train_cmd->add_option("--finetune", o.finetune_path, "Fine-tuning dataset")->check(CLI::ExistingFile);
  train_cmd->add_option("--init", o.init_path, "Start from this model and only fine-tune")->check(CLI::ExistingFile);
  train_cmd->add_option("--model", o.train.model_out, "Output model file")->required();
  train_cmd->add_option("--lr", tc.learning_rate, "Learning rate")->check(CLI::PositiveNumber);
  train_cmd->add_option("--epochs", tc.pretrain_epochs, "Pre-training epochs")->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--finetune-epochs", tc.finetune_epochs, "Fine-tuning epochs")->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--batch", tc.batch_size, "Batch size")->check(CLI::PositiveNumber);
  train_cmd->add_option("--hidden", tc.hidden, "Hidden layer width")->check(CLI::PositiveNumber);
  train_cmd->add_option("--momentum", tc.momentum, "SGD momentum")->check(CLI::Range(0.0, 0.999));
  train_cmd->add_option("--seed", tc.seed, "RNG seed");
  train_cmd->add_flag("--residual", o.residual, "Regress t'' - t' instead of t''");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "AP_3D / AP_BEV and accuracy against ground truth");
  eval_cmd->add_option("--labels", o.eval.gt_dir, "Ground-truth label directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  eval_cmd->add_option("--det", o.eval.det_dir, "Detection directory")->required();
  eval_cmd->add_option("--iou-car", o.eval.iou_threshold["Car"], "IoU threshold for Car")->check(CLI::Range(0.0, 1.0));
  eval_cmd->add_option("--iou-ped", o.eval.iou_threshold["Pedestrian"], "IoU threshold for Pedestrian")
      ->check(CLI::Range(0.0, 1.0));
  eval_cmd->add_option("--iou-cyc", o.eval.iou_threshold["Cyclist"], "IoU threshold for Cyclist")
      ->check(CLI::Range(0.0, 1.0));
  eval_cmd->add_option("--ap-points", o.eval.ap.recall_points, "Recall points: 11 or 40")
      ->check(CLI::IsMember({11, 40}));
  eval_cmd->add_flag("--strict", o.strict, "Count detections on filtered-out ground truth as false positives");
  eval_cmd->add_option("--metrics", o.metrics_path, "Write key=value metrics to this file");

  CLI11_PARSE(app, argc, argv);

  try {
    const kitti::LabelFormat fmt{o.decimals, std::max(4, o.decimals)};
    if (gen->parsed()) {
      o.gen.format = fmt;
      return finish(pipeline::cmd_gen(o.gen, std::cerr), o.lenient);
    }
    if (lift_cmd->parsed() || predict->parsed()) {
      o.lift.format = fmt;
      if (o.diagonal_only) o.lift.options.pairing = lift::EdgePairing::Diagonal;
      if (predict->parsed()) o.lift.model = model_in;
      return finish(pipeline::cmd_lift(o.lift, std::cerr), o.lenient);
    }
    if (synth_cmd->parsed()) {
      o.synth.spec.translation_std = Vec3(o.noise_t[0], o.noise_t[1], o.noise_t[2]);
      return finish(pipeline::cmd_synth(o.synth, std::cerr), o.lenient);
    }
    if (train_cmd->parsed()) {
      if (!o.finetune_path.empty()) o.train.finetune_data = o.finetune_path;
      if (!o.init_path.empty()) o.train.init_model = o.init_path;
      if (o.train.pretrain_data.empty() && !o.train.init_model) {
        std::cerr << "train: --dataset or --init is required\n";
        return 2;
      }
      if (o.residual) tc.parameterization = shiftnet::Parameterization::Residual;
      const auto rep = pipeline::cmd_train(o.train, std::cerr);
      std::cout << "pretrain_initial_vdl=" << rep.pretrain_initial << "\npretrain_final_vdl=" << rep.pretrain_final
                << "\nfinetune_initial_vdl=" << rep.finetune_initial << "\nfinetune_final_vdl=" << rep.finetune_final
                << '\n';
      return 0;
    }
    if (eval_cmd->parsed()) {
      if (o.strict) o.eval.ap.ignore = eval::IgnoreMode::Strict;
      if (!o.metrics_path.empty()) o.eval.metrics_out = o.metrics_path;
      const auto rep = pipeline::cmd_eval(o.eval, std::cerr);
      std::cout << rep.table();
      return finish(rep.run, o.lenient);
    }
  } catch (const std::exception& e) {
    std::cerr << "fatal: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
