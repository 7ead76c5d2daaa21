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

// Translation refiner: a fully connected network (two rectified hidden
// layers and a linear 3-output layer) that maps the closed-form translation
// and the per-object 2D/3D estimates to a corrected translation. Forward and
// backward passes are written out by hand and trained with the volume
// displacement loss.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <iterator>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "shiftrcnn/geometry.hpp"
#include "shiftrcnn/losses.hpp"

namespace shiftrcnn::shiftnet {

inline constexpr int kNumFeatures = 26;
inline constexpr int kNumOutputs = 3;
inline constexpr int kDefaultHidden = 1024;

/// Raw (unstandardized) inputs in this order:
///   [0..3)   closed-form translation t'
///   [3..7)   2D box x_min, y_min, x_max, y_max
///   [7..10)  dimensions h, w, l
///   [10..12) sin, cos of the local angle
///   [12..14) sin, cos of the global angle
///   [14..26) projection matrix, row major
using FeatureVector = std::array<double, kNumFeatures>;

inline FeatureVector make_features(const Translation& t_lift, const Box2D& b, const Dims3D& d, double alpha_local,
                                   double alpha_global, const CameraMatrix& cam) {
  FeatureVector f{};
  f[0] = t_lift.tx;
  f[1] = t_lift.ty;
  f[2] = t_lift.tz;
  f[3] = b.x_min;
  f[4] = b.y_min;
  f[5] = b.x_max;
  f[6] = b.y_max;
  f[7] = d.h;
  f[8] = d.w;
  f[9] = d.l;
  f[10] = std::sin(alpha_local);
  f[11] = std::cos(alpha_local);
  f[12] = std::sin(alpha_global);
  f[13] = std::cos(alpha_global);
  const auto p = cam.row_major();
  for (std::size_t i = 0; i < 12; ++i) f[14 + i] = p[i];
  return f;
}

inline Translation lifted_translation(const FeatureVector& f) { return {f[0], f[1], f[2]}; }

/// One training example. `dims` and `alpha_global` are the estimates the
/// loss is evaluated with; `gt_dims` and `gt_rotation_y` describe the
/// ground-truth box and are only used for reporting 3D IoU.
struct Sample {
  FeatureVector features{};
  Translation target;
  Dims3D dims;
  double alpha_global = 0.0;
  Dims3D gt_dims;
  double gt_rotation_y = 0.0;
  std::string tag;
};

enum class Parameterization : std::uint32_t {
  Direct = 0,    // the network output is t''
  Residual = 1,  // the network output is t'' - t'
};

/// Per-feature input standardization and per-axis output scaling, fitted on
/// the pre-training set and stored with the weights.
struct Standardizer {
  Eigen::VectorXd in_mean = Eigen::VectorXd::Zero(kNumFeatures);
  Eigen::VectorXd in_scale = Eigen::VectorXd::Ones(kNumFeatures);
  Eigen::Vector3d out_mean = Eigen::Vector3d::Zero();
  Eigen::Vector3d out_scale = Eigen::Vector3d::Ones();
};

struct Dense {
  Eigen::MatrixXd w;  // out x in
  Eigen::VectorXd b;
};

struct Mlp {
  std::array<Dense, 3> layers;
  std::optional<Standardizer> scaler;
  Parameterization parameterization = Parameterization::Direct;

  int hidden() const { return static_cast<int>(layers[0].w.rows()); }
};

using Gradients = std::array<Dense, 3>;

namespace detail {

inline Eigen::Vector3d target_vector(const Sample& s, Parameterization p) {
  Eigen::Vector3d t = s.target.vec();
  if (p == Parameterization::Residual) t -= lifted_translation(s.features).vec();
  return t;
}

}  // namespace detail

/// Zero weights and biases, identity scaler unset.
inline Mlp make_zero_mlp(int hidden, Parameterization p = Parameterization::Direct) {
  Mlp m;
  m.parameterization = p;
  const int fan_in[3] = {kNumFeatures, hidden, hidden};
  const int fan_out[3] = {hidden, hidden, kNumOutputs};
  for (int i = 0; i < 3; ++i) {
    m.layers[static_cast<std::size_t>(i)].w = Eigen::MatrixXd::Zero(fan_out[i], fan_in[i]);
    m.layers[static_cast<std::size_t>(i)].b = Eigen::VectorXd::Zero(fan_out[i]);
  }
  return m;
}

/// He-style uniform initialization, U(-sqrt(6 / fan_in), sqrt(6 / fan_in)),
/// zero biases.
inline Mlp make_mlp(int hidden, std::uint64_t seed, Parameterization p = Parameterization::Direct) {
  if (hidden <= 0) throw Error(ErrorCode::InvalidArgument, "hidden width must be positive");
  Mlp m = make_zero_mlp(hidden, p);
  std::mt19937_64 rng(seed);
  for (auto& layer : m.layers) {
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.w.cols()));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (Eigen::Index c = 0; c < layer.w.cols(); ++c)
      for (Eigen::Index r = 0; r < layer.w.rows(); ++r) layer.w(r, c) = u(rng);
  }
  return m;
}

inline Standardizer fit_standardizer(std::span<const Sample> samples, Parameterization p) {
  if (samples.empty()) throw Error(ErrorCode::EmptyDataset, "cannot fit a scaler on no samples");
  const double n = static_cast<double>(samples.size());
  Standardizer s;
  s.in_mean.setZero();
  s.out_mean.setZero();
  for (const auto& x : samples) {
    s.in_mean += Eigen::Map<const Eigen::VectorXd>(x.features.data(), kNumFeatures);
    s.out_mean += detail::target_vector(x, p);
  }
  s.in_mean /= n;
  s.out_mean /= n;

  Eigen::VectorXd in_var = Eigen::VectorXd::Zero(kNumFeatures);
  Eigen::Vector3d out_var = Eigen::Vector3d::Zero();
  for (const auto& x : samples) {
    in_var += (Eigen::Map<const Eigen::VectorXd>(x.features.data(), kNumFeatures) - s.in_mean).array().square().matrix();
    out_var += (detail::target_vector(x, p) - s.out_mean).array().square().matrix();
  }
  // Constant features (a single camera matrix, say) keep unit scale and
  // standardize to exactly zero.
  for (int i = 0; i < kNumFeatures; ++i) {
    const double sd = std::sqrt(in_var(i) / n);
    s.in_scale(i) = sd > 1e-9 ? sd : 1.0;
    const double first = samples.front().features[static_cast<std::size_t>(i)];
    const bool constant = std::all_of(samples.begin(), samples.end(),
                                      [&](const Sample& x) { return x.features[static_cast<std::size_t>(i)] == first; });
    if (constant) s.in_mean(i) = first;
  }
  for (int i = 0; i < 3; ++i) {
    const double sd = std::sqrt(out_var(i) / n);
    s.out_scale(i) = sd > 1e-9 ? sd : 1.0;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Forward / backward

/// Activations kept for the backward pass; one column per example.
struct ForwardCache {
  Eigen::MatrixXd input;    // standardized features
  Eigen::MatrixXd hidden1;  // after rectifier
  Eigen::MatrixXd hidden2;
  Eigen::MatrixXd output;   // translation in meters
};

inline Eigen::MatrixXd feature_matrix(std::span<const Sample* const> batch) {
  Eigen::MatrixXd x(kNumFeatures, static_cast<Eigen::Index>(batch.size()));
  for (std::size_t j = 0; j < batch.size(); ++j)
    x.col(static_cast<Eigen::Index>(j)) = Eigen::Map<const Eigen::VectorXd>(batch[j]->features.data(), kNumFeatures);
  return x;
}

inline ForwardCache forward_batch(const Mlp& m, const Eigen::MatrixXd& raw) {
  if (!m.scaler) throw Error(ErrorCode::UnfittedScaler, "model has no fitted standardizer");
  const Standardizer& s = *m.scaler;
  ForwardCache c;
  c.input = (raw.colwise() - s.in_mean).array().colwise() / s.in_scale.array();
  c.hidden1 = ((m.layers[0].w * c.input).colwise() + m.layers[0].b).cwiseMax(0.0);
  c.hidden2 = ((m.layers[1].w * c.hidden1).colwise() + m.layers[1].b).cwiseMax(0.0);
  Eigen::MatrixXd o = (m.layers[2].w * c.hidden2).colwise() + m.layers[2].b;
  c.output = (o.array().colwise() * s.out_scale.array()).colwise() + s.out_mean.array();
  if (m.parameterization == Parameterization::Residual) c.output += raw.topRows<3>();
  return c;
}

inline Translation forward(const Mlp& m, const FeatureVector& f) {
  const Eigen::MatrixXd raw = Eigen::Map<const Eigen::VectorXd>(f.data(), kNumFeatures);
  const ForwardCache c = forward_batch(m, raw);
  return Translation::from(c.output.col(0));
}

inline Gradients zero_gradients(const Mlp& m) {
  Gradients g;
  for (std::size_t i = 0; i < 3; ++i) {
    g[i].w = Eigen::MatrixXd::Zero(m.layers[i].w.rows(), m.layers[i].w.cols());
    g[i].b = Eigen::VectorXd::Zero(m.layers[i].b.size());
  }
  return g;
}

struct BackwardResult {
  double loss = 0.0;
  Gradients grads;
};

/// Gradients of scale * sum_i vdl_i over a batch. Pass scale = 1 / batch
/// size for the batch mean.
inline BackwardResult backward_batch(const Mlp& m, std::span<const Sample* const> batch, double scale = 1.0) {
  const ForwardCache c = forward_batch(m, feature_matrix(batch));
  const Eigen::Index n = static_cast<Eigen::Index>(batch.size());

  BackwardResult r;
  Eigen::MatrixXd d_out(3, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Sample& s = *batch[static_cast<std::size_t>(j)];
    const loss::VdlLoss l = loss::vdl(Translation::from(c.output.col(j)), s.target, s.dims, s.alpha_global);
    r.loss += scale * l.value;
    d_out.col(j) = scale * l.grad;
  }

  const Standardizer& st = *m.scaler;
  const Eigen::MatrixXd d_o = d_out.array().colwise() * st.out_scale.array();
  r.grads[2].w = d_o * c.hidden2.transpose();
  r.grads[2].b = d_o.rowwise().sum();

  const Eigen::MatrixXd d_h2 =
      ((m.layers[2].w.transpose() * d_o).array() * (c.hidden2.array() > 0.0).cast<double>()).matrix();
  r.grads[1].w = d_h2 * c.hidden1.transpose();
  r.grads[1].b = d_h2.rowwise().sum();

  const Eigen::MatrixXd d_h1 =
      ((m.layers[1].w.transpose() * d_h2).array() * (c.hidden1.array() > 0.0).cast<double>()).matrix();
  r.grads[0].w = d_h1 * c.input.transpose();
  r.grads[0].b = d_h1.rowwise().sum();
  return r;
}

/// Gradients of scale * vdl(forward(m, s.features), s.target, s.dims, s.alpha_global).
inline BackwardResult backward(const Mlp& m, const Sample& s, double scale = 1.0) {
  const Sample* one[1] = {&s};
  return backward_batch(m, one, scale);
}

inline double mean_vdl(const Mlp& m, std::span<const Sample> samples, std::size_t chunk = 512) {
  if (samples.empty()) throw Error(ErrorCode::EmptyDataset, "no samples");
  double total = 0.0;
  std::vector<const Sample*> ptrs;
  for (std::size_t start = 0; start < samples.size(); start += chunk) {
    const std::size_t end = std::min(samples.size(), start + chunk);
    ptrs.clear();
    for (std::size_t i = start; i < end; ++i) ptrs.push_back(&samples[i]);
    const ForwardCache c = forward_batch(m, feature_matrix(ptrs));
    for (std::size_t i = start; i < end; ++i) {
      const Sample& s = samples[i];
      total += loss::vdl(Translation::from(c.output.col(static_cast<Eigen::Index>(i - start))), s.target, s.dims,
                         s.alpha_global)
                   .value;
    }
  }
  return total / static_cast<double>(samples.size());
}

inline std::vector<Translation> predict(const Mlp& m, std::span<const Sample> samples, std::size_t chunk = 512) {
  std::vector<Translation> out;
  out.reserve(samples.size());
  std::vector<const Sample*> ptrs;
  for (std::size_t start = 0; start < samples.size(); start += chunk) {
    const std::size_t end = std::min(samples.size(), start + chunk);
    ptrs.clear();
    for (std::size_t i = start; i < end; ++i) ptrs.push_back(&samples[i]);
    const ForwardCache c = forward_batch(m, feature_matrix(ptrs));
    for (Eigen::Index j = 0; j < c.output.cols(); ++j) out.push_back(Translation::from(c.output.col(j)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Training

enum class Phase { Pretrain, Finetune };

struct TrainConfig {
  double learning_rate = 1e-3;
  double momentum = 0.9;
  int batch_size = 64;
  int pretrain_epochs = 200;
  int finetune_epochs = 100;
  std::uint64_t seed = 0;
  int hidden = kDefaultHidden;
  Parameterization parameterization = Parameterization::Direct;
  // Step decay: the rate is multiplied by lr_decay at each listed fraction
  // of the phase's epochs.
  double lr_decay = 0.1;
  std::vector<double> decay_at{0.5, 2.0 / 3.0};

  void validate() const {
    if (!(learning_rate > 0.0) || batch_size <= 0 || pretrain_epochs < 0 || finetune_epochs < 0 || hidden <= 0 ||
        momentum < 0.0 || momentum >= 1.0 || !(lr_decay > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "invalid training configuration");
    }
  }
};

using EpochCallback = std::function<void(Phase, int epoch, double mean_loss)>;

struct TrainResult {
  Mlp model;
  double initial_loss = 0.0;
  std::vector<double> epoch_loss;  // mean VDL over each epoch's batches
};

namespace detail {

inline void sgd_step(Mlp& m, Gradients& velocity, const Gradients& g, double lr, double momentum) {
  for (std::size_t i = 0; i < 3; ++i) {
    velocity[i].w = momentum * velocity[i].w - lr * g[i].w;
    velocity[i].b = momentum * velocity[i].b - lr * g[i].b;
    m.layers[i].w += velocity[i].w;
    m.layers[i].b += velocity[i].b;
  }
}

inline double rate_at(const TrainConfig& cfg, int epoch, int epochs) {
  double lr = cfg.learning_rate;
  for (double frac : cfg.decay_at)
    if (epoch >= static_cast<int>(frac * epochs)) lr *= cfg.lr_decay;
  return lr;
}

}  // namespace detail

/// Pre-training starts from a fresh He-initialized network and fits the
/// standardizer on `samples`. Fine-tuning continues from `init` and keeps
/// its standardizer.
inline TrainResult train(std::span<const Sample> samples, const TrainConfig& cfg, Phase phase,
                         const Mlp* init = nullptr, const EpochCallback& on_epoch = {}) {
  cfg.validate();
  if (samples.empty()) throw Error(ErrorCode::EmptyDataset, "training set is empty");

  TrainResult result;
  if (phase == Phase::Pretrain) {
    result.model = make_mlp(cfg.hidden, cfg.seed, cfg.parameterization);
    result.model.scaler = fit_standardizer(samples, cfg.parameterization);
  } else {
    if (init == nullptr) throw Error(ErrorCode::InvalidArgument, "fine-tuning needs an initial model");
    result.model = *init;
    if (!result.model.scaler) throw Error(ErrorCode::UnfittedScaler, "initial model has no standardizer");
  }
  Mlp& m = result.model;
  result.initial_loss = mean_vdl(m, samples);

  const int epochs = phase == Phase::Pretrain ? cfg.pretrain_epochs : cfg.finetune_epochs;
  std::mt19937_64 rng(cfg.seed ^ (phase == Phase::Pretrain ? 0x9e3779b97f4a7c15ULL : 0xc2b2ae3d27d4eb4fULL));
  Gradients velocity = zero_gradients(m);

  std::vector<const Sample*> order(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) order[i] = &samples[i];
  const std::size_t bs = static_cast<std::size_t>(cfg.batch_size);

  for (int epoch = 0; epoch < epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
    const double lr = detail::rate_at(cfg, epoch, epochs);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += bs) {
      const std::size_t n = std::min(bs, order.size() - start);
      std::span<const Sample* const> batch(order.data() + start, n);
      const BackwardResult br = backward_batch(m, batch, 1.0 / static_cast<double>(n));
      total += br.loss * static_cast<double>(n);
      detail::sgd_step(m, velocity, br.grads, lr, cfg.momentum);
    }
    const double mean = total / static_cast<double>(order.size());
    result.epoch_loss.push_back(mean);
    if (on_epoch) on_epoch(phase, epoch, mean);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Model file
//
//   "SHNET"                5 bytes
//   version                u32
//   parameterization       u32
//   has_scaler             u32 (0 or 1)
//   if has_scaler:
//     n_in                 u32, then in_mean[n_in], in_scale[n_in]   f64
//     n_out                u32, then out_mean[n_out], out_scale[n_out] f64
//   n_layers               u32
//   per layer: rows u32, cols u32, weights f64[rows * cols] row major, bias f64[rows]
//
// All integers and floats little-endian.

inline constexpr char kModelMagic[5] = {'S', 'H', 'N', 'E', 'T'};
inline constexpr std::uint32_t kModelVersion = 1;

namespace detail {

template <typename T>
void put_le(std::string& out, T v) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  U u = std::bit_cast<U>(v);
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<char>((u >> (8 * i)) & 0xff));
}

class Reader {
 public:
  explicit Reader(const std::string& data) : data_(data) {}

  template <typename T>
  T get() {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    if (pos_ + sizeof(U) > data_.size()) throw Error(ErrorCode::FormatVersionMismatch, "model file is truncated");
    U u = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i)
      u |= static_cast<U>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += sizeof(U);
    return std::bit_cast<T>(u);
  }

  void expect_magic() {
    if (data_.size() < sizeof(kModelMagic) || std::memcmp(data_.data(), kModelMagic, sizeof(kModelMagic)) != 0) {
      throw Error(ErrorCode::FormatVersionMismatch, "not a model file (bad magic)");
    }
    pos_ = sizeof(kModelMagic);
  }

  bool at_end() const { return pos_ == data_.size(); }

 private:
  const std::string& data_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string serialize_model(const Mlp& m) {
  std::string out(kModelMagic, sizeof(kModelMagic));
  detail::put_le<std::uint32_t>(out, kModelVersion);
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.parameterization));
  detail::put_le<std::uint32_t>(out, m.scaler ? 1u : 0u);
  if (m.scaler) {
    const Standardizer& s = *m.scaler;
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.in_mean.size()));
    for (Eigen::Index i = 0; i < s.in_mean.size(); ++i) detail::put_le<double>(out, s.in_mean(i));
    for (Eigen::Index i = 0; i < s.in_scale.size(); ++i) detail::put_le<double>(out, s.in_scale(i));
    detail::put_le<std::uint32_t>(out, 3u);
    for (int i = 0; i < 3; ++i) detail::put_le<double>(out, s.out_mean(i));
    for (int i = 0; i < 3; ++i) detail::put_le<double>(out, s.out_scale(i));
  }
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.layers.size()));
  for (const auto& layer : m.layers) {
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(layer.w.rows()));
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(layer.w.cols()));
    for (Eigen::Index r = 0; r < layer.w.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.w.cols(); ++c) detail::put_le<double>(out, layer.w(r, c));
    for (Eigen::Index r = 0; r < layer.b.size(); ++r) detail::put_le<double>(out, layer.b(r));
  }
  return out;
}

inline Mlp deserialize_model(const std::string& data) {
  detail::Reader in(data);
  in.expect_magic();
  const auto version = in.get<std::uint32_t>();
  if (version != kModelVersion) {
    throw Error(ErrorCode::FormatVersionMismatch,
                "model format version " + std::to_string(version) + ", expected " + std::to_string(kModelVersion));
  }
  Mlp m;
  const auto param = in.get<std::uint32_t>();
  if (param > 1) throw Error(ErrorCode::FormatVersionMismatch, "unknown parameterization");
  m.parameterization = static_cast<Parameterization>(param);
  const auto has_scaler = in.get<std::uint32_t>();
  if (has_scaler > 1) throw Error(ErrorCode::FormatVersionMismatch, "bad scaler flag");
  if (has_scaler == 1) {
    Standardizer s;
    if (in.get<std::uint32_t>() != kNumFeatures) throw Error(ErrorCode::FormatVersionMismatch, "feature count mismatch");
    for (int i = 0; i < kNumFeatures; ++i) s.in_mean(i) = in.get<double>();
    for (int i = 0; i < kNumFeatures; ++i) s.in_scale(i) = in.get<double>();
    if (in.get<std::uint32_t>() != 3) throw Error(ErrorCode::FormatVersionMismatch, "output count mismatch");
    for (int i = 0; i < 3; ++i) s.out_mean(i) = in.get<double>();
    for (int i = 0; i < 3; ++i) s.out_scale(i) = in.get<double>();
    m.scaler = s;
  }
  if (in.get<std::uint32_t>() != 3) throw Error(ErrorCode::FormatVersionMismatch, "expected three layers");
  std::uint32_t expected_cols = kNumFeatures;
  for (std::size_t li = 0; li < 3; ++li) {
    const auto rows = in.get<std::uint32_t>();
    const auto cols = in.get<std::uint32_t>();
    if (cols != expected_cols || rows == 0 || (li == 2 && rows != kNumOutputs) || rows > (1u << 16)) {
      throw Error(ErrorCode::FormatVersionMismatch, "unexpected layer shape");
    }
    Dense& layer = m.layers[li];
    layer.w.resize(rows, cols);
    layer.b.resize(rows);
    for (std::uint32_t r = 0; r < rows; ++r)
      for (std::uint32_t c = 0; c < cols; ++c) layer.w(r, c) = in.get<double>();
    for (std::uint32_t r = 0; r < rows; ++r) layer.b(r) = in.get<double>();
    expected_cols = rows;
  }
  if (m.layers[0].w.rows() != m.layers[1].w.rows()) throw Error(ErrorCode::FormatVersionMismatch, "hidden widths differ");
  if (!in.at_end()) throw Error(ErrorCode::FormatVersionMismatch, "trailing bytes after model");
  return m;
}

inline void save_model(const Mlp& m, const std::string& path) {
  const std::string bytes = serialize_model(m);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorCode::IoFailure, "cannot open " + tmp + " for writing");
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw Error(ErrorCode::IoFailure, "write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw Error(ErrorCode::IoFailure, "cannot rename onto " + path);
}

inline Mlp load_model(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoFailure, "cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return deserialize_model(bytes);
}

}  // namespace shiftrcnn::shiftnet
