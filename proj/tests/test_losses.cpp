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

#include <gtest/gtest.h>

#include <random>

#include "shiftrcnn/losses.hpp"
#include "support/finite_difference.hpp"

namespace {

using namespace shiftrcnn;
using shiftrcnn::testing::central_difference;
using shiftrcnn::testing::relative_error;

TEST(AngleLoss, PerfectPredictionIsZero) {
  for (double a : {-3.0, -1.0, 0.0, 0.4, 2.5, kPi}) {
    const auto l = loss::angle_loss(loss::encode_angle(a), a);
    EXPECT_NEAR(l.value, 0.0, 1e-30);
    EXPECT_NEAR(l.d_sin, 0.0, 1e-15);
    EXPECT_NEAR(l.d_cos, 0.0, 1e-15);
  }
}

TEST(AngleLoss, ZeroPredictionPaysUnitConstraint) {
  for (double a : {-2.0, 0.0, 1.0}) {
    // (sin a)^2 + (cos a)^2 from the data terms, plus 1 from the constraint.
    EXPECT_NEAR(loss::angle_loss({0.0, 0.0}, a).value, 2.0, 1e-15);
  }
}

TEST(AngleLoss, NonNegativeAndZeroOnlyAtEncoding) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 1000; ++i) {
    const loss::AngleEncoding p{u(rng), u(rng)};
    const double a = 1.5 * u(rng);
    const double v = loss::angle_loss(p, a).value;
    EXPECT_GE(v, 0.0);
    if (std::hypot(p.sin_hat - std::sin(a), p.cos_hat - std::cos(a)) > 1e-3) {
      EXPECT_GT(v, 0.0);
    }
  }
}

TEST(AngleLoss, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int i = 0; i < 100; ++i) {
    loss::AngleEncoding p{u(rng), u(rng)};
    const double a = 2.0 * u(rng);
    const auto l = loss::angle_loss(p, a);
    auto f = [&] { return loss::angle_loss(p, a).value; };
    EXPECT_LT(relative_error(l.d_sin, central_difference(f, p.sin_hat, 1e-6)), 1e-6);
    EXPECT_LT(relative_error(l.d_cos, central_difference(f, p.cos_hat, 1e-6)), 1e-6);
  }
}

TEST(DecodeAngle, Examples) {
  EXPECT_DOUBLE_EQ(loss::decode_angle({1.0, 0.0}), kPi / 2);
  EXPECT_DOUBLE_EQ(loss::decode_angle({0.0, -1.0}), kPi);
  EXPECT_DOUBLE_EQ(loss::decode_angle({3.0, 3.0}), kPi / 4);  // scale free
  try {
    loss::decode_angle({0.0, 0.0});
    FAIL() << "expected ZeroVector";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroVector);
  }
}

TEST(DecodeAngle, RoundTrip) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  for (int i = 0; i < 10000; ++i) {
    double a = u(rng);
    if (a == -kPi) a = kPi;
    EXPECT_NEAR(loss::decode_angle(loss::encode_angle(a)), a, 1e-12);
  }
  EXPECT_NEAR(loss::decode_angle(loss::encode_angle(kPi)), kPi, 1e-12);
}

TEST(Dims, EncodeExamples) {
  const Dims3D mean{1.53, 1.63, 3.88};
  const auto z = loss::encode_dims(mean, mean);
  EXPECT_EQ(z.dh, 0.0);
  EXPECT_EQ(z.dw, 0.0);
  EXPECT_EQ(z.dl, 0.0);
  EXPECT_NEAR(loss::encode_dims({2 * mean.h, mean.w, mean.l}, mean).dh, std::log(2.0), 1e-15);
}

TEST(Dims, RoundTrip) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.05, 20.0);
  for (int i = 0; i < 10000; ++i) {
    const Dims3D d{u(rng), u(rng), u(rng)};
    const Dims3D m{u(rng), u(rng), u(rng)};
    const Dims3D back = loss::decode_dims(loss::encode_dims(d, m), m);
    EXPECT_LT(std::abs(back.h - d.h) / d.h, 1e-12);
    EXPECT_LT(std::abs(back.w - d.w) / d.w, 1e-12);
    EXPECT_LT(std::abs(back.l - d.l) / d.l, 1e-12);
  }
}

TEST(Dims, NonPositiveRejected) {
  for (const auto& [d, m] : {std::pair<Dims3D, Dims3D>{{0, 1, 1}, {1, 1, 1}}, {{1, 1, 1}, {1, -1, 1}}}) {
    try {
      loss::encode_dims(d, m);
      FAIL() << "expected NonPositive";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::NonPositive);
    }
  }
  EXPECT_THROW(loss::decode_dims({}, {1, 0, 1}), Error);
}

TEST(ClassMeans, KittiTable) {
  const auto m = loss::ClassMeans::kitti();
  EXPECT_TRUE(m.contains("Car"));
  EXPECT_TRUE(m.contains("Pedestrian"));
  EXPECT_TRUE(m.contains("Cyclist"));
  EXPECT_FALSE(m.contains("DontCare"));
  EXPECT_THROW(m.at("DontCare"), Error);
  loss::ClassMeans custom;
  EXPECT_THROW(custom.set("Bad", {1, 0, 1}), Error);
}

TEST(Stde, Basics) {
  const Translation a{1, 2, 3};
  const Translation b{0.5, -1, 7};
  EXPECT_TRUE(loss::stde(a, a).isZero());
  EXPECT_EQ(loss::stde(a, {0, 0, 0}), Vec3(1, 2, 3));
  EXPECT_EQ(loss::stde(a, b), -loss::stde(b, a));
}

TEST(RotateDisplacement, MatchesOracle) {
  // tests/oracles/rotation_oracle.py
  struct Case {
    double a;
    Vec3 dt, expect;
  };
  const Case cases[] = {
      {kPi / 2, {0.1, 0.2, 0.3}, {0.3, 0.2, -0.1}},
      {0.7, {-1.5, 0.25, 2.0}, {0.141172093548649, 0.25, 2.496010905425513}},
      {-2.9, {0.4, -0.3, -0.8}, {-0.196983802688650, -0.3, 0.872466263805265}},
  };
  for (const auto& c : cases) EXPECT_LT((loss::rotate_displacement(c.dt, c.a) - c.expect).norm(), 1e-14);
  EXPECT_EQ(loss::rotate_displacement({1, 2, 3}, 0.0), Vec3(1, 2, 3));
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 3.0);
  for (int i = 0; i < 100; ++i) {
    const Vec3 v(g(rng), g(rng), g(rng));
    EXPECT_NEAR(loss::rotate_displacement(v, g(rng)).norm(), v.norm(), 1e-12);
  }
}

TEST(Vdl, HandArithmetic) {
  EXPECT_EQ(loss::vdl({1, 2, 3}, {1, 2, 3}, {1, 1, 1}, 0.4).value, 0.0);
  EXPECT_DOUBLE_EQ(loss::vdl({1, 0, 0}, {0, 0, 0}, {1, 1, 1}, 0.0).value, 1.0);
  // w h = 6, w l = 12, h l = 8
  EXPECT_NEAR(loss::vdl({0.1, 0.2, 0.3}, {0, 0, 0}, {2, 3, 4}, 0.0).value, 5.4, 1e-12);
}

TEST(Vdl, Properties) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.3, 5.0);
  for (int i = 0; i < 1000; ++i) {
    const Translation p{g(rng), g(rng), 20 + g(rng)};
    const Translation t{g(rng), g(rng), 20 + g(rng)};
    const Dims3D d{u(rng), u(rng), u(rng)};
    const double a = 3 * g(rng);
    const double v = loss::vdl(p, t, d, a).value;
    EXPECT_GT(v, 0.0);
    const Vec3 shift(g(rng), g(rng), g(rng));
    EXPECT_NEAR(loss::vdl(Translation::from(p.vec() + shift), Translation::from(t.vec() + shift), d, a).value, v,
                1e-9 * (1 + v));
    EXPECT_NEAR(loss::vdl(p, t, d, a + kTwoPi).value, v, 1e-9 * (1 + v));
    EXPECT_NEAR(loss::vdl(p, t, {1, 1, 1}, 0.0).value, loss::stde(p, t).lpNorm<1>(), 1e-12);
  }
}

TEST(Vdl, ZeroDisplacementHasZeroGradient) {
  EXPECT_TRUE(loss::vdl({1, 2, 3}, {1, 2, 3}, {1.5, 1.6, 3.9}, 0.8).grad.isZero());
}

TEST(Vdl, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.3, 5.0);
  int checked = 0;
  while (checked < 100) {
    Translation p{g(rng), g(rng), 20 + g(rng)};
    const Translation t{g(rng), g(rng), 20 + g(rng)};
    const Dims3D d{u(rng), u(rng), u(rng)};
    const double a = 3 * g(rng);
    const Vec3 disp = loss::rotate_displacement(loss::stde(p, t), a);
    if (disp.cwiseAbs().minCoeff() <= 1e-3) continue;
    ++checked;
    const auto l = loss::vdl(p, t, d, a);
    auto f = [&] { return loss::vdl(p, t, d, a).value; };
    EXPECT_LT(relative_error(l.grad.x(), central_difference(f, p.tx, 1e-6)), 1e-5);
    EXPECT_LT(relative_error(l.grad.y(), central_difference(f, p.ty, 1e-6)), 1e-5);
    EXPECT_LT(relative_error(l.grad.z(), central_difference(f, p.tz, 1e-6)), 1e-5);
  }
}

}  // namespace
