// Copyright 2026 The agbench Authors. All Rights Reserved.
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

#include "agbench/error.hpp"
#include "agbench/interpolate.hpp"
#include "test_support.hpp"

namespace agbench {
namespace {

TEST(Upsample, MnistToImagenetSize) {
  std::mt19937_64 rng(1);
  const auto digit = testing::synthetic_digit(rng);
  for (auto k : {Kernel::kNearest, Kernel::kBilinear}) {
    const auto up = upsample(digit, 224, 224, k);
    EXPECT_EQ(up.width(), 224u);
    EXPECT_EQ(up.height(), 224u);
  }
}

TEST(Upsample, ConstantStaysConstant) {
  for (auto k : {Kernel::kNearest, Kernel::kBilinear}) {
    const auto up = upsample(GrayImage(3, 5, 0.25f), 17, 40, k);
    for (float v : up.pixels()) EXPECT_FLOAT_EQ(v, 0.25f);
  }
}

TEST(Upsample, DownscaleRejected) {
  EXPECT_THROW(upsample(GrayImage(28, 28), 27, 28), ParameterError);
  EXPECT_THROW(upsample(GrayImage(28, 28), 28, 10), ParameterError);
}

TEST(Upsample, BilinearCheckerboardMatchesClosedForm) {
  // a b / c d, corner aligned: f(u,v) = a(1-u)(1-v) + b u(1-v) + c(1-u)v + d uv.
  const GrayImage board(2, 2, std::vector<float>{0.0f, 1.0f, 1.0f, 0.0f});
  const auto up = upsample(board, 4, 4, Kernel::kBilinear);
  for (std::size_t y = 0; y < 4; ++y) {
    for (std::size_t x = 0; x < 4; ++x) {
      const double u = x / 3.0, v = y / 3.0;
      const double f = 0 * (1 - u) * (1 - v) + 1 * u * (1 - v) + 1 * (1 - u) * v + 0 * u * v;
      EXPECT_NEAR(up.at(x, y), f, 1e-6);
    }
  }
  EXPECT_EQ(up.at(0, 0), 0.0f);
  EXPECT_EQ(up.at(3, 0), 1.0f);
  EXPECT_EQ(up.at(0, 3), 1.0f);
  EXPECT_EQ(up.at(3, 3), 0.0f);
}

TEST(Upsample, NearestIntegerFactorIsBlockReplication) {
  std::mt19937_64 rng(2);
  const auto img = testing::random_image(rng, 7, 5);
  for (std::size_t k : {1u, 2u, 3u, 8u}) {
    const auto up = upsample(img, 7 * k, 5 * k, Kernel::kNearest);
    for (std::size_t y = 0; y < up.height(); ++y)
      for (std::size_t x = 0; x < up.width(); ++x) ASSERT_EQ(up.at(x, y), img.at(x / k, y / k));
  }
}

TEST(Upsample, BilinearStaysWithinInputRange) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto img = testing::random_image(rng, 2 + rng() % 10, 2 + rng() % 10);
    const auto [lo, hi] = std::minmax_element(img.pixels().begin(), img.pixels().end());
    const auto up = upsample(img, img.width() * 3 + 1, img.height() * 2 + 3);
    for (float v : up.pixels()) {
      EXPECT_GE(v, *lo - 1e-6f);
      EXPECT_LE(v, *hi + 1e-6f);
    }
  }
}

TEST(Upsample, BilinearPreservesMonotonicity) {
  std::vector<float> ramp(6 * 4);
  for (std::size_t y = 0; y < 4; ++y)
    for (std::size_t x = 0; x < 6; ++x) ramp[y * 6 + x] = static_cast<float>(x * x + y) / 30.0f;
  const auto up = upsample(GrayImage(6, 4, ramp), 23, 13);
  for (std::size_t y = 0; y < up.height(); ++y)
    for (std::size_t x = 1; x < up.width(); ++x) EXPECT_GE(up.at(x, y), up.at(x - 1, y));
  for (std::size_t y = 1; y < up.height(); ++y)
    for (std::size_t x = 0; x < up.width(); ++x) EXPECT_GE(up.at(x, y), up.at(x, y - 1));
}

TEST(Upsample, SinglePixelSource) {
  const auto up = upsample(GrayImage(1, 1, 0.75f), 3, 3);
  for (float v : up.pixels()) EXPECT_FLOAT_EQ(v, 0.75f);
}

}  // namespace
}  // namespace agbench
