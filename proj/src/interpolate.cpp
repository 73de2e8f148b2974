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

#include "agbench/interpolate.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "agbench/error.hpp"

namespace agbench {

std::string_view to_string(Kernel k) { return k == Kernel::kNearest ? "nearest" : "bilinear"; }

std::optional<Kernel> parse_kernel(std::string_view s) {
  if (s == "nearest") return Kernel::kNearest;
  if (s == "bilinear") return Kernel::kBilinear;
  return std::nullopt;
}

namespace {

struct Tap {
  std::size_t lo = 0;
  std::size_t hi = 0;
  double frac = 0.0;
};

// Corner-aligned source position for each destination index.
std::vector<Tap> bilinear_taps(std::size_t src, std::size_t dst) {
  std::vector<Tap> taps(dst);
  const double scale = dst > 1 ? static_cast<double>(src - 1) / static_cast<double>(dst - 1) : 0.0;
  for (std::size_t i = 0; i < dst; ++i) {
    const double pos = static_cast<double>(i) * scale;
    auto lo = static_cast<std::size_t>(std::floor(pos));
    lo = std::min(lo, src - 1);
    taps[i].lo = lo;
    taps[i].hi = std::min(lo + 1, src - 1);
    taps[i].frac = pos - static_cast<double>(lo);
  }
  return taps;
}

}  // namespace

GrayImage upsample(const GrayImage& image, std::size_t target_width, std::size_t target_height,
                   Kernel kernel) {
  const std::size_t sw = image.width(), sh = image.height();
  if (target_width < sw || target_height < sh) {
    throw ParameterError("upsample: target " + std::to_string(target_width) + "x" +
                         std::to_string(target_height) + " smaller than source " +
                         std::to_string(sw) + "x" + std::to_string(sh));
  }
  GrayImage out(target_width, target_height);
  if (sw == 0 || sh == 0) {
    if (target_width * target_height != 0) throw ParameterError("upsample: empty source");
    return out;
  }

  if (kernel == Kernel::kNearest) {
    for (std::size_t y = 0; y < target_height; ++y) {
      const std::size_t sy = y * sh / target_height;
      for (std::size_t x = 0; x < target_width; ++x) {
        out.at(x, y) = image.at(x * sw / target_width, sy);
      }
    }
    return out;
  }

  const auto xs = bilinear_taps(sw, target_width);
  const auto ys = bilinear_taps(sh, target_height);
  for (std::size_t y = 0; y < target_height; ++y) {
    const auto& ty = ys[y];
    for (std::size_t x = 0; x < target_width; ++x) {
      const auto& tx = xs[x];
      const double top = (1.0 - tx.frac) * image.at(tx.lo, ty.lo) + tx.frac * image.at(tx.hi, ty.lo);
      const double bot = (1.0 - tx.frac) * image.at(tx.lo, ty.hi) + tx.frac * image.at(tx.hi, ty.hi);
      const double v = (1.0 - ty.frac) * top + ty.frac * bot;
      out.at(x, y) = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
  }
  return out;
}

}  // namespace agbench
