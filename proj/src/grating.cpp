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

#include "agbench/grating.hpp"

#include <algorithm>

#include "agbench/error.hpp"

namespace agbench {

std::string_view short_name(Direction d) {
  switch (d) {
    case Direction::kHorizontal: return "h";
    case Direction::kVertical: return "v";
    case Direction::kDiagUL: return "ul";
    case Direction::kDiagUR: return "ur";
  }
  return "?";
}

std::optional<Direction> parse_direction(std::string_view s) {
  for (auto d : kAllDirections) {
    if (s == short_name(d)) return d;
  }
  if (s == "horizontal") return Direction::kHorizontal;
  if (s == "vertical") return Direction::kVertical;
  return std::nullopt;
}

std::string_view to_string(Polarity p) {
  return p == Polarity::kLinesWhiteOnBlack ? "lines_white_on_black" : "lines_black_on_white";
}

void GratingSpec::validate() const {
  if (interval < 2) {
    throw ParameterError("grating interval must be >= 2, got " + std::to_string(interval));
  }
  if (figure_phase < 0 || figure_phase >= interval) {
    throw ParameterError("figure phase " + std::to_string(figure_phase) +
                         " outside [0, interval)");
  }
  if (!(threshold > 0.0f && threshold < 1.0f)) {
    throw ParameterError("threshold must lie in (0,1)");
  }
}

void GratingSpec::validate_for_composition() const {
  validate();
  if (interval % 2 != 0) {
    throw ParameterError("odd grating interval " + std::to_string(interval) +
                         ": half-cycle shift is not on the pixel grid");
  }
}

MaskPair::MaskPair(std::size_t width, std::size_t height, std::vector<std::uint8_t> figure)
    : width_(width), height_(height), figure_(std::move(figure)) {
  if (figure_.size() != width_ * height_) throw ShapeError("MaskPair: mask size mismatch");
}

std::size_t MaskPair::figure_count() const {
  return static_cast<std::size_t>(std::count(figure_.begin(), figure_.end(), std::uint8_t{1}));
}

MaskPair binarize(const GrayImage& image, float threshold, bool figure_is_dark) {
  if (!(threshold > 0.0f && threshold < 1.0f)) {
    throw ParameterError("threshold must lie in (0,1)");
  }
  std::vector<std::uint8_t> figure(image.size());
  const auto px = image.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) {
    figure[i] = figure_is_dark ? (px[i] < threshold) : (px[i] > threshold);
  }
  return MaskPair(image.width(), image.height(), std::move(figure));
}

long grating_coordinate(long x, long y, Direction direction) {
  switch (direction) {
    case Direction::kHorizontal: return y;
    case Direction::kVertical: return x;
    case Direction::kDiagUL: return x - y;
    case Direction::kDiagUR: return x + y;
  }
  return 0;
}

int grating_residue(long x, long y, Direction direction, int interval) {
  const long c = grating_coordinate(x, y, direction);
  return static_cast<int>(((c % interval) + interval) % interval);
}

GrayImage render_grating(std::size_t width, std::size_t height, const GratingSpec& spec,
                         int phase) {
  spec.validate();
  if (phase < 0 || phase >= spec.interval) {
    throw ParameterError("grating phase outside [0, interval)");
  }
  GrayImage out(width, height, spec.ground_value());
  const float line = spec.line_value();
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      if (grating_residue(static_cast<long>(x), static_cast<long>(y), spec.direction,
                          spec.interval) == phase) {
        out.at(x, y) = line;
      }
    }
  }
  return out;
}

GrayImage compose_abutting_grating(const MaskPair& masks, const GratingSpec& spec) {
  spec.validate_for_composition();
  const int fig_phase = spec.figure_phase;
  const int bg_phase = spec.background_phase();
  const float line = spec.line_value();
  GrayImage out(masks.width(), masks.height(), spec.ground_value());
  for (std::size_t y = 0; y < masks.height(); ++y) {
    for (std::size_t x = 0; x < masks.width(); ++x) {
      const int r =
          grating_residue(static_cast<long>(x), static_cast<long>(y), spec.direction, spec.interval);
      if (r == (masks.figure(x, y) ? fig_phase : bg_phase)) out.at(x, y) = line;
    }
  }
  return out;
}

GrayImage apply_abutting_grating(const GrayImage& image, const GratingSpec& spec,
                                 bool figure_is_dark) {
  spec.validate_for_composition();
  return compose_abutting_grating(binarize(image, spec.threshold, figure_is_dark), spec);
}

}  // namespace agbench
