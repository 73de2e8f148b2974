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

// Abutting grating corruption.
//
// An image is thresholded into complementary figure/background masks. Two
// one-pixel line gratings with the same interval are drawn, the background
// one shifted by half a period, and each is kept only inside its mask. The
// silhouette edge survives only as the offset between line ends.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "agbench/image.hpp"

namespace agbench {

enum class Direction {
  kHorizontal,  // lines are rows; the grating varies along y
  kVertical,    // lines are columns; varies along x
  kDiagUL,      // lines run upper-left to lower-right; varies along x - y
  kDiagUR,      // lines run upper-right to lower-left; varies along x + y
};

inline constexpr std::array<Direction, 4> kAllDirections = {
    Direction::kHorizontal, Direction::kVertical, Direction::kDiagUL, Direction::kDiagUR};

/// Short names used on the command line and in file paths: h, v, ul, ur.
std::string_view short_name(Direction d);
std::optional<Direction> parse_direction(std::string_view s);

enum class Polarity {
  kLinesWhiteOnBlack,
  kLinesBlackOnWhite,
};

std::string_view to_string(Polarity p);

struct GratingSpec {
  Direction direction = Direction::kHorizontal;
  int interval = 4;
  float threshold = 0.5f;
  int figure_phase = 0;
  Polarity polarity = Polarity::kLinesWhiteOnBlack;

  /// (figure_phase + interval/2) mod interval.
  int background_phase() const { return (figure_phase + interval / 2) % interval; }
  float line_value() const { return polarity == Polarity::kLinesWhiteOnBlack ? 1.0f : 0.0f; }
  float ground_value() const { return 1.0f - line_value(); }

  /// Throws ParameterError unless interval >= 2, 0 <= figure_phase < interval
  /// and threshold in (0,1).
  void validate() const;
  /// validate() plus the even-interval requirement of the composition step.
  void validate_for_composition() const;
};

/// Complementary figure/background partition. Only `figure` is stored;
/// background is its negation.
class MaskPair {
 public:
  MaskPair() = default;
  MaskPair(std::size_t width, std::size_t height, std::vector<std::uint8_t> figure);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  bool figure(std::size_t x, std::size_t y) const { return figure_[y * width_ + x] != 0; }
  bool background(std::size_t x, std::size_t y) const { return !figure(x, y); }
  const std::vector<std::uint8_t>& figure_mask() const { return figure_; }
  std::size_t figure_count() const;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<std::uint8_t> figure_;
};

/// figure(p) = image(p) > threshold, or image(p) < threshold when
/// `figure_is_dark` (black-on-white silhouettes). Pixels equal to the
/// threshold are background either way.
MaskPair binarize(const GrayImage& image, float threshold, bool figure_is_dark = false);

/// Position along the axis the grating varies on. May be negative for kDiagUL.
long grating_coordinate(long x, long y, Direction direction);
/// grating_coordinate reduced to [0, interval).
int grating_residue(long x, long y, Direction direction, int interval);

GrayImage render_grating(std::size_t width, std::size_t height, const GratingSpec& spec,
                         int phase);

/// Composes the figure grating (figure_phase) and the background grating
/// (background_phase) through the masks. Throws ParameterError for odd or
/// too small intervals.
GrayImage compose_abutting_grating(const MaskPair& masks, const GratingSpec& spec);

/// binarize + compose. Uses spec.threshold.
GrayImage apply_abutting_grating(const GrayImage& image, const GratingSpec& spec,
                                 bool figure_is_dark = false);

}  // namespace agbench
