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

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace agbench {

/// Row-major luminance image with values in [0,1].
///
/// Every file format quantizes at its boundary; inside the toolkit pixels are
/// floats so that thresholds and interpolation work on normalized values.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(std::size_t width, std::size_t height, float fill = 0.0f);
  /// Throws ShapeError if `data.size() != width * height` and
  /// ParameterError if any value lies outside [0,1].
  GrayImage(std::size_t width, std::size_t height, std::vector<float> data);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  float at(std::size_t x, std::size_t y) const { return data_[y * width_ + x]; }
  float& at(std::size_t x, std::size_t y) { return data_[y * width_ + x]; }

  std::span<const float> pixels() const { return data_; }
  std::span<float> pixels() { return data_; }

  /// round(v * 255) per pixel.
  std::vector<std::uint8_t> to_bytes() const;
  static GrayImage from_bytes(std::size_t width, std::size_t height,
                              std::span<const std::uint8_t> bytes);

  /// Copy with every value snapped to the nearest multiple of 1/255.
  GrayImage quantized() const;

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<float> data_;
};

std::uint8_t quantize_unit(float v);

struct LabeledImage {
  GrayImage image;
  std::uint32_t label = 0;
};

/// Ordered (image, label) pairs sharing one image size.
struct LabeledDataset {
  std::vector<LabeledImage> items;
  std::vector<std::string> class_names;
  std::string source;

  std::size_t size() const { return items.size(); }
  bool empty() const { return items.empty(); }

  /// Throws if a label has no class name or image sizes differ.
  void validate() const;
};

std::vector<std::string> digit_class_names();

}  // namespace agbench
