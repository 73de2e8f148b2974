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

#include "agbench/image.hpp"

#include <algorithm>
#include <cmath>

#include "agbench/error.hpp"

namespace agbench {

GrayImage::GrayImage(std::size_t width, std::size_t height, float fill)
    : width_(width), height_(height), data_(width * height, fill) {
  if (!(fill >= 0.0f && fill <= 1.0f)) {
    throw ParameterError("GrayImage: fill value outside [0,1]");
  }
}

GrayImage::GrayImage(std::size_t width, std::size_t height,
                     std::vector<float> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (data_.size() != width_ * height_) {
    throw ShapeError("GrayImage: data length " + std::to_string(data_.size()) +
                     " != " + std::to_string(width_) + "x" +
                     std::to_string(height_));
  }
  for (float v : data_) {
    // Written so that NaN fails too.
    if (!(v >= 0.0f && v <= 1.0f)) {
      throw ParameterError("GrayImage: pixel value outside [0,1]");
    }
  }
}

std::uint8_t quantize_unit(float v) {
  return static_cast<std::uint8_t>(
      std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

std::vector<std::uint8_t> GrayImage::to_bytes() const {
  std::vector<std::uint8_t> out(data_.size());
  std::transform(data_.begin(), data_.end(), out.begin(), quantize_unit);
  return out;
}

GrayImage GrayImage::from_bytes(std::size_t width, std::size_t height,
                                std::span<const std::uint8_t> bytes) {
  if (bytes.size() != width * height) {
    throw ShapeError("GrayImage::from_bytes: byte count mismatch");
  }
  std::vector<float> data(bytes.size());
  std::transform(bytes.begin(), bytes.end(), data.begin(),
                 [](std::uint8_t b) { return static_cast<float>(b) / 255.0f; });
  GrayImage img;
  img.width_ = width;
  img.height_ = height;
  img.data_ = std::move(data);
  return img;
}

GrayImage GrayImage::quantized() const {
  return from_bytes(width_, height_, to_bytes());
}

void LabeledDataset::validate() const {
  if (items.empty()) return;
  const auto w = items.front().image.width();
  const auto h = items.front().image.height();
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& item = items[i];
    if (item.label >= class_names.size()) {
      throw FormatError("dataset item " + std::to_string(i) + ": label " +
                        std::to_string(item.label) + " has no class name");
    }
    if (item.image.width() != w || item.image.height() != h) {
      throw ShapeError("dataset item " + std::to_string(i) +
                       ": image size differs from item 0");
    }
  }
}

std::vector<std::string> digit_class_names() {
  std::vector<std::string> names;
  for (int d = 0; d < 10; ++d) names.push_back(std::to_string(d));
  return names;
}

}  // namespace agbench
