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

#include "agbench/tensor.hpp"

#include <cmath>
#include <numeric>

#include "agbench/error.hpp"

namespace agbench {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

Tensor::Tensor(std::vector<std::size_t> shape, float fill)
    : shape_(std::move(shape)), data_(shape_product(shape_), fill) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<float> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != shape_product(shape_)) {
    throw ShapeError("Tensor: " + std::to_string(data_.size()) + " values for shape " +
                     shape_string());
  }
  for (float v : data_) {
    if (!std::isfinite(v)) throw ParameterError("Tensor: non-finite value");
  }
}

std::span<const float> Tensor::channel(std::size_t c) const {
  if (rank() != 3) throw ShapeError("Tensor::channel needs rank 3, got " + shape_string());
  const std::size_t plane = shape_[1] * shape_[2];
  return std::span<const float>(data_).subspan(c * plane, plane);
}

std::string Tensor::shape_string() const {
  std::string s = "(";
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape_[i]);
  }
  return s + ")";
}

}  // namespace agbench
