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

#include <optional>
#include <string_view>

#include "agbench/image.hpp"

namespace agbench {

enum class Kernel { kNearest, kBilinear };

std::string_view to_string(Kernel k);
std::optional<Kernel> parse_kernel(std::string_view s);

/// Upsamples to the target size.
///
/// kNearest samples source pixel (floor(x*sw/tw), floor(y*sh/th)), which is
/// exact block replication for integer factors. kBilinear is corner aligned:
/// output corners coincide with input corners, so every output is a convex
/// combination of at most four inputs. Throws ParameterError when a target
/// dimension is smaller than the source.
GrayImage upsample(const GrayImage& image, std::size_t target_width, std::size_t target_height,
                   Kernel kernel = Kernel::kBilinear);

}  // namespace agbench
