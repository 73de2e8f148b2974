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

// Forward pass of a convolutional stem (conv 7x7/2 -> batch norm -> ReLU ->
// max pool 3x3/2) and the activation maps derived from it.

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "agbench/grating.hpp"
#include "agbench/image.hpp"
#include "agbench/tensor.hpp"

namespace agbench {

inline constexpr float kDefaultBatchNormEps = 1e-5f;

// ---------------------------------------------------------------------------
// Tensor ops

/// Cross-correlation of a (C,H,W) input with (O,C,kh,kw) weights. Output
/// size per axis is floor((in + 2*padding - k) / stride) + 1. `bias` is
/// either empty or has O entries.
Tensor conv2d(const Tensor& input, const Tensor& weights, std::size_t stride,
              std::size_t padding, std::span<const float> bias = {});

struct BatchNormParams {
  std::vector<float> gamma;
  std::vector<float> beta;
  std::vector<float> mean;
  std::vector<float> var;

  std::size_t channels() const { return gamma.size(); }
  /// Throws ShapeError on length disagreement, ParameterError on var < 0.
  void validate() const;
};

/// Inference form: gamma * (x - mean) / sqrt(var + eps) + beta per channel.
Tensor batch_norm(const Tensor& input, const BatchNormParams& bn,
                  float eps = kDefaultBatchNormEps);

Tensor relu(const Tensor& input);

/// Window maximum; padded cells never win.
Tensor max_pool(const Tensor& input, std::size_t kernel = 3, std::size_t stride = 2,
                std::size_t padding = 1);

// ---------------------------------------------------------------------------
// Weight bundle: weights.json manifest + weights.bin little-endian f32 blob.

struct WeightBundle {
  Tensor conv_weights;             // (64,3,7,7) for the reference stem
  std::vector<float> conv_bias;    // empty when the conv has no bias
  BatchNormParams bn;
  std::string source;

  void validate() const;
};

struct EncodedBundle {
  std::string manifest;
  std::vector<std::uint8_t> blob;
};

/// Tensor names follow torchvision's stem: conv1.weight, conv1.bias
/// (optional), bn1.weight, bn1.bias, bn1.running_mean, bn1.running_var.
EncodedBundle write_weight_bundle(const WeightBundle& bundle);
/// Throws FormatError when offsets, shapes or blob length disagree, or when
/// a WeightBundle invariant fails.
WeightBundle load_weight_bundle(std::string_view manifest, std::span<const std::uint8_t> blob);
WeightBundle load_weight_bundle_dir(const std::filesystem::path& dir);
void save_weight_bundle_dir(const std::filesystem::path& dir, const WeightBundle& bundle);

// ---------------------------------------------------------------------------
// Stem

/// Gray stimulus replicated to three channels, optionally standardized with
/// the ImageNet per-channel mean and std.
Tensor to_input_tensor(const GrayImage& image, bool imagenet_normalize = true);

struct StemOutputs {
  Tensor conv;
  Tensor bn;
  Tensor relu;
  Tensor pool;
};

StemOutputs run_stem(const Tensor& input, const WeightBundle& bundle,
                     float eps = kDefaultBatchNormEps);

// ---------------------------------------------------------------------------
// Activation maps

struct ActivationMap {
  GrayImage image;
  float raw_min = 0.0f;
  float raw_max = 0.0f;
};

/// Min-max normalization to [0,1]; a constant input maps to 0.5 everywhere.
GrayImage normalize_min_max(std::size_t width, std::size_t height, std::span<const float> values,
                            float lo, float hi);

/// Signed mean across channels, then min-max normalized.
ActivationMap average_activation_map(const Tensor& features);

/// One map per channel, all normalized with the min/max over every channel
/// so intensities compare across filters. raw_min/raw_max of each entry are
/// the global extrema.
std::vector<ActivationMap> per_filter_maps(const Tensor& features);

/// Tiles maps row-major into `columns` columns (8x8 for a 64-filter stem).
GrayImage montage(std::span<const ActivationMap> maps, std::size_t columns = 8,
                  std::size_t gap = 1);

/// Mean activation over line-end pixels (grating line pixels whose neighbour
/// along the line lies in the other mask region) minus the mean over the
/// remaining line pixels. Map values are nonnegative, so this is also the
/// magnitude difference. Positive means end-stopped. Throws ShapeError on a
/// size mismatch and ParameterError when there are no line-end pixels or no
/// interior line pixels.
double end_stopping_score(const GrayImage& map, const GratingSpec& spec, const MaskPair& masks);

/// Writes `<stem>.png` and a `<stem>.json` sidecar carrying the raw extrema.
void export_activation_map(const std::filesystem::path& dir, const std::string& stem,
                           const ActivationMap& map);

}  // namespace agbench
