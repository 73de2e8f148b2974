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

#include "agbench/probe.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <json.hpp>

#include "agbench/dataset_io.hpp"
#include "agbench/error.hpp"
#include "agbench/parallel.hpp"

namespace agbench {

using json = nlohmann::json;

namespace {

std::size_t output_extent(std::size_t in, std::size_t k, std::size_t stride, std::size_t pad,
                          const char* op) {
  if (stride == 0) throw ParameterError(std::string(op) + ": stride must be positive");
  if (in + 2 * pad < k) {
    throw ShapeError(std::string(op) + ": window " + std::to_string(k) +
                     " larger than padded input " + std::to_string(in + 2 * pad));
  }
  return (in + 2 * pad - k) / stride + 1;
}

void require_rank(const Tensor& t, std::size_t rank, const char* op) {
  if (t.rank() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                     t.shape_string());
  }
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& weights, std::size_t stride,
              std::size_t padding, std::span<const float> bias) {
  require_rank(input, 3, "conv2d input");
  require_rank(weights, 4, "conv2d weights");
  const std::size_t channels = input.dim(0), in_h = input.dim(1), in_w = input.dim(2);
  const std::size_t out_c = weights.dim(0), kh = weights.dim(2), kw = weights.dim(3);
  if (weights.dim(1) != channels) {
    throw ShapeError("conv2d: input has " + std::to_string(channels) +
                     " channels, weights expect " + std::to_string(weights.dim(1)));
  }
  if (!bias.empty() && bias.size() != out_c) throw ShapeError("conv2d: bias length mismatch");
  const std::size_t out_h = output_extent(in_h, kh, stride, padding, "conv2d");
  const std::size_t out_w = output_extent(in_w, kw, stride, padding, "conv2d");

  Tensor out({out_c, out_h, out_w});
  const long pad = static_cast<long>(padding);
  // One task per output channel; each output pixel sums in (c, ky, kx) order.
  parallel_for(out_c, [&](std::size_t o) {
    for (std::size_t oy = 0; oy < out_h; ++oy) {
      for (std::size_t ox = 0; ox < out_w; ++ox) {
        double acc = bias.empty() ? 0.0 : bias[o];
        const long iy0 = static_cast<long>(oy * stride) - pad;
        const long ix0 = static_cast<long>(ox * stride) - pad;
        for (std::size_t c = 0; c < channels; ++c) {
          for (std::size_t ky = 0; ky < kh; ++ky) {
            const long iy = iy0 + static_cast<long>(ky);
            if (iy < 0 || iy >= static_cast<long>(in_h)) continue;
            for (std::size_t kx = 0; kx < kw; ++kx) {
              const long ix = ix0 + static_cast<long>(kx);
              if (ix < 0 || ix >= static_cast<long>(in_w)) continue;
              acc += static_cast<double>(weights.at(o, c, ky, kx)) *
                     input.at(c, static_cast<std::size_t>(iy), static_cast<std::size_t>(ix));
            }
          }
        }
        out.at(o, oy, ox) = static_cast<float>(acc);
      }
    }
  });
  return out;
}

void BatchNormParams::validate() const {
  const std::size_t n = gamma.size();
  if (beta.size() != n || mean.size() != n || var.size() != n) {
    throw ShapeError("batch norm: gamma/beta/mean/var lengths differ");
  }
  for (float v : var) {
    if (!(v >= 0.0f)) throw ParameterError("batch norm: negative running variance");
  }
}

Tensor batch_norm(const Tensor& input, const BatchNormParams& bn, float eps) {
  require_rank(input, 3, "batch_norm");
  bn.validate();
  if (bn.channels() != input.dim(0)) {
    throw ShapeError("batch_norm: " + std::to_string(bn.channels()) + " channels for input " +
                     input.shape_string());
  }
  if (eps < 0.0f) throw ParameterError("batch_norm: eps must be nonnegative");
  Tensor out(input.shape());
  const std::size_t plane = input.dim(1) * input.dim(2);
  auto src = input.data();
  auto dst = out.data();
  for (std::size_t c = 0; c < bn.channels(); ++c) {
    const double denom = std::sqrt(static_cast<double>(bn.var[c]) + eps);
    if (denom == 0.0) throw ParameterError("batch_norm: zero variance with eps 0");
    const double scale = bn.gamma[c] / denom;
    for (std::size_t i = c * plane; i < (c + 1) * plane; ++i) {
      dst[i] = static_cast<float>(scale * (static_cast<double>(src[i]) - bn.mean[c]) + bn.beta[c]);
    }
  }
  return out;
}

Tensor relu(const Tensor& input) {
  Tensor out(input.shape());
  std::transform(input.data().begin(), input.data().end(), out.data().begin(),
                 [](float v) { return std::max(v, 0.0f); });
  return out;
}

Tensor max_pool(const Tensor& input, std::size_t kernel, std::size_t stride, std::size_t padding) {
  require_rank(input, 3, "max_pool");
  if (kernel == 0) throw ParameterError("max_pool: kernel must be positive");
  if (2 * padding > kernel) throw ParameterError("max_pool: padding exceeds half the kernel");
  const std::size_t channels = input.dim(0), in_h = input.dim(1), in_w = input.dim(2);
  const std::size_t out_h = output_extent(in_h, kernel, stride, padding, "max_pool");
  const std::size_t out_w = output_extent(in_w, kernel, stride, padding, "max_pool");
  Tensor out({channels, out_h, out_w});
  const long pad = static_cast<long>(padding);
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t oy = 0; oy < out_h; ++oy) {
      for (std::size_t ox = 0; ox < out_w; ++ox) {
        float best = -std::numeric_limits<float>::infinity();
        for (std::size_t ky = 0; ky < kernel; ++ky) {
          const long iy = static_cast<long>(oy * stride + ky) - pad;
          if (iy < 0 || iy >= static_cast<long>(in_h)) continue;
          for (std::size_t kx = 0; kx < kernel; ++kx) {
            const long ix = static_cast<long>(ox * stride + kx) - pad;
            if (ix < 0 || ix >= static_cast<long>(in_w)) continue;
            best = std::max(best, input.at(c, static_cast<std::size_t>(iy),
                                           static_cast<std::size_t>(ix)));
          }
        }
        out.at(c, oy, ox) = best;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Weight bundle

namespace {

constexpr const char* kConvWeight = "conv1.weight";
constexpr const char* kConvBias = "conv1.bias";
constexpr const char* kBnGamma = "bn1.weight";
constexpr const char* kBnBeta = "bn1.bias";
constexpr const char* kBnMean = "bn1.running_mean";
constexpr const char* kBnVar = "bn1.running_var";

void append_f32_le(std::vector<std::uint8_t>& out, float v) {
  const auto bits = std::bit_cast<std::uint32_t>(v);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

float read_f32_le(std::span<const std::uint8_t> bytes, std::size_t offset) {
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i) bits |= std::uint32_t{bytes[offset + i]} << (8 * i);
  return std::bit_cast<float>(bits);
}

}  // namespace

void WeightBundle::validate() const {
  require_rank(conv_weights, 4, "weight bundle conv");
  bn.validate();
  if (bn.channels() != conv_weights.dim(0)) {
    throw ShapeError("weight bundle: conv has " + std::to_string(conv_weights.dim(0)) +
                     " output channels, batch norm has " + std::to_string(bn.channels()));
  }
  if (!conv_bias.empty() && conv_bias.size() != conv_weights.dim(0)) {
    throw ShapeError("weight bundle: conv bias length mismatch");
  }
}

EncodedBundle write_weight_bundle(const WeightBundle& bundle) {
  bundle.validate();
  EncodedBundle enc;
  json tensors = json::array();
  auto emit = [&](const char* name, std::vector<std::size_t> shape, std::span<const float> values) {
    tensors.push_back({{"name", name}, {"shape", shape}, {"dtype", "f32"}, {"offset", enc.blob.size()}});
    for (float v : values) append_f32_le(enc.blob, v);
  };
  emit(kConvWeight, bundle.conv_weights.shape(), bundle.conv_weights.data());
  const std::size_t n = bundle.bn.channels();
  if (!bundle.conv_bias.empty()) emit(kConvBias, {n}, bundle.conv_bias);
  emit(kBnGamma, {n}, bundle.bn.gamma);
  emit(kBnBeta, {n}, bundle.bn.beta);
  emit(kBnMean, {n}, bundle.bn.mean);
  emit(kBnVar, {n}, bundle.bn.var);
  json manifest = {{"format", "agbench-weights/1"}, {"source", bundle.source}, {"tensors", tensors}};
  enc.manifest = manifest.dump(2);
  return enc;
}

WeightBundle load_weight_bundle(std::string_view manifest_text, std::span<const std::uint8_t> blob) {
  json manifest;
  try {
    manifest = json::parse(manifest_text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("weight manifest: ") + e.what());
  }
  if (!manifest.contains("tensors") || !manifest["tensors"].is_array()) {
    throw FormatError("weight manifest: missing tensors array");
  }

  struct Extent {
    std::size_t begin, end;
    std::string name;
  };
  std::vector<Extent> extents;
  std::map<std::string, Tensor> tensors;
  try {
    for (const auto& t : manifest["tensors"]) {
      const auto name = t.at("name").get<std::string>();
      const auto dtype = t.at("dtype").get<std::string>();
      if (dtype != "f32") throw FormatError("weight manifest: " + name + " has dtype " + dtype);
      const auto shape = t.at("shape").get<std::vector<std::size_t>>();
      const auto offset = t.at("offset").get<std::size_t>();
      const std::size_t count = shape_product(shape);
      const std::size_t end = offset + 4 * count;
      if (end > blob.size() || end < offset) {
        throw FormatError("weight manifest: " + name + " spans bytes [" + std::to_string(offset) +
                          ", " + std::to_string(end) + ") but blob has " +
                          std::to_string(blob.size()));
      }
      std::vector<float> values(count);
      for (std::size_t i = 0; i < count; ++i) values[i] = read_f32_le(blob, offset + 4 * i);
      if (!tensors.emplace(name, Tensor(shape, std::move(values))).second) {
        throw FormatError("weight manifest: duplicate tensor " + name);
      }
      extents.push_back({offset, end, name});
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("weight manifest: ") + e.what());
  } catch (const ParameterError& e) {
    throw FormatError(std::string("weight blob: ") + e.what());
  }

  std::sort(extents.begin(), extents.end(),
            [](const Extent& a, const Extent& b) { return a.begin < b.begin; });
  std::size_t covered = 0;
  for (const auto& e : extents) {
    if (e.begin < covered) throw FormatError("weight manifest: tensor " + e.name + " overlaps");
    covered = e.end;
  }
  if (covered != blob.size()) {
    throw FormatError("weight blob has " + std::to_string(blob.size()) +
                      " bytes, manifest accounts for " + std::to_string(covered));
  }

  auto take = [&](const char* name) -> Tensor& {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw FormatError(std::string("weight manifest: missing ") + name);
    return it->second;
  };
  auto vec = [&](const char* name) {
    const auto& t = take(name);
    if (t.rank() != 1) throw FormatError(std::string("weight manifest: ") + name + " must be 1-D");
    return std::vector<float>(t.data().begin(), t.data().end());
  };

  WeightBundle bundle;
  bundle.conv_weights = take(kConvWeight);
  if (tensors.count(kConvBias)) bundle.conv_bias = vec(kConvBias);
  bundle.bn.gamma = vec(kBnGamma);
  bundle.bn.beta = vec(kBnBeta);
  bundle.bn.mean = vec(kBnMean);
  bundle.bn.var = vec(kBnVar);
  bundle.source = manifest.value("source", "");
  try {
    bundle.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("weight bundle: ") + e.what());
  }
  return bundle;
}

WeightBundle load_weight_bundle_dir(const std::filesystem::path& dir) {
  return load_weight_bundle(read_text_file(dir / "weights.json"), read_file(dir / "weights.bin"));
}

void save_weight_bundle_dir(const std::filesystem::path& dir, const WeightBundle& bundle) {
  const auto enc = write_weight_bundle(bundle);
  write_text_file(dir / "weights.json", enc.manifest);
  write_file(dir / "weights.bin", enc.blob);
}

// ---------------------------------------------------------------------------
// Stem

Tensor to_input_tensor(const GrayImage& image, bool imagenet_normalize) {
  static constexpr float kMean[3] = {0.485f, 0.456f, 0.406f};
  static constexpr float kStd[3] = {0.229f, 0.224f, 0.225f};
  const std::size_t h = image.height(), w = image.width();
  Tensor out({3, h, w});
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        const float v = image.at(x, y);
        out.at(c, y, x) = imagenet_normalize ? (v - kMean[c]) / kStd[c] : v;
      }
    }
  }
  return out;
}

StemOutputs run_stem(const Tensor& input, const WeightBundle& bundle, float eps) {
  bundle.validate();
  StemOutputs out;
  out.conv = conv2d(input, bundle.conv_weights, 2, 3, bundle.conv_bias);
  out.bn = batch_norm(out.conv, bundle.bn, eps);
  out.relu = relu(out.bn);
  out.pool = max_pool(out.relu, 3, 2, 1);
  return out;
}

// ---------------------------------------------------------------------------
// Activation maps

GrayImage normalize_min_max(std::size_t width, std::size_t height, std::span<const float> values,
                            float lo, float hi) {
  if (values.size() != width * height) throw ShapeError("normalize_min_max: size mismatch");
  std::vector<float> data(values.size(), 0.5f);
  if (hi > lo) {
    const double range = static_cast<double>(hi) - lo;
    for (std::size_t i = 0; i < values.size(); ++i) {
      data[i] = static_cast<float>(std::clamp((values[i] - static_cast<double>(lo)) / range, 0.0, 1.0));
    }
  }
  return GrayImage(width, height, std::move(data));
}

ActivationMap average_activation_map(const Tensor& features) {
  require_rank(features, 3, "average_activation_map");
  const std::size_t channels = features.dim(0), h = features.dim(1), w = features.dim(2);
  std::vector<double> sum(h * w, 0.0);
  for (std::size_t c = 0; c < channels; ++c) {
    const auto plane = features.channel(c);
    for (std::size_t i = 0; i < plane.size(); ++i) sum[i] += plane[i];
  }
  std::vector<float> mean(h * w);
  for (std::size_t i = 0; i < mean.size(); ++i) {
    mean[i] = channels ? static_cast<float>(sum[i] / static_cast<double>(channels)) : 0.0f;
  }
  ActivationMap out;
  if (!mean.empty()) {
    const auto [lo, hi] = std::minmax_element(mean.begin(), mean.end());
    out.raw_min = *lo;
    out.raw_max = *hi;
  }
  out.image = normalize_min_max(w, h, mean, out.raw_min, out.raw_max);
  return out;
}

std::vector<ActivationMap> per_filter_maps(const Tensor& features) {
  require_rank(features, 3, "per_filter_maps");
  const std::size_t h = features.dim(1), w = features.dim(2);
  float lo = 0.0f, hi = 0.0f;
  if (features.size() > 0) {
    const auto [mn, mx] = std::minmax_element(features.data().begin(), features.data().end());
    lo = *mn;
    hi = *mx;
  }
  std::vector<ActivationMap> maps;
  maps.reserve(features.dim(0));
  for (std::size_t c = 0; c < features.dim(0); ++c) {
    maps.push_back({normalize_min_max(w, h, features.channel(c), lo, hi), lo, hi});
  }
  return maps;
}

GrayImage montage(std::span<const ActivationMap> maps, std::size_t columns, std::size_t gap) {
  if (maps.empty()) return {};
  if (columns == 0) throw ParameterError("montage: columns must be positive");
  const std::size_t w = maps.front().image.width(), h = maps.front().image.height();
  const std::size_t rows = (maps.size() + columns - 1) / columns;
  const std::size_t cols = std::min(columns, maps.size());
  GrayImage out(cols * w + (cols - 1) * gap, rows * h + (rows - 1) * gap, 1.0f);
  for (std::size_t i = 0; i < maps.size(); ++i) {
    const auto& m = maps[i].image;
    if (m.width() != w || m.height() != h) throw ShapeError("montage: map sizes differ");
    const std::size_t ox = (i % columns) * (w + gap), oy = (i / columns) * (h + gap);
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) out.at(ox + x, oy + y) = m.at(x, y);
    }
  }
  return out;
}

double end_stopping_score(const GrayImage& map, const GratingSpec& spec, const MaskPair& masks) {
  spec.validate_for_composition();
  if (map.width() != masks.width() || map.height() != masks.height()) {
    throw ShapeError("end_stopping_score: map and masks differ in size");
  }
  // Step along a grating line, i.e. along which the grating coordinate is constant.
  long dx = 1, dy = 0;
  switch (spec.direction) {
    case Direction::kHorizontal: dx = 1; dy = 0; break;
    case Direction::kVertical: dx = 0; dy = 1; break;
    case Direction::kDiagUL: dx = 1; dy = 1; break;
    case Direction::kDiagUR: dx = 1; dy = -1; break;
  }
  const long w = static_cast<long>(map.width()), h = static_cast<long>(map.height());
  const int fig_phase = spec.figure_phase, bg_phase = spec.background_phase();

  double end_sum = 0.0, interior_sum = 0.0;
  std::size_t end_count = 0, interior_count = 0;
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      const bool fig = masks.figure(static_cast<std::size_t>(x), static_cast<std::size_t>(y));
      if (grating_residue(x, y, spec.direction, spec.interval) != (fig ? fig_phase : bg_phase)) {
        continue;
      }
      bool is_end = false;
      for (long s : {-1L, 1L}) {
        const long nx = x + s * dx, ny = y + s * dy;
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
        if (masks.figure(static_cast<std::size_t>(nx), static_cast<std::size_t>(ny)) != fig) {
          is_end = true;
        }
      }
      const double v = map.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y));
      if (is_end) {
        end_sum += v;
        ++end_count;
      } else {
        interior_sum += v;
        ++interior_count;
      }
    }
  }
  if (end_count == 0) throw ParameterError("end_stopping_score: no line-end pixels");
  if (interior_count == 0) throw ParameterError("end_stopping_score: no interior line pixels");
  return end_sum / static_cast<double>(end_count) -
         interior_sum / static_cast<double>(interior_count);
}

void export_activation_map(const std::filesystem::path& dir, const std::string& stem,
                           const ActivationMap& map) {
  write_png_file(dir / (stem + ".png"), map.image);
  const json sidecar = {{"width", map.image.width()},
                        {"height", map.image.height()},
                        {"raw_min", map.raw_min},
                        {"raw_max", map.raw_max},
                        {"constant_map_value", 0.5}};
  write_text_file(dir / (stem + ".json"), sidecar.dump(2));
}

}  // namespace agbench
