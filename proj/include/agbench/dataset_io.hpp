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

// Readers and writers for the external formats: IDX (MNIST), 8-bit grayscale
// PNG, the 1000->16 class-map CSV, and content hashes for manifests.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "agbench/image.hpp"

namespace agbench {

using Bytes = std::vector<std::uint8_t>;

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// IDX

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

/// Result of parsing an IDX file: images (magic 0x803) or labels (0x801).
using IdxContent = std::variant<std::vector<GrayImage>, std::vector<std::uint32_t>>;

/// Throws FormatError on a bad magic number and LengthError when the payload
/// does not match the declared dimensions.
IdxContent parse_idx(std::span<const std::uint8_t> bytes);
std::vector<GrayImage> parse_idx_images(std::span<const std::uint8_t> bytes);
std::vector<std::uint32_t> parse_idx_labels(std::span<const std::uint8_t> bytes);

/// Pixels are quantized with round(v*255). An empty list writes dims (0,0,0).
Bytes write_idx_images(std::span<const GrayImage> images);
/// Labels must fit in one byte.
Bytes write_idx_labels(std::span<const std::uint32_t> labels);

struct IdxPair {
  Bytes images;
  Bytes labels;
};
IdxPair write_idx(const LabeledDataset& dataset);
LabeledDataset parse_idx_dataset(std::span<const std::uint8_t> images,
                                 std::span<const std::uint8_t> labels,
                                 std::string source = "idx");

/// Loads `<dir>/<split>-images-idx3-ubyte` and the matching label file, where
/// split is "t10k" or "train".
LabeledDataset load_mnist(const std::filesystem::path& dir, std::string_view split);

// ---------------------------------------------------------------------------
// PNG

/// Decodes gray, gray+alpha, RGB or RGBA PNGs. Colour is reduced to the
/// unweighted channel mean. Throws FormatError on undecodable input.
GrayImage load_png_gray(std::span<const std::uint8_t> bytes);
/// 8-bit grayscale, non-interlaced.
Bytes write_png_gray(const GrayImage& image);

GrayImage load_png_file(const std::filesystem::path& path);
void write_png_file(const std::filesystem::path& path, const GrayImage& image);

/// Silhouette-style directory: one subdirectory per class name, PNG files
/// inside. Subdirectories are matched against `class_names`; items are
/// ordered by class index, then file name.
LabeledDataset load_png_directory(const std::filesystem::path& dir,
                                  const std::vector<std::string>& class_names);

// ---------------------------------------------------------------------------
// Class map

inline constexpr std::size_t kFineClasses = 1000;
inline constexpr std::size_t kCoarseClasses = 16;

/// The 16 coarse categories of the silhouette benchmark, alphabetical.
const std::array<std::string, kCoarseClasses>& coarse_category_names();
std::vector<std::string> coarse_category_list();

struct ClassMap {
  std::array<std::optional<std::uint8_t>, kFineClasses> entries{};
  std::array<std::string, kCoarseClasses> category_names = coarse_category_names();

  std::size_t mapped_count() const;
};

/// CSV with header `fine_index,category`. Unlisted fine indices stay
/// unmapped. Throws FormatError on duplicates, unknown categories or
/// indices >= 1000.
ClassMap load_class_map(std::string_view text);

// ---------------------------------------------------------------------------
// Hashing

std::string sha256_hex(std::span<const std::uint8_t> bytes);
/// Hash of the quantized pixel content, independent of PNG encoder settings:
/// sha256 over u32 big-endian width, height, then the 8-bit pixels.
std::string content_hash(const GrayImage& image);

}  // namespace agbench
