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

// Benchmark generation: applies the abutting grating corruption to a
// labeled dataset under every (direction, interval) condition of a grid and
// records a manifest with per-item parameters and content hashes.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <json.hpp>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "agbench/grating.hpp"
#include "agbench/image.hpp"
#include "agbench/interpolate.hpp"

namespace agbench {

enum class DatasetKind { kMnist, kMnistHires, kSilhouettes };

std::string_view to_string(DatasetKind kind);
std::optional<DatasetKind> parse_dataset_kind(std::string_view s);

struct Condition {
  Direction direction = Direction::kHorizontal;
  int interval = 4;

  /// "<direction>_<interval>", e.g. "h_4".
  std::string key() const;
  static std::optional<Condition> parse(std::string_view key);
  friend bool operator==(const Condition&, const Condition&) = default;
};

struct ConditionGrid {
  DatasetKind dataset = DatasetKind::kMnist;
  std::vector<Direction> directions;
  std::vector<int> intervals;

  /// mnist: h x {2,4,6,8}; mnist-hires: 4 directions x {4,8,16,32};
  /// silhouettes: 4 directions x {4,6,...,14}.
  static ConditionGrid defaults(DatasetKind kind);
  std::vector<Condition> conditions() const;
};

struct Interpolation {
  std::size_t width = 224;
  std::size_t height = 224;
  Kernel kernel = Kernel::kBilinear;
};

struct GenerateOptions {
  float threshold = 0.5f;
  int figure_phase = 0;
  Polarity polarity = Polarity::kLinesWhiteOnBlack;
  bool figure_is_dark = false;
  std::optional<Interpolation> interpolation;
  /// Free-form provenance copied into the manifest (split, subset seed, ...).
  nlohmann::json provenance = nlohmann::json::object();

  /// Per-dataset defaults: hires interpolates to 224x224 bilinear,
  /// silhouettes treat dark pixels as figure.
  static GenerateOptions defaults(DatasetKind kind);
};

/// Receives each stimulus once, on the calling thread, in (chunk, condition,
/// index) order.
using StimulusSink = std::function<void(const Condition& condition, std::size_t index,
                                        std::uint32_t label, const GrayImage& image)>;

/// Relative output path: <dataset>/<direction>_<interval>/<index>_<label>.png
std::string stimulus_path(DatasetKind kind, const Condition& condition, std::size_t index,
                          std::uint32_t label);
/// Identifier used by prediction files: <direction>_<interval>/<index>.
std::string stimulus_id(const Condition& condition, std::size_t index);

/// Runs the corruption over the grid and returns the manifest. Throws
/// ParameterError for empty datasets or invalid grating parameters (odd
/// intervals included) before any stimulus is emitted.
nlohmann::json generate(const LabeledDataset& dataset, const ConditionGrid& grid,
                        const GenerateOptions& options, const StimulusSink& sink);

struct GeneratedCondition {
  Condition condition;
  LabeledDataset data;
};

struct GeneratedBenchmark {
  std::vector<GeneratedCondition> conditions;
  nlohmann::json manifest;
};

GeneratedBenchmark generate_in_memory(const LabeledDataset& dataset, const ConditionGrid& grid,
                                      const GenerateOptions& options);

/// Writes PNGs (and optionally per-condition IDX pairs) under `out_dir` and
/// the manifest at `out_dir/manifest.json`.
nlohmann::json generate_to_directory(const LabeledDataset& dataset, const ConditionGrid& grid,
                                     const GenerateOptions& options,
                                     const std::filesystem::path& out_dir, bool write_idx);

struct VerifyReport {
  std::size_t checked = 0;
  std::vector<std::string> mismatched;  // manifest ids whose content hash differs
  std::vector<std::string> missing;     // manifest ids whose file is absent
  bool ok() const { return mismatched.empty() && missing.empty(); }
};

/// Re-hashes every stimulus listed in `dir/manifest.json`.
VerifyReport verify_directory(const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Human-study subsets

struct HumanSubset {
  LabeledDataset data;
  std::vector<std::size_t> source_indices;  // parallel to data.items
};

/// Draws `per_class` items of each of the first `classes` labels, skipping
/// `exclude`, then shuffles the result. Deterministic in `seed` on every
/// platform. Throws ParameterError when a class has too few items.
HumanSubset sample_human_subset(const LabeledDataset& dataset, std::uint64_t seed,
                                std::span<const std::size_t> exclude = {},
                                std::size_t per_class = 10, std::size_t classes = 10);

/// One subset per seed; later subsets exclude every earlier one.
std::vector<HumanSubset> sample_disjoint_subsets(const LabeledDataset& dataset,
                                                 std::span<const std::uint64_t> seeds,
                                                 std::size_t per_class = 10,
                                                 std::size_t classes = 10);

}  // namespace agbench
