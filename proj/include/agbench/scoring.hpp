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

// Scoring of external model predictions against generated benchmarks.

#pragma once

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "agbench/dataset_io.hpp"

namespace agbench {

/// Accuracy of a uniform guess over the 16 coarse categories.
inline constexpr double kRandomGuess16 = 1.0 / 16.0;
inline constexpr double kDefaultOutlierThreshold = 0.20;

struct Prediction {
  std::string stimulus_id;
  std::uint32_t fine_class = 0;
};

struct PredictionSet {
  std::string model_name;
  std::vector<Prediction> rows;
};

/// CSV `stimulus_id,fine_class` with optional header. Throws FormatError on
/// malformed rows or duplicate stimulus ids.
PredictionSet parse_predictions(std::string_view text, std::string model_name);

struct TruthItem {
  std::string stimulus_id;
  std::uint32_t label = 0;
};

struct ConditionResult {
  std::string model_name;
  std::string dataset;
  std::string condition;  // "<direction>_<interval>"
  std::uint64_t correct = 0;
  std::uint64_t n = 0;

  double accuracy() const { return n ? static_cast<double>(correct) / static_cast<double>(n) : 0.0; }
};

/// Table lookup. Throws ParameterError when fine >= 1000.
std::optional<std::uint8_t> map_to_16(std::uint32_t fine, const ClassMap& map);

/// Counts predictions equal to the truth label, after mapping through
/// `class_map` when given (unmapped predictions are wrong). Throws
/// FormatError listing the missing ids when a truth item has no prediction.
ConditionResult score(const PredictionSet& predictions, std::span<const TruthItem> truth,
                      const ClassMap* class_map, std::string dataset = {},
                      std::string condition = {});

/// Scores every condition in a generated benchmark's manifest.
std::vector<ConditionResult> score_manifest(const PredictionSet& predictions,
                                            const nlohmann::json& manifest,
                                            const ClassMap* class_map);

nlohmann::json results_to_json(const std::vector<ConditionResult>& results, bool class_mapped);
std::vector<ConditionResult> results_from_json(const nlohmann::json& doc);

struct Histogram {
  std::string dataset;
  std::string condition;
  std::vector<std::uint64_t> counts;
};

struct Summary {
  double bin_width = 0.05;
  std::vector<Histogram> histograms;  // ordered by first appearance
};

/// Bins accuracies per (dataset, condition). Bins are [k*w, (k+1)*w); a value
/// on an edge goes to the higher bin and accuracy 1.0 to the last bin. Bin
/// assignment uses integer arithmetic on the correct counts. Throws
/// ParameterError unless 1/bin_width is an integer.
Summary summarize(const std::vector<ConditionResult>& results, double bin_width);
nlohmann::json summary_to_json(const Summary& summary);

/// Models whose accuracy exceeds `threshold` under at least one condition,
/// each listed once, in order of first appearance.
std::vector<std::string> outliers(const std::vector<ConditionResult>& results,
                                  double threshold = kDefaultOutlierThreshold);

}  // namespace agbench
