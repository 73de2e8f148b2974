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

#include "agbench/scoring.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

#include "agbench/error.hpp"

namespace agbench {

using json = nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

}  // namespace

PredictionSet parse_predictions(std::string_view text, std::string model_name) {
  PredictionSet set;
  set.model_name = std::move(model_name);
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  bool first = true;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const auto line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line.rfind("stimulus_id", 0) == 0) continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string_view::npos) {
      throw FormatError("predictions line " + std::to_string(line_no) + ": expected 2 columns");
    }
    const auto id = trim(line.substr(0, comma));
    const auto cls = trim(line.substr(comma + 1));
    std::uint32_t fine = 0;
    const auto [ptr, ec] = std::from_chars(cls.data(), cls.data() + cls.size(), fine);
    if (id.empty() || ec != std::errc{} || ptr != cls.data() + cls.size()) {
      throw FormatError("predictions line " + std::to_string(line_no) + ": malformed row");
    }
    if (!seen.emplace(id).second) {
      throw FormatError("predictions: duplicate stimulus id " + std::string(id));
    }
    set.rows.push_back({std::string(id), fine});
  }
  return set;
}

std::optional<std::uint8_t> map_to_16(std::uint32_t fine, const ClassMap& map) {
  if (fine >= kFineClasses) {
    throw ParameterError("fine class " + std::to_string(fine) + " >= 1000");
  }
  return map.entries[fine];
}

ConditionResult score(const PredictionSet& predictions, std::span<const TruthItem> truth,
                      const ClassMap* class_map, std::string dataset, std::string condition) {
  std::unordered_map<std::string_view, std::uint32_t> by_id;
  by_id.reserve(predictions.rows.size());
  for (const auto& row : predictions.rows) by_id.emplace(row.stimulus_id, row.fine_class);

  ConditionResult result;
  result.model_name = predictions.model_name;
  result.dataset = std::move(dataset);
  result.condition = std::move(condition);
  std::vector<std::string> missing;
  for (const auto& item : truth) {
    const auto it = by_id.find(item.stimulus_id);
    if (it == by_id.end()) {
      missing.push_back(item.stimulus_id);
      continue;
    }
    ++result.n;
    if (class_map) {
      const auto coarse = map_to_16(it->second, *class_map);
      if (coarse && *coarse == item.label) ++result.correct;
    } else if (it->second == item.label) {
      ++result.correct;
    }
  }
  if (!missing.empty()) {
    std::string msg = "missing predictions for " + std::to_string(missing.size()) + " stimuli:";
    const std::size_t shown = std::min<std::size_t>(missing.size(), 20);
    for (std::size_t i = 0; i < shown; ++i) msg += " " + missing[i];
    if (shown < missing.size()) msg += " ...";
    throw FormatError(msg);
  }
  return result;
}

std::vector<ConditionResult> score_manifest(const PredictionSet& predictions, const json& manifest,
                                            const ClassMap* class_map) {
  const auto dataset = manifest.at("dataset").get<std::string>();
  std::vector<std::string> order;
  std::map<std::string, std::vector<TruthItem>> truth;
  for (const auto& cond : manifest.at("conditions")) {
    order.push_back(cond.at("key").get<std::string>());
    truth[order.back()];
  }
  for (const auto& item : manifest.at("items")) {
    truth[item.at("condition").get<std::string>()].push_back(
        {item.at("id").get<std::string>(), item.at("label").get<std::uint32_t>()});
  }
  std::vector<ConditionResult> results;
  for (const auto& key : order) {
    results.push_back(score(predictions, truth[key], class_map, dataset, key));
  }
  return results;
}

json results_to_json(const std::vector<ConditionResult>& results, bool class_mapped) {
  json rows = json::array();
  for (const auto& r : results) {
    rows.push_back({{"model", r.model_name},
                    {"dataset", r.dataset},
                    {"condition", r.condition},
                    {"correct", r.correct},
                    {"n", r.n},
                    {"accuracy", r.accuracy()}});
  }
  return {{"results", rows},
          {"class_mapped", class_mapped},
          {"unmapped_policy", "predictions outside the class map count as incorrect"},
          {"random_guess_16", kRandomGuess16}};
}

std::vector<ConditionResult> results_from_json(const json& doc) {
  std::vector<ConditionResult> out;
  for (const auto& r : doc.at("results")) {
    ConditionResult c;
    c.model_name = r.at("model").get<std::string>();
    c.dataset = r.value("dataset", "");
    c.condition = r.value("condition", "");
    c.correct = r.at("correct").get<std::uint64_t>();
    c.n = r.at("n").get<std::uint64_t>();
    if (c.correct > c.n) throw FormatError("results: correct exceeds n for " + c.model_name);
    out.push_back(std::move(c));
  }
  return out;
}

Summary summarize(const std::vector<ConditionResult>& results, double bin_width) {
  if (!(bin_width > 0.0 && bin_width <= 1.0)) {
    throw ParameterError("bin width must lie in (0,1]");
  }
  const double inv = 1.0 / bin_width;
  const auto bins = static_cast<std::uint64_t>(std::llround(inv));
  if (std::abs(inv - static_cast<double>(bins)) > 1e-9 * inv) {
    throw ParameterError("bin width must divide 1 evenly");
  }
  Summary summary;
  summary.bin_width = bin_width;
  std::map<std::pair<std::string, std::string>, std::size_t> slot;
  for (const auto& r : results) {
    const auto key = std::make_pair(r.dataset, r.condition);
    auto [it, inserted] = slot.emplace(key, summary.histograms.size());
    if (inserted) {
      summary.histograms.push_back({r.dataset, r.condition, std::vector<std::uint64_t>(bins, 0)});
    }
    if (r.n == 0) throw ParameterError("summarize: result with n = 0 for " + r.model_name);
    // floor(accuracy / width) == floor(correct * bins / n), exactly.
    const std::uint64_t bin = std::min(bins - 1, r.correct * bins / r.n);
    ++summary.histograms[it->second].counts[bin];
  }
  return summary;
}

json summary_to_json(const Summary& summary) {
  json hists = json::array();
  for (const auto& h : summary.histograms) {
    std::uint64_t total = 0;
    for (auto c : h.counts) total += c;
    hists.push_back({{"dataset", h.dataset},
                     {"condition", h.condition},
                     {"counts", h.counts},
                     {"total", total}});
  }
  const auto bins = static_cast<std::size_t>(std::llround(1.0 / summary.bin_width));
  json edges = json::array();
  for (std::size_t k = 0; k <= bins; ++k) edges.push_back(static_cast<double>(k) / static_cast<double>(bins));
  return {{"bin_width", summary.bin_width},
          {"bin_edges", edges},
          {"edge_rule", "a value on a bin edge is counted in the higher bin; 1.0 is in the last bin"},
          {"random_guess", kRandomGuess16},
          {"histograms", hists}};
}

std::vector<std::string> outliers(const std::vector<ConditionResult>& results, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw ParameterError("outlier threshold must lie in (0,1)");
  }
  std::vector<std::string> names;
  for (const auto& r : results) {
    if (r.accuracy() > threshold &&
        std::find(names.begin(), names.end(), r.model_name) == names.end()) {
      names.push_back(r.model_name);
    }
  }
  return names;
}

}  // namespace agbench
