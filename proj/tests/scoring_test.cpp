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

#include <gtest/gtest.h>

#include <random>

#include "agbench/error.hpp"
#include "agbench/scoring.hpp"
#include "test_support.hpp"

namespace agbench {
namespace {

ClassMap small_map() {
  return load_class_map("fine_index,category\n207,dog\n404,airplane\n281,cat\n");
}

PredictionSet preds(const std::string& model, const std::vector<std::pair<std::string, std::uint32_t>>& rows) {
  PredictionSet p;
  p.model_name = model;
  for (const auto& [id, c] : rows) p.rows.push_back({id, c});
  return p;
}

ConditionResult result(const std::string& model, const std::string& cond, std::uint64_t correct,
                       std::uint64_t n) {
  return {model, "silhouettes", cond, correct, n};
}

TEST(MapTo16, Cases) {
  const auto map = small_map();
  EXPECT_EQ(map_to_16(207, map), std::optional<std::uint8_t>(10));
  EXPECT_EQ(map_to_16(404, map), std::optional<std::uint8_t>(0));
  EXPECT_FALSE(map_to_16(0, map).has_value());
  EXPECT_FALSE(map_to_16(999, map).has_value());
  EXPECT_THROW(map_to_16(1000, map), ParameterError);
}

TEST(Score, AllCorrectAndAllWrong) {
  const std::vector<TruthItem> truth{{"a", 10}, {"b", 0}};
  const auto map = small_map();
  const auto good = score(preds("m", {{"a", 207}, {"b", 404}}), truth, &map);
  EXPECT_EQ(good.correct, 2u);
  EXPECT_DOUBLE_EQ(good.accuracy(), 1.0);
  const auto bad = score(preds("m", {{"a", 404}, {"b", 5}}), truth, &map);
  EXPECT_EQ(bad.correct, 0u);
  EXPECT_EQ(bad.n, 2u);
}

TEST(Score, UnmappedFineClassesAreIncorrect) {
  const std::vector<TruthItem> truth{{"a", 0}};
  const auto map = small_map();
  EXPECT_EQ(score(preds("m", {{"a", 1}}), truth, &map).correct, 0u);
}

TEST(Score, DirectLabelsWithoutMap) {
  const std::vector<TruthItem> truth{{"x", 3}, {"y", 7}};
  const auto r = score(preds("m", {{"x", 3}, {"y", 1}, {"extra", 9}}), truth, nullptr, "mnist", "h_4");
  EXPECT_EQ(r.correct, 1u);
  EXPECT_EQ(r.n, 2u);
  EXPECT_EQ(r.condition, "h_4");
}

TEST(Score, UniformRandomDigitsNearTenPercent) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::uint32_t> digit(0, 9);
  std::vector<TruthItem> truth;
  PredictionSet p;
  for (int i = 0; i < 10000; ++i) {
    const auto id = std::to_string(i);
    truth.push_back({id, digit(rng)});
    p.rows.push_back({id, digit(rng)});
  }
  EXPECT_NEAR(score(p, truth, nullptr).accuracy(), 0.10, 0.01);
}

TEST(Score, MissingIdsAreListed) {
  const std::vector<TruthItem> truth{{"a", 0}, {"b", 0}, {"c", 0}};
  try {
    score(preds("m", {{"a", 0}}), truth, nullptr);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find(" b"), std::string::npos);
    EXPECT_NE(what.find(" c"), std::string::npos);
  }
}

TEST(Score, PermutationInvariant) {
  std::mt19937_64 rng(4);
  std::vector<TruthItem> truth;
  PredictionSet p;
  for (int i = 0; i < 200; ++i) {
    truth.push_back({"s" + std::to_string(i), static_cast<std::uint32_t>(rng() % 16)});
    p.rows.push_back({"s" + std::to_string(i), static_cast<std::uint32_t>(rng() % 16)});
  }
  const auto base = score(p, truth, nullptr);
  for (int k = 0; k < 5; ++k) {
    std::shuffle(p.rows.begin(), p.rows.end(), rng);
    std::shuffle(truth.begin(), truth.end(), rng);
    const auto r = score(p, truth, nullptr);
    EXPECT_EQ(r.correct, base.correct);
    EXPECT_EQ(r.n, base.n);
  }
}

TEST(Score, ManifestPerCondition) {
  nlohmann::json m;
  m["dataset"] = "mnist";
  m["conditions"] = {{{"key", "h_2"}}, {{"key", "h_4"}}};
  m["items"] = {{{"id", "h_2/0"}, {"condition", "h_2"}, {"label", 1}},
                {{"id", "h_4/0"}, {"condition", "h_4"}, {"label", 1}}};
  const auto r = score_manifest(preds("m", {{"h_2/0", 1}, {"h_4/0", 2}}), m, nullptr);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].correct, 1u);
  EXPECT_EQ(r[1].correct, 0u);
  EXPECT_EQ(r[1].condition, "h_4");
}

TEST(Results, JsonRoundTrip) {
  const std::vector<ConditionResult> rs{result("a", "h_4", 3, 160), result("b", "v_8", 0, 160)};
  const auto doc = results_to_json(rs, true);
  EXPECT_EQ(doc["random_guess_16"], 0.0625);
  const auto back = results_from_json(doc);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].model_name, "a");
  EXPECT_EQ(back[0].correct, 3u);
  auto bad = doc;
  bad["results"][0]["correct"] = 200;
  EXPECT_THROW(results_from_json(bad), FormatError);
}

TEST(Summarize, EmptyInput) {
  EXPECT_TRUE(summarize({}, 0.05).histograms.empty());
}

TEST(Summarize, AllEqualFallIntoOneBin) {
  std::vector<ConditionResult> rs;
  for (int i = 0; i < 7; ++i) rs.push_back(result("m" + std::to_string(i), "h_4", 10, 160));
  const auto s = summarize(rs, 0.05);
  ASSERT_EQ(s.histograms.size(), 1u);
  ASSERT_EQ(s.histograms[0].counts.size(), 20u);
  EXPECT_EQ(s.histograms[0].counts[1], 7u);  // 0.0625 lies in [0.05, 0.10)
}

TEST(Summarize, EdgeValuesGoToHigherBin) {
  const auto s = summarize({result("a", "h_4", 8, 160), result("b", "h_4", 160, 160),
                            result("c", "h_4", 0, 160)},
                           0.05);
  const auto& c = s.histograms[0].counts;
  EXPECT_EQ(c[1], 1u);   // 0.05 exactly
  EXPECT_EQ(c[19], 1u);  // 1.0 is in the last bin
  EXPECT_EQ(c[0], 1u);
}

TEST(Summarize, CountsSumToModelsPerCondition) {
  std::mt19937_64 rng(5);
  std::vector<ConditionResult> rs;
  for (int m = 0; m < 60; ++m) {
    for (const char* cond : {"h_4", "v_6", "ul_8"}) {
      rs.push_back(result("m" + std::to_string(m), cond, rng() % 161, 160));
    }
  }
  const auto s = summarize(rs, 0.1);
  ASSERT_EQ(s.histograms.size(), 3u);
  for (const auto& h : s.histograms) {
    EXPECT_EQ(h.counts.size(), 10u);
    std::uint64_t total = 0;
    for (auto c : h.counts) total += c;
    EXPECT_EQ(total, 60u);
  }
  EXPECT_EQ(summary_to_json(s)["bin_edges"].size(), 11u);
}

TEST(Summarize, BadBinWidth) {
  EXPECT_THROW(summarize({}, 0.0), ParameterError);
  EXPECT_THROW(summarize({}, 0.3), ParameterError);
  EXPECT_THROW(summarize({result("a", "h_4", 0, 0)}, 0.05), ParameterError);
}

TEST(Outliers, AnyConditionAboveThreshold) {
  const std::vector<ConditionResult> rs{result("a", "h_4", 10, 160), result("a", "h_6", 40, 160),
                                        result("b", "h_4", 32, 160), result("c", "h_4", 33, 160)};
  EXPECT_EQ(outliers(rs), (std::vector<std::string>{"a", "c"}));  // 32/160 is exactly 0.20
  EXPECT_TRUE(outliers({}).empty());
}

TEST(Predictions, ParseCsv) {
  const auto p = parse_predictions("stimulus_id,fine_class\nh_4/0,207\r\n\nh_4/1, 12\n", "rn50");
  ASSERT_EQ(p.rows.size(), 2u);
  EXPECT_EQ(p.rows[1].fine_class, 12u);
  EXPECT_EQ(p.model_name, "rn50");
  EXPECT_EQ(parse_predictions("a,1\n", "m").rows.size(), 1u);
  EXPECT_THROW(parse_predictions("a,1\na,2\n", "m"), FormatError);
  EXPECT_THROW(parse_predictions("a;1\n", "m"), FormatError);
  EXPECT_THROW(parse_predictions("a,x\n", "m"), FormatError);
}

}  // namespace
}  // namespace agbench
