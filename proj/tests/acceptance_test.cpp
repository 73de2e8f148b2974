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

// Acceptance suite. One line per criterion, exit status 1 if any fails.
// Links only the core library; the study service is not needed here.

#include <chrono>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>

#include "agbench/benchgen.hpp"
#include "agbench/dataset_io.hpp"
#include "agbench/grating.hpp"
#include "agbench/probe.hpp"
#include "agbench/scoring.hpp"
#include "test_support.hpp"

namespace agbench {
namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome oracle_equivalence() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20260101);
  std::vector<GrayImage> digits;
  for (int i = 0; i < 200; ++i) digits.push_back(testing::synthetic_digit(rng));
  std::size_t mismatches = 0, pixels = 0;
  for (const auto& d : digits) {
    for (auto dir : kAllDirections) {
      for (int interval : {2, 4, 6, 8}) {
        GratingSpec spec;
        spec.direction = dir;
        spec.interval = interval;
        const auto out = apply_abutting_grating(d, spec);
        const auto expect = testing::oracle_corrupt(d, dir, interval);
        for (std::size_t p = 0; p < expect.size(); ++p) mismatches += out.pixels()[p] != expect[p];
        pixels += expect.size();
      }
    }
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && secs < 10.0,
          fmt("%zu mismatching of %zu pixels, %.2f s (limit 10 s)", mismatches, pixels, secs)};
}

Outcome protocol_constants() {
  std::ostringstream why;
  bool ok = true;
  auto check = [&](bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      why << what << "; ";
    }
  };
  const auto mnist = testing::synthetic_mnist(1, 1);
  const auto m = generate(mnist, ConditionGrid::defaults(DatasetKind::kMnist),
                          GenerateOptions::defaults(DatasetKind::kMnist), {});
  check(m["conditions"].size() == 4, "mnist set count");
  std::set<int> mi;
  for (const auto& c : m["conditions"]) {
    check(c["direction"] == "h", "mnist direction");
    mi.insert(c["interval"].get<int>());
  }
  check(mi == std::set<int>{2, 4, 6, 8}, "mnist intervals");

  const auto h = generate(mnist, ConditionGrid::defaults(DatasetKind::kMnistHires),
                          GenerateOptions::defaults(DatasetKind::kMnistHires), {});
  std::set<std::pair<std::string, int>> hc;
  for (const auto& c : h["conditions"]) hc.insert({c["direction"].get<std::string>(), c["interval"].get<int>()});
  check(hc.size() == 16, "hires condition count");
  for (const char* d : {"h", "v", "ul", "ur"})
    for (int i : {4, 8, 16, 32}) check(hc.count({d, i}) == 1, "hires grid");
  check(h["items"][0]["width"] == 224 && h["items"][0]["height"] == 224, "hires size");

  const auto sil = testing::synthetic_silhouettes(10, 2, 32);
  const auto s = generate(sil, ConditionGrid::defaults(DatasetKind::kSilhouettes),
                          GenerateOptions::defaults(DatasetKind::kSilhouettes), {});
  check(sil.size() == 160, "silhouette source size");
  check(s["conditions"].size() == 24, "silhouette condition count");
  check(s["stimulus_count"] == 3840 && s["items"].size() == 3840, "silhouette stimulus count");
  return {ok, ok ? fmt("mnist 4 sets, hires %zu sets, silhouettes %zu conditions / %zu stimuli",
                       hc.size(), s["conditions"].size(), s["items"].size())
                 : why.str()};
}

Outcome mask_phase_properties() {
  std::mt19937_64 rng(7);
  std::size_t violations = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto img = testing::random_image(rng, 4 + rng() % 60, 4 + rng() % 60);
    GratingSpec spec;
    spec.direction = kAllDirections[rng() % 4];
    spec.interval = 2 * static_cast<int>(1 + rng() % 16);
    spec.figure_phase = static_cast<int>(rng() % spec.interval);
    const bool dark = rng() % 2;
    violations += spec.figure_phase == spec.background_phase();
    const auto masks = binarize(img, spec.threshold, dark);
    for (std::size_t y = 0; y < img.height(); ++y)
      for (std::size_t x = 0; x < img.width(); ++x)
        violations += masks.figure(x, y) == masks.background(x, y);
    const auto out = compose_abutting_grating(masks, spec);
    for (float v : out.pixels()) violations += !(v == 0.0f || v == 1.0f);
  }
  return {violations == 0, fmt("%zu violations over 1000 images", violations)};
}

Outcome local_edge_destruction() {
  const auto t0 = Clock::now();
  const auto sil = testing::synthetic_silhouettes(10, 3, 224);
  const auto grid = ConditionGrid::defaults(DatasetKind::kSilhouettes);
  const auto opts = GenerateOptions::defaults(DatasetKind::kSilhouettes);
  std::vector<MaskPair> masks;
  for (const auto& item : sil.items) masks.push_back(binarize(item.image, opts.threshold, true));
  std::size_t violations = 0, pairs = 0, stimuli = 0;
  generate(sil, grid, opts, [&](const Condition& c, std::size_t index, std::uint32_t, const GrayImage& out) {
    if (c.interval < 4) return;
    ++stimuli;
    const auto& m = masks[index];
    const int bg_phase = c.interval / 2;
    auto on_line = [&](std::size_t x, std::size_t y) {
      long pos = testing::oracle_axis_position(static_cast<long>(x), static_cast<long>(y), c.direction);
      pos = ((pos % c.interval) + c.interval) % c.interval;
      return pos == (m.figure(x, y) ? 0 : bg_phase);
    };
    for (std::size_t y = 0; y < out.height(); ++y) {
      for (std::size_t x = 0; x < out.width(); ++x) {
        for (auto [qx, qy] : {std::pair{x + 1, y}, std::pair{x, y + 1}}) {
          if (qx >= out.width() || qy >= out.height()) continue;
          if (m.figure(x, y) == m.figure(qx, qy)) continue;
          if (on_line(x, y) || on_line(qx, qy)) continue;
          ++pairs;
          violations += out.at(x, y) != out.at(qx, qy);
        }
      }
    }
  });
  return {violations == 0 && stimuli == 3840 && pairs > 0,
          fmt("%zu violations over %zu boundary pairs in %zu stimuli, %.2f s", violations, pairs,
              stimuli, seconds_since(t0))};
}

Outcome tensor_oracles() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(99);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t c = 1 + rng() % 4, o = 1 + rng() % 6, k = 1 + rng() % 7;
    const std::size_t h = k + rng() % 12, w = k + rng() % 12;
    const std::size_t stride = 1 + rng() % 2, pad = rng() % ((k + 1) / 2 + 1);
    const auto x = testing::random_tensor(rng, {c, h, w});
    const auto wt = testing::random_tensor(rng, {o, c, k, k});
    std::size_t oh = 0, ow = 0;
    const auto expect = testing::oracle_conv(x, wt, stride, pad, oh, ow);
    const auto y = conv2d(x, wt, stride, pad);
    if (y.dim(1) != oh || y.dim(2) != ow) return {false, "conv output shape differs from oracle"};
    for (std::size_t i = 0; i < expect.size(); ++i) worst = std::max(worst, std::abs(y.data()[i] - expect[i]));

    BatchNormParams bn;
    std::uniform_real_distribution<float> u(-1.0f, 1.0f), pos(0.05f, 3.0f);
    for (std::size_t ch = 0; ch < o; ++ch) {
      bn.gamma.push_back(u(rng));
      bn.beta.push_back(u(rng));
      bn.mean.push_back(u(rng));
      bn.var.push_back(pos(rng));
    }
    const auto z = batch_norm(y, bn);
    const auto r = relu(z);
    for (std::size_t ch = 0; ch < o; ++ch) {
      for (std::size_t i = 0; i < oh * ow; ++i) {
        const std::size_t idx = ch * oh * ow + i;
        const double bn_ref = bn.gamma[ch] * (static_cast<double>(y.data()[idx]) - bn.mean[ch]) /
                                  std::sqrt(static_cast<double>(bn.var[ch]) + 1e-5) +
                              bn.beta[ch];
        worst = std::max(worst, std::abs(z.data()[idx] - bn_ref));
        worst = std::max(worst, std::abs(r.data()[idx] - std::max(0.0, static_cast<double>(z.data()[idx]))));
      }
    }
    if (oh >= 2 && ow >= 2) {
      std::size_t ph = 0, pw = 0;
      const auto pexp = testing::oracle_pool(r, 3, 2, 1, ph, pw);
      const auto p = max_pool(r, 3, 2, 1);
      for (std::size_t i = 0; i < pexp.size(); ++i) worst = std::max(worst, std::abs(p.data()[i] - pexp[i]));
    }
  }
  // Shape chain of the reference stem.
  WeightBundle b;
  b.conv_weights = testing::random_tensor(rng, {64, 3, 7, 7}, -0.05f, 0.05f);
  b.bn = {std::vector<float>(64, 1.0f), std::vector<float>(64, 0.0f), std::vector<float>(64, 0.0f),
          std::vector<float>(64, 1.0f)};
  const auto stem = run_stem(to_input_tensor(GrayImage(224, 224, 0.5f)), b);
  const bool chain = stem.conv.shape() == std::vector<std::size_t>{64, 112, 112} &&
                     stem.pool.shape() == std::vector<std::size_t>{64, 56, 56};
  const double secs = seconds_since(t0);
  return {worst <= 1e-6 && chain && secs < 30.0,
          fmt("max abs error %.3g (limit 1e-6), stem %s -> %s -> %s, %.2f s (limit 30 s)", worst,
              "3x224x224", stem.conv.shape_string().c_str(), stem.pool.shape_string().c_str(), secs)};
}

Outcome random_guess() {
  // One fine class per coarse category, so a uniform 16-way guess maps 1:1.
  std::string table = "fine_index,category\n";
  for (int c = 0; c < 16; ++c) table += std::to_string(c * 50) + "," + coarse_category_names()[c] + "\n";
  const auto map = load_class_map(table);
  std::vector<TruthItem> truth;
  for (std::uint32_t c = 0; c < 16; ++c)
    for (int i = 0; i < 10; ++i) truth.push_back({"v_6/" + std::to_string(truth.size()), c});
  std::mt19937_64 rng(2024);
  double sum = 0.0;
  for (int set = 0; set < 100; ++set) {
    PredictionSet p;
    p.model_name = "random" + std::to_string(set);
    for (const auto& t : truth) p.rows.push_back({t.stimulus_id, static_cast<std::uint32_t>((rng() % 16) * 50)});
    sum += score(p, truth, &map).accuracy();
  }
  const double mean = sum / 100.0;
  return {std::abs(mean - kRandomGuess16) <= 0.01,
          fmt("mean accuracy %.5f over 100 sets x 160 stimuli (target 0.0625 +/- 0.01)", mean)};
}

Outcome human_subsets() {
  const auto ds = testing::synthetic_mnist(50, 5);
  const auto a = sample_human_subset(ds, 1001);
  const auto again = sample_human_subset(ds, 1001);
  const std::vector<std::uint64_t> seeds{1001, 1002};
  const auto pair = sample_disjoint_subsets(ds, seeds);
  bool ok = a.data.size() == 100 && a.source_indices == again.source_indices &&
            pair[0].source_indices == a.source_indices;
  std::vector<int> counts(10, 0);
  for (const auto& item : a.data.items) ++counts[item.label];
  for (int c : counts) ok = ok && c == 10;
  std::set<std::size_t> first(pair[0].source_indices.begin(), pair[0].source_indices.end());
  std::size_t overlap = 0;
  for (auto i : pair[1].source_indices) overlap += first.count(i);
  ok = ok && overlap == 0 && pair[1].data.size() == 100;
  return {ok, fmt("100 items, 10 per digit, deterministic, %zu shared items across two draws", overlap)};
}

Outcome end_stopping_sanity() {
  GrayImage img(64, 64, 0.0f);
  for (std::size_t y = 16; y < 48; ++y)
    for (std::size_t x = 20; x < 44; ++x) img.at(x, y) = 1.0f;
  bool ok = true;
  std::string detail;
  for (auto dir : kAllDirections) {
    GratingSpec spec;
    spec.direction = dir;
    spec.interval = 6;
    const auto masks = binarize(img, 0.5f);
    // Oracle for line ends: a line pixel whose neighbour along the line lies
    // in the other region.
    long dx = 1, dy = 0;
    if (dir == Direction::kVertical) dx = 0, dy = 1;
    if (dir == Direction::kDiagUL) dx = 1, dy = 1;
    if (dir == Direction::kDiagUR) dx = 1, dy = -1;
    GrayImage lit(64, 64, 0.0f);
    for (long y = 0; y < 64; ++y) {
      for (long x = 0; x < 64; ++x) {
        const bool fig = masks.figure(x, y);
        long pos = testing::oracle_axis_position(x, y, dir);
        pos = ((pos % 6) + 6) % 6;
        if (pos != (fig ? 0 : 3)) continue;
        for (long s : {-1L, 1L}) {
          const long nx = x + s * dx, ny = y + s * dy;
          if (nx >= 0 && ny >= 0 && nx < 64 && ny < 64 && masks.figure(nx, ny) != fig) lit.at(x, y) = 0.6f;
        }
      }
    }
    const double ends = end_stopping_score(lit, spec, masks);
    const double uniform = end_stopping_score(GrayImage(64, 64, 0.37f), spec, masks);
    GrayImage shifted = lit;
    for (auto& v : shifted.pixels()) v += 0.25f;
    const double moved = end_stopping_score(shifted, spec, masks);
    ok = ok && ends > 0.0 && std::abs(uniform) < 1e-12 && std::abs(moved - ends) < 1e-6;
    detail += fmt("%s: ends %.3f uniform %.1g shifted %.3f; ", std::string(short_name(dir)).c_str(),
                  ends, uniform, moved);
  }
  return {ok, detail};
}

Outcome round_trips() {
  std::mt19937_64 rng(31);
  std::size_t diffs = 0;
  LabeledDataset ds;
  ds.class_names = digit_class_names();
  for (int i = 0; i < 50; ++i) ds.items.push_back({testing::random_image(rng, 28, 28), static_cast<std::uint32_t>(i % 10)});
  const auto idx = write_idx(ds);
  const auto back = parse_idx_dataset(idx.images, idx.labels);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto a = ds.items[i].image.to_bytes(), b = back.items[i].image.to_bytes();
    for (std::size_t p = 0; p < a.size(); ++p) diffs += a[p] != b[p];
    diffs += ds.items[i].label != back.items[i].label;
  }
  const auto idx2 = write_idx(back);
  diffs += idx2.images != idx.images || idx2.labels != idx.labels;

  std::size_t png_diffs = 0;
  for (int i = 0; i < 50; ++i) {
    const auto img = testing::random_image(rng, 1 + rng() % 100, 1 + rng() % 100);
    const auto a = img.to_bytes(), b = load_png_gray(write_png_gray(img)).to_bytes();
    for (std::size_t p = 0; p < a.size(); ++p) png_diffs += a[p] != b[p];
  }

  WeightBundle wb;
  wb.conv_weights = testing::random_tensor(rng, {64, 3, 7, 7});
  for (int c = 0; c < 64; ++c) {
    wb.bn.gamma.push_back(static_cast<float>(rng() % 1000) / 997.0f);
    wb.bn.beta.push_back(-static_cast<float>(rng() % 1000) / 991.0f);
    wb.bn.mean.push_back(static_cast<float>(rng() % 1000) / 983.0f);
    wb.bn.var.push_back(0.01f + static_cast<float>(rng() % 1000) / 977.0f);
  }
  const auto enc = write_weight_bundle(wb);
  const auto enc2 = write_weight_bundle(load_weight_bundle(enc.manifest, enc.blob));
  std::size_t bundle_diffs = enc.blob.size() != enc2.blob.size() || enc.manifest != enc2.manifest;
  for (std::size_t i = 0; i < std::min(enc.blob.size(), enc2.blob.size()); ++i) bundle_diffs += enc.blob[i] != enc2.blob[i];

  return {diffs == 0 && png_diffs == 0 && bundle_diffs == 0,
          fmt("byte differences: idx %zu, png %zu, weight bundle %zu", diffs, png_diffs, bundle_diffs)};
}

}  // namespace
}  // namespace agbench

int main() {
  using namespace agbench;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"corruption-oracle-equivalence", oracle_equivalence},
      {"protocol-constants", protocol_constants},
      {"mask-phase-properties", mask_phase_properties},
      {"local-edge-destruction", local_edge_destruction},
      {"tensor-op-oracles", tensor_oracles},
      {"random-guess-scoring", random_guess},
      {"human-subset-sampling", human_subsets},
      {"end-stopping-sanity", end_stopping_sanity},
      {"round-trips", round_trips},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %-32s %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
  return failed == 0 ? 0 : 1;
}
