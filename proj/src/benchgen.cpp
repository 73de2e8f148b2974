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

#include "agbench/benchgen.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <set>

#include "agbench/dataset_io.hpp"
#include "agbench/error.hpp"
#include "agbench/parallel.hpp"
#include "agbench/random.hpp"

namespace agbench {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string_view to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::kMnist: return "mnist";
    case DatasetKind::kMnistHires: return "mnist-hires";
    case DatasetKind::kSilhouettes: return "silhouettes";
  }
  return "?";
}

std::optional<DatasetKind> parse_dataset_kind(std::string_view s) {
  for (auto k : {DatasetKind::kMnist, DatasetKind::kMnistHires, DatasetKind::kSilhouettes}) {
    if (s == to_string(k)) return k;
  }
  if (s == "mnist_hires") return DatasetKind::kMnistHires;
  return std::nullopt;
}

std::string Condition::key() const {
  return std::string(short_name(direction)) + "_" + std::to_string(interval);
}

std::optional<Condition> Condition::parse(std::string_view key) {
  const auto us = key.rfind('_');
  if (us == std::string_view::npos) return std::nullopt;
  const auto dir = parse_direction(key.substr(0, us));
  if (!dir) return std::nullopt;
  const auto num = key.substr(us + 1);
  int interval = 0;
  const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), interval);
  if (ec != std::errc{} || ptr != num.data() + num.size()) return std::nullopt;
  return Condition{*dir, interval};
}

ConditionGrid ConditionGrid::defaults(DatasetKind kind) {
  const std::vector<Direction> all(kAllDirections.begin(), kAllDirections.end());
  switch (kind) {
    case DatasetKind::kMnist: return {kind, {Direction::kHorizontal}, {2, 4, 6, 8}};
    case DatasetKind::kMnistHires: return {kind, all, {4, 8, 16, 32}};
    case DatasetKind::kSilhouettes: return {kind, all, {4, 6, 8, 10, 12, 14}};
  }
  return {};
}

std::vector<Condition> ConditionGrid::conditions() const {
  std::vector<Condition> out;
  for (auto d : directions) {
    for (int i : intervals) out.push_back({d, i});
  }
  return out;
}

GenerateOptions GenerateOptions::defaults(DatasetKind kind) {
  GenerateOptions opts;
  if (kind == DatasetKind::kMnistHires) opts.interpolation = Interpolation{};
  if (kind == DatasetKind::kSilhouettes) opts.figure_is_dark = true;
  return opts;
}

std::string stimulus_path(DatasetKind kind, const Condition& condition, std::size_t index,
                          std::uint32_t label) {
  return std::string(to_string(kind)) + "/" + condition.key() + "/" + std::to_string(index) +
         "_" + std::to_string(label) + ".png";
}

std::string stimulus_id(const Condition& condition, std::size_t index) {
  return condition.key() + "/" + std::to_string(index);
}

namespace {

constexpr std::size_t kChunk = 256;

GratingSpec spec_for(const Condition& c, const GenerateOptions& options) {
  GratingSpec spec;
  spec.direction = c.direction;
  spec.interval = c.interval;
  spec.threshold = options.threshold;
  spec.figure_phase = options.figure_phase;
  spec.polarity = options.polarity;
  return spec;
}

json parameters_json(const GenerateOptions& options) {
  json p = {{"threshold", options.threshold},
            {"figure_phase", options.figure_phase},
            {"phase_convention", "background_phase = (figure_phase + interval/2) mod interval"},
            {"line_width", 1},
            {"polarity", std::string(to_string(options.polarity))},
            {"figure_is_dark", options.figure_is_dark},
            {"binarize", "strict comparison; pixels equal to threshold are background"}};
  if (options.interpolation) {
    p["interpolation"] = {{"width", options.interpolation->width},
                          {"height", options.interpolation->height},
                          {"kernel", std::string(to_string(options.interpolation->kernel))},
                          {"alignment", "corner"}};
  } else {
    p["interpolation"] = nullptr;
  }
  return p;
}

}  // namespace

json generate(const LabeledDataset& dataset, const ConditionGrid& grid,
              const GenerateOptions& options, const StimulusSink& sink) {
  if (dataset.empty()) throw ParameterError("generate: dataset is empty");
  dataset.validate();
  const auto conditions = grid.conditions();
  std::vector<GratingSpec> specs;
  for (const auto& c : conditions) {
    specs.push_back(spec_for(c, options));
    specs.back().validate_for_composition();
  }
  if (options.interpolation) {
    const auto& first = dataset.items.front().image;
    if (options.interpolation->width < first.width() ||
        options.interpolation->height < first.height()) {
      throw ParameterError("generate: interpolation target smaller than source images");
    }
  }

  const std::size_t n = dataset.size();
  std::vector<json> entries(conditions.size());
  for (auto& e : entries) e = json::array();

  std::vector<MaskPair> masks;
  std::vector<GrayImage> outputs;
  std::vector<std::string> hashes;
  for (std::size_t begin = 0; begin < n; begin += kChunk) {
    const std::size_t end = std::min(n, begin + kChunk);
    const std::size_t count = end - begin;
    masks.assign(count, MaskPair{});
    parallel_for(count, [&](std::size_t k) {
      const auto& src = dataset.items[begin + k].image;
      if (options.interpolation) {
        const auto up = upsample(src, options.interpolation->width, options.interpolation->height,
                                 options.interpolation->kernel);
        masks[k] = binarize(up, options.threshold, options.figure_is_dark);
      } else {
        masks[k] = binarize(src, options.threshold, options.figure_is_dark);
      }
    });

    for (std::size_t ci = 0; ci < conditions.size(); ++ci) {
      outputs.assign(count, GrayImage{});
      hashes.assign(count, std::string{});
      parallel_for(count, [&](std::size_t k) {
        outputs[k] = compose_abutting_grating(masks[k], specs[ci]);
        hashes[k] = content_hash(outputs[k]);
      });
      for (std::size_t k = 0; k < count; ++k) {
        const std::size_t index = begin + k;
        const auto label = dataset.items[index].label;
        if (sink) sink(conditions[ci], index, label, outputs[k]);
        entries[ci].push_back({{"id", stimulus_id(conditions[ci], index)},
                               {"condition", conditions[ci].key()},
                               {"direction", std::string(short_name(conditions[ci].direction))},
                               {"interval", conditions[ci].interval},
                               {"figure_phase", specs[ci].figure_phase},
                               {"background_phase", specs[ci].background_phase()},
                               {"index", index},
                               {"label", label},
                               {"file", stimulus_path(grid.dataset, conditions[ci], index, label)},
                               {"width", outputs[k].width()},
                               {"height", outputs[k].height()},
                               {"sha256", hashes[k]}});
      }
    }
  }

  json manifest;
  manifest["tool"] = "agbench";
  manifest["manifest_version"] = 1;
  manifest["dataset"] = std::string(to_string(grid.dataset));
  manifest["source"] = dataset.source;
  manifest["provenance"] = options.provenance;
  manifest["class_names"] = dataset.class_names;
  manifest["parameters"] = parameters_json(options);
  json conds = json::array();
  json items = json::array();
  for (std::size_t ci = 0; ci < conditions.size(); ++ci) {
    conds.push_back({{"key", conditions[ci].key()},
                     {"direction", std::string(short_name(conditions[ci].direction))},
                     {"interval", conditions[ci].interval},
                     {"count", entries[ci].size()},
                     {"path", std::string(to_string(grid.dataset)) + "/" + conditions[ci].key()}});
    for (auto& e : entries[ci]) items.push_back(std::move(e));
  }
  manifest["conditions"] = std::move(conds);
  manifest["stimulus_count"] = items.size();
  manifest["items"] = std::move(items);
  return manifest;
}

GeneratedBenchmark generate_in_memory(const LabeledDataset& dataset, const ConditionGrid& grid,
                                      const GenerateOptions& options) {
  GeneratedBenchmark out;
  const auto conditions = grid.conditions();
  for (const auto& c : conditions) {
    LabeledDataset ds;
    ds.class_names = dataset.class_names;
    ds.source = dataset.source + " [" + std::string(to_string(grid.dataset)) + " " + c.key() + "]";
    ds.items.resize(dataset.size());
    out.conditions.push_back({c, std::move(ds)});
  }
  out.manifest = generate(dataset, grid, options,
                          [&](const Condition& c, std::size_t index, std::uint32_t label,
                              const GrayImage& image) {
                            const auto it = std::find(conditions.begin(), conditions.end(), c);
                            auto& slot = out.conditions[static_cast<std::size_t>(
                                                            it - conditions.begin())]
                                             .data.items[index];
                            slot.image = image;
                            slot.label = label;
                          });
  return out;
}

json generate_to_directory(const LabeledDataset& dataset, const ConditionGrid& grid,
                           const GenerateOptions& options, const fs::path& out_dir,
                           bool write_idx_files) {
  fs::create_directories(out_dir);
  std::map<std::string, std::pair<std::vector<GrayImage>, std::vector<std::uint32_t>>> idx_sets;
  auto manifest = generate(dataset, grid, options,
                           [&](const Condition& c, std::size_t index, std::uint32_t label,
                               const GrayImage& image) {
                             write_png_file(out_dir / stimulus_path(grid.dataset, c, index, label),
                                            image);
                             if (write_idx_files) {
                               auto& [imgs, lbls] = idx_sets[c.key()];
                               imgs.push_back(image);
                               lbls.push_back(label);
                             }
                           });
  if (write_idx_files) {
    for (auto& cond : manifest["conditions"]) {
      const auto key = cond["key"].get<std::string>();
      const auto& [imgs, lbls] = idx_sets[key];
      const fs::path dir = out_dir / cond["path"].get<std::string>();
      write_file(dir / "images-idx3-ubyte", write_idx_images(imgs));
      write_file(dir / "labels-idx1-ubyte", write_idx_labels(lbls));
      cond["idx"] = {{"images", cond["path"].get<std::string>() + "/images-idx3-ubyte"},
                     {"labels", cond["path"].get<std::string>() + "/labels-idx1-ubyte"}};
    }
  }
  write_text_file(out_dir / "manifest.json", manifest.dump(1));
  return manifest;
}

VerifyReport verify_directory(const fs::path& dir) {
  const auto manifest = json::parse(read_text_file(dir / "manifest.json"));
  VerifyReport report;
  for (const auto& item : manifest.at("items")) {
    const auto id = item.at("id").get<std::string>();
    const fs::path file = dir / item.at("file").get<std::string>();
    ++report.checked;
    if (!fs::exists(file)) {
      report.missing.push_back(id);
      continue;
    }
    if (content_hash(load_png_file(file)) != item.at("sha256").get<std::string>()) {
      report.mismatched.push_back(id);
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Human-study subsets

HumanSubset sample_human_subset(const LabeledDataset& dataset, std::uint64_t seed,
                                std::span<const std::size_t> exclude, std::size_t per_class,
                                std::size_t classes) {
  const std::set<std::size_t> excluded(exclude.begin(), exclude.end());
  std::vector<std::vector<std::size_t>> by_class(classes);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto label = dataset.items[i].label;
    if (label < classes && !excluded.count(i)) by_class[label].push_back(i);
  }
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> picked;
  for (std::size_t c = 0; c < classes; ++c) {
    auto& pool = by_class[c];
    if (pool.size() < per_class) {
      throw ParameterError("sample_human_subset: class " + std::to_string(c) + " has " +
                           std::to_string(pool.size()) + " available items, need " +
                           std::to_string(per_class));
    }
    seeded_shuffle(pool, rng);
    picked.insert(picked.end(), pool.begin(), pool.begin() + static_cast<long>(per_class));
  }
  seeded_shuffle(picked, rng);

  HumanSubset out;
  out.data.class_names = dataset.class_names;
  out.data.source = dataset.source + " [human subset seed " + std::to_string(seed) + "]";
  out.source_indices = picked;
  for (auto i : picked) out.data.items.push_back(dataset.items[i]);
  return out;
}

std::vector<HumanSubset> sample_disjoint_subsets(const LabeledDataset& dataset,
                                                 std::span<const std::uint64_t> seeds,
                                                 std::size_t per_class, std::size_t classes) {
  std::vector<HumanSubset> out;
  std::vector<std::size_t> used;
  for (auto seed : seeds) {
    out.push_back(sample_human_subset(dataset, seed, used, per_class, classes));
    used.insert(used.end(), out.back().source_indices.begin(), out.back().source_indices.end());
  }
  return out;
}

}  // namespace agbench
