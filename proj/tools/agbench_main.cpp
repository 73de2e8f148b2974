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

// agbench: generate abutting-grating benchmarks, score predictions, probe
// convolutional stems and serve the human study.

#include <glob.h>
#include <httplib.h>

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "agbench/benchgen.hpp"
#include "agbench/dataset_io.hpp"
#include "agbench/error.hpp"
#include "agbench/probe.hpp"
#include "agbench/scoring.hpp"
#include "agbench/study.hpp"
#include "agbench/study_http.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace agbench;

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string part;
  while (std::getline(in, part, ',')) {
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

struct GenArgs {
  std::string dataset;
  std::string input;
  std::string directions;
  std::string intervals;
  float threshold = 0.5f;
  int figure_phase = 0;
  std::uint64_t seed = 0;
  std::string out;
  bool idx = false;
  bool figure_is_dark = false;
  bool invert = false;
  std::string kernel = "bilinear";
  std::size_t size = 224;
  std::string split = "test";
  bool human_subset = false;
  std::vector<std::uint64_t> disjoint_from;
};

int run_gen(const GenArgs& a) {
  const auto kind = parse_dataset_kind(a.dataset);
  if (!kind) throw ParameterError("unknown dataset " + a.dataset);

  auto grid = ConditionGrid::defaults(*kind);
  if (!a.directions.empty()) {
    grid.directions.clear();
    for (const auto& d : split_list(a.directions)) {
      const auto dir = parse_direction(d);
      if (!dir) throw ParameterError("unknown direction " + d);
      grid.directions.push_back(*dir);
    }
  }
  if (!a.intervals.empty()) {
    grid.intervals.clear();
    for (const auto& i : split_list(a.intervals)) grid.intervals.push_back(std::stoi(i));
  }

  auto options = GenerateOptions::defaults(*kind);
  options.threshold = a.threshold;
  options.figure_phase = a.figure_phase;
  options.figure_is_dark = options.figure_is_dark || a.figure_is_dark;
  if (a.invert) options.polarity = Polarity::kLinesBlackOnWhite;
  if (options.interpolation) {
    const auto k = parse_kernel(a.kernel);
    if (!k) throw ParameterError("unknown kernel " + a.kernel);
    options.interpolation = Interpolation{a.size, a.size, *k};
  }

  LabeledDataset dataset;
  if (*kind == DatasetKind::kSilhouettes) {
    dataset = load_png_directory(a.input, coarse_category_list());
    options.provenance["input"] = a.input;
  } else {
    const std::string prefix = a.split == "train" ? "train" : "t10k";
    dataset = load_mnist(a.input, prefix);
    options.provenance["split"] = a.split;
    if (a.human_subset) {
      std::vector<std::uint64_t> seeds = a.disjoint_from;
      seeds.push_back(a.seed);
      auto subsets = sample_disjoint_subsets(dataset, seeds);
      options.provenance["human_subset"] = {{"seed", a.seed},
                                            {"disjoint_from_seeds", a.disjoint_from},
                                            {"per_class", 10},
                                            {"source_indices", subsets.back().source_indices}};
      dataset = std::move(subsets.back().data);
    }
  }

  const auto manifest = generate_to_directory(dataset, grid, options, a.out, a.idx);
  std::cout << "wrote " << manifest["stimulus_count"].get<std::size_t>() << " stimuli in "
            << manifest["conditions"].size() << " conditions to " << a.out << "\n";
  return 0;
}

int run_score(const std::string& truth_dir, const std::string& pred_file,
              const std::string& classmap_file, const std::string& out, std::string model) {
  const fs::path truth_path = fs::is_directory(truth_dir) ? fs::path(truth_dir) / "manifest.json"
                                                         : fs::path(truth_dir);
  const auto manifest = json::parse(read_text_file(truth_path));
  if (model.empty()) model = fs::path(pred_file).stem().string();
  const auto predictions = parse_predictions(read_text_file(pred_file), model);
  std::optional<ClassMap> map;
  if (!classmap_file.empty()) map = load_class_map(read_text_file(classmap_file));
  const auto results = score_manifest(predictions, manifest, map ? &*map : nullptr);
  write_text_file(out, results_to_json(results, map.has_value()).dump(2));
  for (const auto& r : results) {
    std::cout << r.dataset << "/" << r.condition << "  " << r.correct << "/" << r.n << "  "
              << r.accuracy() << "\n";
  }
  return 0;
}

int run_summarize(const std::string& pattern, double bin, double outlier_threshold,
                  const std::string& out) {
  glob_t g{};
  std::vector<ConditionResult> results;
  if (::glob(pattern.c_str(), 0, nullptr, &g) == 0) {
    for (std::size_t i = 0; i < g.gl_pathc; ++i) {
      auto part = results_from_json(json::parse(read_text_file(g.gl_pathv[i])));
      results.insert(results.end(), part.begin(), part.end());
    }
  }
  globfree(&g);
  if (results.empty()) throw std::runtime_error("no results matched " + pattern);
  auto doc = summary_to_json(summarize(results, bin));
  doc["result_count"] = results.size();
  doc["outlier_threshold"] = outlier_threshold;
  doc["outliers"] = outliers(results, outlier_threshold);
  write_text_file(out, doc.dump(2));
  std::cout << results.size() << " results, " << doc["outliers"].size() << " outlier models\n";
  return 0;
}

struct ProbeArgs {
  std::string weights;
  std::string image;
  std::string out;
  bool no_norm = false;
  std::string mask_source;
  std::string direction = "h";
  int interval = 0;
  float threshold = 0.5f;
  bool figure_is_dark = false;
};

int run_probe(const ProbeArgs& a) {
  const auto bundle = load_weight_bundle_dir(a.weights);
  const auto stimulus = load_png_file(a.image);
  const auto stem = run_stem(to_input_tensor(stimulus, !a.no_norm), bundle);
  const fs::path out = a.out;
  fs::create_directories(out);

  json report = {{"weights_source", bundle.source},
                 {"stimulus", a.image},
                 {"bn_eps", kDefaultBatchNormEps},
                 {"imagenet_normalized", !a.no_norm},
                 {"average", "signed channel mean, min-max normalized"}};
  const std::pair<const char*, const Tensor*> stages[] = {
      {"conv", &stem.conv}, {"bn", &stem.bn}, {"relu", &stem.relu}, {"pool", &stem.pool}};

  std::optional<MaskPair> masks;
  GratingSpec spec;
  if (!a.mask_source.empty()) {
    const auto dir = parse_direction(a.direction);
    if (!dir) throw ParameterError("unknown direction " + a.direction);
    spec.direction = *dir;
    spec.interval = a.interval;
    spec.threshold = a.threshold;
    auto source = load_png_file(a.mask_source);
    if (source.width() != stimulus.width() || source.height() != stimulus.height()) {
      source = upsample(source, stimulus.width(), stimulus.height());
    }
    masks = binarize(source, a.threshold, a.figure_is_dark);
  }

  for (const auto& [name, tensor] : stages) {
    const auto avg = average_activation_map(*tensor);
    export_activation_map(out, std::string("average_") + name, avg);
    json stage = {{"shape", tensor->shape()}, {"raw_min", avg.raw_min}, {"raw_max", avg.raw_max}};
    if (masks) {
      // Bring the map back to stimulus resolution; stem strides are powers of two.
      const auto full = upsample(avg.image, stimulus.width(), stimulus.height(), Kernel::kNearest);
      stage["end_stopping_score"] = end_stopping_score(full, spec, *masks);
    }
    report["stages"][name] = stage;
  }
  const auto filters = per_filter_maps(stem.bn);
  write_png_file(out / "bn_filters_montage.png", montage(filters, 8));
  report["bn_filters"] = {{"count", filters.size()},
                          {"layout", "8 columns, row-major by filter index"},
                          {"global_min", filters.empty() ? 0.0f : filters.front().raw_min},
                          {"global_max", filters.empty() ? 0.0f : filters.front().raw_max}};
  write_text_file(out / "probe.json", report.dump(2));
  std::cout << "wrote activation maps to " << out << "\n";
  return 0;
}

int run_serve(const std::string& store_dir, const std::string& host, int port,
              const std::string& sessions, const std::string& static_dir) {
  StudyService service(StimulusStore::open(store_dir),
                       sessions.empty() ? fs::path(store_dir) / "sessions" : fs::path(sessions));
  httplib::Server server;
  std::optional<fs::path> assets;
  if (!static_dir.empty()) assets = static_dir;
  register_study_routes(server, service, assets);
  std::cout << "serving study on http://" << host << ":" << port << "\n";
  return server.listen(host, port) ? 0 : 1;
}

int run_verify(const std::string& dir) {
  const auto report = verify_directory(dir);
  for (const auto& id : report.missing) std::cout << "missing: " << id << "\n";
  for (const auto& id : report.mismatched) std::cout << "hash mismatch: " << id << "\n";
  std::cout << report.checked << " stimuli checked, " << report.missing.size() << " missing, "
            << report.mismatched.size() << " mismatched\n";
  return report.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Abutting grating illusion benchmark toolkit"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate an abutting-grating benchmark");
  gen_cmd->add_option("--dataset", gen.dataset, "mnist | mnist-hires | silhouettes")->required();
  gen_cmd->add_option("--input", gen.input, "MNIST IDX directory or silhouette directory")
      ->required();
  gen_cmd->add_option("--directions", gen.directions, "Comma list of h,v,ul,ur");
  gen_cmd->add_option("--intervals", gen.intervals, "Comma list of even intervals");
  gen_cmd->add_option("--threshold", gen.threshold, "Binarization threshold")->capture_default_str();
  gen_cmd->add_option("--figure-phase", gen.figure_phase, "Figure grating phase")
      ->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "Seed for --human-subset");
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();
  gen_cmd->add_flag("--idx", gen.idx, "Also write IDX files per condition");
  gen_cmd->add_flag("--figure-is-dark", gen.figure_is_dark, "Dark pixels are figure");
  gen_cmd->add_flag("--invert", gen.invert, "Black lines on white ground");
  gen_cmd->add_option("--kernel", gen.kernel, "Upsampling kernel for mnist-hires")
      ->capture_default_str();
  gen_cmd->add_option("--size", gen.size, "Upsampled size for mnist-hires")->capture_default_str();
  gen_cmd->add_option("--split", gen.split, "MNIST split: test | train")->capture_default_str();
  gen_cmd->add_flag("--human-subset", gen.human_subset, "Use 10 seeded samples per digit");
  gen_cmd->add_option("--disjoint-from", gen.disjoint_from,
                      "Exclude the subsets drawn with these seeds");

  std::string truth, pred, classmap, score_out, model;
  auto* score_cmd = app.add_subcommand("score", "Score a prediction file");
  score_cmd->add_option("--truth", truth, "Generated benchmark directory or its manifest.json")->required();
  score_cmd->add_option("--pred", pred, "CSV stimulus_id,fine_class")->required();
  score_cmd->add_option("--classmap", classmap, "CSV fine_index,category");
  score_cmd->add_option("--model", model, "Model name (default: prediction file stem)");
  score_cmd->add_option("--out", score_out, "results.json")->required();

  std::string results_glob, hist_out;
  double bin = 0.05, outlier_threshold = kDefaultOutlierThreshold;
  auto* sum_cmd = app.add_subcommand("summarize", "Histogram accuracies across models");
  sum_cmd->add_option("--results", results_glob, "Glob of results.json files")->required();
  sum_cmd->add_option("--bin", bin, "Histogram bin width")->capture_default_str();
  sum_cmd->add_option("--outlier-threshold", outlier_threshold)->capture_default_str();
  sum_cmd->add_option("--out", hist_out, "hist.json")->required();

  ProbeArgs probe;
  auto* probe_cmd = app.add_subcommand("probe", "Activation maps of a conv stem");
  probe_cmd->add_option("--weights", probe.weights, "Directory with weights.json/.bin")->required();
  probe_cmd->add_option("--image", probe.image, "Stimulus PNG")->required();
  probe_cmd->add_option("--out", probe.out, "Output directory")->required();
  probe_cmd->add_flag("--no-imagenet-norm", probe.no_norm, "Feed raw [0,1] values");
  probe_cmd->add_option("--mask-source", probe.mask_source,
                        "Uncorrupted source image, enables end-stopping scores");
  probe_cmd->add_option("--direction", probe.direction)->capture_default_str();
  probe_cmd->add_option("--interval", probe.interval);
  probe_cmd->add_option("--threshold", probe.threshold)->capture_default_str();
  probe_cmd->add_flag("--figure-is-dark", probe.figure_is_dark);

  std::string store, host = "0.0.0.0", sessions, static_dir;
  int port = 8080;
  auto* serve_cmd = app.add_subcommand("serve", "Serve the human study");
  serve_cmd->add_option("--store", store, "Directory of generated benchmarks")->required();
  serve_cmd->add_option("--port", port)->capture_default_str();
  serve_cmd->add_option("--host", host)->capture_default_str();
  serve_cmd->add_option("--sessions", sessions, "Session log directory (default STORE/sessions)");
  serve_cmd->add_option("--static", static_dir, "Front-end assets mounted at /");

  std::string verify_dir;
  auto* verify_cmd = app.add_subcommand("verify", "Re-hash a generated benchmark");
  verify_cmd->add_option("--dir", verify_dir)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen_cmd) return run_gen(gen);
    if (*score_cmd) return run_score(truth, pred, classmap, score_out, model);
    if (*sum_cmd) return run_summarize(results_glob, bin, outlier_threshold, hist_out);
    if (*probe_cmd) return run_probe(probe);
    if (*serve_cmd) return run_serve(store, host, port, sessions, static_dir);
    if (*verify_cmd) return run_verify(verify_dir);
  } catch (const std::exception& e) {
    std::cerr << "agbench: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
