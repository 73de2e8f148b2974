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

// Human classification study: sessions of three fixed-order blocks
// (AG-MNIST, high-resolution AG-MNIST, AG-silhouettes), forced-choice
// responses, and an append-only JSON-lines log per session.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "agbench/benchgen.hpp"

namespace agbench {

class StudyError : public std::runtime_error {
 public:
  enum class Kind {
    kNotFound,  // unknown session, stimulus or condition
    kConflict,  // out-of-order, repeated, or post-completion submission
    kInvalid,   // malformed request, disallowed label, bad condition
  };
  StudyError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct StoredStimulus {
  std::string id;  // "<dataset>.<direction>_<interval>.<index>", carries no label
  std::filesystem::path file;
  std::uint32_t label = 0;
};

/// Index over generated benchmarks: reads `root/manifest.json` and
/// `root/*/manifest.json`.
class StimulusStore {
 public:
  static StimulusStore open(const std::filesystem::path& root);

  bool has_condition(DatasetKind dataset, const Condition& condition) const;
  /// Stimuli in manifest order. Throws StudyError(kNotFound).
  const std::vector<StoredStimulus>& stimuli(DatasetKind dataset, const Condition& condition) const;
  const StoredStimulus* find(const std::string& stimulus_id) const;
  const std::vector<std::string>& class_names(DatasetKind dataset) const;
  std::vector<std::pair<DatasetKind, Condition>> conditions() const;

 private:
  using Key = std::pair<int, std::string>;
  std::map<Key, std::vector<StoredStimulus>> conditions_;
  std::map<std::string, std::pair<Key, std::size_t>> by_id_;
  std::map<int, std::vector<std::string>> class_names_;
};

struct StudyBlockSpec {
  DatasetKind dataset = DatasetKind::kMnist;
  Condition condition;
};

struct StudyProtocol {
  std::array<DatasetKind, 3> block_order = {DatasetKind::kMnist, DatasetKind::kMnistHires,
                                            DatasetKind::kSilhouettes};
  std::array<std::size_t, 3> block_sizes = {100, 100, 160};
  /// Fixed on-screen sizes in CSS pixels (about 0.7 cm and 5.6 cm at 96 dpi).
  std::size_t small_display_px = 26;
  std::size_t large_display_px = 212;
};

struct NextStimulus {
  bool done = false;
  std::string stimulus_id;
  std::size_t position = 0;  // equals the session cursor
  std::size_t total = 0;
  std::size_t block = 0;
  std::size_t block_position = 0;
  std::size_t block_size = 0;
  DatasetKind dataset = DatasetKind::kMnist;
  Condition condition;
  std::vector<std::string> allowed_labels;
  std::size_t display_px = 0;

  nlohmann::json to_json() const;
};

class StudyService {
 public:
  /// Sessions found in `session_dir` are replayed from their logs.
  StudyService(StimulusStore store, std::filesystem::path session_dir,
               StudyProtocol protocol = {});
  ~StudyService();

  StudyService(const StudyService&) = delete;
  StudyService& operator=(const StudyService&) = delete;

  /// Stimulus order within each block is a seeded shuffle fixed here.
  /// Throws StudyError(kInvalid) for wrong block order, odd intervals or
  /// size mismatches, and StudyError(kNotFound) for absent conditions.
  std::string create_session(const std::vector<StudyBlockSpec>& blocks, std::uint64_t seed,
                             std::optional<std::string> subject_tag = std::nullopt);

  NextStimulus next_stimulus(const std::string& session_id) const;

  /// Returns the new cursor.
  std::size_t record_response(const std::string& session_id, const std::string& stimulus_id,
                              const std::string& label);

  /// Per-block counts and the response log. Accuracies are only reported
  /// once the session is complete; before that the document is flagged
  /// partial and carries no correctness information.
  nlohmann::json session_results(const std::string& session_id) const;

  /// File backing a stimulus id, or nullptr.
  const StoredStimulus* stimulus(const std::string& stimulus_id) const;

  std::vector<std::string> session_ids() const;
  const StudyProtocol& protocol() const { return protocol_; }

 private:
  struct Session;
  std::shared_ptr<Session> get(const std::string& session_id) const;
  void replay(const std::filesystem::path& log);

  StimulusStore store_;
  std::filesystem::path session_dir_;
  StudyProtocol protocol_;
  mutable std::shared_mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
};

}  // namespace agbench
