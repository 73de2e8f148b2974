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

#include "agbench/study.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "agbench/dataset_io.hpp"
#include "agbench/error.hpp"
#include "agbench/random.hpp"

namespace agbench {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::string new_session_id() {
  std::random_device rd;
  std::ostringstream out;
  out << std::hex;
  for (int i = 0; i < 4; ++i) {
    out.width(8);
    out.fill('0');
    out << rd();
  }
  return out.str();
}

[[noreturn]] void fail(StudyError::Kind kind, const std::string& msg) { throw StudyError(kind, msg); }

}  // namespace

// ---------------------------------------------------------------------------
// StimulusStore

StimulusStore StimulusStore::open(const fs::path& root) {
  if (!fs::is_directory(root)) throw std::runtime_error("store is not a directory: " + root.string());
  std::vector<fs::path> manifests;
  if (fs::exists(root / "manifest.json")) manifests.push_back(root / "manifest.json");
  std::vector<fs::path> subdirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory() && fs::exists(entry.path() / "manifest.json")) {
      subdirs.push_back(entry.path() / "manifest.json");
    }
  }
  std::sort(subdirs.begin(), subdirs.end());
  manifests.insert(manifests.end(), subdirs.begin(), subdirs.end());

  StimulusStore store;
  for (const auto& path : manifests) {
    const auto manifest = json::parse(read_text_file(path));
    const auto dataset_name = manifest.at("dataset").get<std::string>();
    const auto kind = parse_dataset_kind(dataset_name);
    if (!kind) throw FormatError(path.string() + ": unknown dataset " + dataset_name);
    const int k = static_cast<int>(*kind);
    store.class_names_[k] = manifest.at("class_names").get<std::vector<std::string>>();
    std::set<std::string> fresh;
    for (const auto& item : manifest.at("items")) {
      const auto cond = item.at("condition").get<std::string>();
      const Key key{k, cond};
      if (store.conditions_.count(key) && !fresh.count(cond)) {
        throw FormatError(path.string() + ": condition " + dataset_name + "/" + cond +
                          " already provided by another manifest");
      }
      fresh.insert(cond);
      StoredStimulus s;
      s.id = dataset_name + "." + cond + "." + std::to_string(item.at("index").get<std::size_t>());
      s.file = path.parent_path() / item.at("file").get<std::string>();
      s.label = item.at("label").get<std::uint32_t>();
      auto& list = store.conditions_[key];
      store.by_id_[s.id] = {key, list.size()};
      list.push_back(std::move(s));
    }
  }
  return store;
}

bool StimulusStore::has_condition(DatasetKind dataset, const Condition& condition) const {
  return conditions_.count({static_cast<int>(dataset), condition.key()}) > 0;
}

const std::vector<StoredStimulus>& StimulusStore::stimuli(DatasetKind dataset,
                                                          const Condition& condition) const {
  const auto it = conditions_.find({static_cast<int>(dataset), condition.key()});
  if (it == conditions_.end()) {
    fail(StudyError::Kind::kNotFound, "no stimuli for condition " + std::string(to_string(dataset)) +
                                          "/" + condition.key());
  }
  return it->second;
}

const StoredStimulus* StimulusStore::find(const std::string& stimulus_id) const {
  const auto it = by_id_.find(stimulus_id);
  if (it == by_id_.end()) return nullptr;
  return &conditions_.at(it->second.first)[it->second.second];
}

const std::vector<std::string>& StimulusStore::class_names(DatasetKind dataset) const {
  static const std::vector<std::string> empty;
  const auto it = class_names_.find(static_cast<int>(dataset));
  return it == class_names_.end() ? empty : it->second;
}

std::vector<std::pair<DatasetKind, Condition>> StimulusStore::conditions() const {
  std::vector<std::pair<DatasetKind, Condition>> out;
  for (const auto& [key, list] : conditions_) {
    if (auto c = Condition::parse(key.second)) out.emplace_back(static_cast<DatasetKind>(key.first), *c);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sessions

json NextStimulus::to_json() const {
  if (done) return {{"done", true}, {"position", position}, {"total", total}};
  return {{"done", false},
          {"stimulus_id", stimulus_id},
          {"image_url", "/stimuli/" + stimulus_id + ".png"},
          {"position", position},
          {"total", total},
          {"block", block},
          {"block_position", block_position},
          {"block_size", block_size},
          {"dataset", std::string(to_string(dataset))},
          {"condition", condition.key()},
          {"allowed_labels", allowed_labels},
          {"display_px", display_px}};
}

struct StudyService::Session {
  struct Block {
    DatasetKind dataset = DatasetKind::kMnist;
    Condition condition;
    std::vector<std::string> stimuli;
  };
  struct Response {
    std::string stimulus_id;
    std::string label;
    std::int64_t timestamp_ms = 0;
  };

  std::string id;
  std::uint64_t seed = 0;
  std::optional<std::string> subject_tag;
  std::int64_t created_ms = 0;
  std::vector<Block> blocks;
  std::vector<Response> responses;
  fs::path log_path;
  mutable std::mutex mutex;

  std::size_t total() const {
    std::size_t n = 0;
    for (const auto& b : blocks) n += b.stimuli.size();
    return n;
  }
  bool complete() const { return responses.size() == total(); }
  // (block, offset) of a global position < total().
  std::pair<std::size_t, std::size_t> locate(std::size_t position) const {
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      if (position < blocks[b].stimuli.size()) return {b, position};
      position -= blocks[b].stimuli.size();
    }
    return {blocks.size(), 0};
  }
  std::size_t block_of(const std::string& stimulus_id) const {
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const auto& s = blocks[b].stimuli;
      if (std::find(s.begin(), s.end(), stimulus_id) != s.end()) return b;
    }
    return blocks.size();
  }

  json header_json() const {
    json bl = json::array();
    for (const auto& b : blocks) {
      bl.push_back({{"dataset", std::string(to_string(b.dataset))},
                    {"condition", b.condition.key()},
                    {"stimuli", b.stimuli}});
    }
    json h = {{"type", "session"}, {"session_id", id},   {"seed", seed},
              {"created_ms", created_ms}, {"blocks", bl}};
    h["subject_tag"] = subject_tag ? json(*subject_tag) : json(nullptr);
    return h;
  }

  void append_log(const json& line) const {
    std::ofstream out(log_path, std::ios::app);
    if (!out) throw std::runtime_error("cannot append to " + log_path.string());
    out << line.dump() << '\n';
    out.flush();
    if (!out) throw std::runtime_error("append failed: " + log_path.string());
  }
};

StudyService::StudyService(StimulusStore store, fs::path session_dir, StudyProtocol protocol)
    : store_(std::move(store)), session_dir_(std::move(session_dir)), protocol_(protocol) {
  fs::create_directories(session_dir_);
  std::vector<fs::path> logs;
  for (const auto& entry : fs::directory_iterator(session_dir_)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") logs.push_back(entry.path());
  }
  std::sort(logs.begin(), logs.end());
  for (const auto& log : logs) replay(log);
}

StudyService::~StudyService() = default;

std::shared_ptr<StudyService::Session> StudyService::get(const std::string& session_id) const {
  std::shared_lock lock(sessions_mutex_);
  const auto it = sessions_.find(session_id);
  if (it == sessions_.end()) fail(StudyError::Kind::kNotFound, "unknown session " + session_id);
  return it->second;
}

std::string StudyService::create_session(const std::vector<StudyBlockSpec>& blocks,
                                         std::uint64_t seed,
                                         std::optional<std::string> subject_tag) {
  if (blocks.size() != protocol_.block_order.size()) {
    fail(StudyError::Kind::kInvalid, "a session needs exactly " +
                                         std::to_string(protocol_.block_order.size()) + " blocks");
  }
  auto session = std::make_shared<Session>();
  session->seed = seed;
  session->subject_tag = std::move(subject_tag);
  session->created_ms = now_ms();
  std::mt19937_64 rng(seed);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto& spec = blocks[b];
    if (spec.dataset != protocol_.block_order[b]) {
      fail(StudyError::Kind::kInvalid, "block " + std::to_string(b) + " must be " +
                                           std::string(to_string(protocol_.block_order[b])));
    }
    if (spec.condition.interval < 2 || spec.condition.interval % 2 != 0) {
      fail(StudyError::Kind::kInvalid,
           "grating interval must be even and >= 2, got " + std::to_string(spec.condition.interval));
    }
    const auto& stimuli = store_.stimuli(spec.dataset, spec.condition);
    if (stimuli.size() != protocol_.block_sizes[b]) {
      fail(StudyError::Kind::kInvalid,
           std::string(to_string(spec.dataset)) + "/" + spec.condition.key() + " has " +
               std::to_string(stimuli.size()) + " stimuli, the protocol expects " +
               std::to_string(protocol_.block_sizes[b]));
    }
    Session::Block block{spec.dataset, spec.condition, {}};
    for (const auto& s : stimuli) block.stimuli.push_back(s.id);
    seeded_shuffle(block.stimuli, rng);
    session->blocks.push_back(std::move(block));
  }

  std::unique_lock lock(sessions_mutex_);
  do {
    session->id = new_session_id();
  } while (sessions_.count(session->id));
  session->log_path = session_dir_ / (session->id + ".jsonl");
  session->append_log(session->header_json());
  sessions_.emplace(session->id, session);
  return session->id;
}

NextStimulus StudyService::next_stimulus(const std::string& session_id) const {
  const auto session = get(session_id);
  std::lock_guard lock(session->mutex);
  NextStimulus next;
  next.total = session->total();
  next.position = session->responses.size();
  if (session->complete()) {
    next.done = true;
    return next;
  }
  const auto [b, offset] = session->locate(next.position);
  const auto& block = session->blocks[b];
  next.stimulus_id = block.stimuli[offset];
  next.block = b;
  next.block_position = offset;
  next.block_size = block.stimuli.size();
  next.dataset = block.dataset;
  next.condition = block.condition;
  next.allowed_labels = store_.class_names(block.dataset);
  next.display_px = block.dataset == DatasetKind::kMnist ? protocol_.small_display_px
                                                         : protocol_.large_display_px;
  return next;
}

std::size_t StudyService::record_response(const std::string& session_id,
                                          const std::string& stimulus_id,
                                          const std::string& label) {
  const auto session = get(session_id);
  std::lock_guard lock(session->mutex);
  const std::size_t cursor = session->responses.size();
  if (session->complete()) fail(StudyError::Kind::kConflict, "session is already complete");
  for (const auto& r : session->responses) {
    if (r.stimulus_id == stimulus_id) {
      fail(StudyError::Kind::kConflict, "stimulus " + stimulus_id + " was already answered");
    }
  }
  const auto [b, offset] = session->locate(cursor);
  const auto& block = session->blocks[b];
  if (block.stimuli[offset] != stimulus_id) {
    fail(StudyError::Kind::kConflict, "stimulus " + stimulus_id + " is not the current stimulus");
  }
  const auto& allowed = store_.class_names(block.dataset);
  if (std::find(allowed.begin(), allowed.end(), label) == allowed.end()) {
    fail(StudyError::Kind::kInvalid, "label '" + label + "' is not allowed in this block");
  }
  Session::Response response{stimulus_id, label, now_ms()};
  session->append_log({{"type", "response"},
                       {"position", cursor},
                       {"stimulus_id", response.stimulus_id},
                       {"label", response.label},
                       {"timestamp_ms", response.timestamp_ms}});
  session->responses.push_back(std::move(response));
  return session->responses.size();
}

json StudyService::session_results(const std::string& session_id) const {
  const auto session = get(session_id);
  std::lock_guard lock(session->mutex);
  const bool complete = session->complete();

  std::vector<std::size_t> answered(session->blocks.size(), 0), correct(session->blocks.size(), 0);
  json log = json::array();
  for (const auto& r : session->responses) {
    const auto b = session->block_of(r.stimulus_id);
    ++answered[b];
    if (complete) {
      const auto* stim = store_.find(r.stimulus_id);
      const auto& names = store_.class_names(session->blocks[b].dataset);
      if (stim && stim->label < names.size() && names[stim->label] == r.label) ++correct[b];
    }
    log.push_back({{"stimulus_id", r.stimulus_id},
                   {"label", r.label},
                   {"timestamp_ms", r.timestamp_ms}});
  }

  json blocks = json::array();
  for (std::size_t b = 0; b < session->blocks.size(); ++b) {
    const auto& block = session->blocks[b];
    json entry = {{"dataset", std::string(to_string(block.dataset))},
                  {"condition", block.condition.key()},
                  {"answered", answered[b]},
                  {"total", block.stimuli.size()}};
    if (complete) {
      entry["correct"] = correct[b];
      entry["accuracy"] = block.stimuli.empty()
                              ? 0.0
                              : static_cast<double>(correct[b]) /
                                    static_cast<double>(block.stimuli.size());
    }
    blocks.push_back(std::move(entry));
  }
  json out = {{"session_id", session->id},
              {"seed", session->seed},
              {"complete", complete},
              {"partial", !complete},
              {"answered", session->responses.size()},
              {"total", session->total()},
              {"blocks", blocks},
              {"responses", log},
              {"reference",
               {{"note", "mean human accuracy on clean silhouettes, for context only"},
                {"clean_silhouettes_accuracy", 0.75}}}};
  out["subject_tag"] = session->subject_tag ? json(*session->subject_tag) : json(nullptr);
  return out;
}

const StoredStimulus* StudyService::stimulus(const std::string& stimulus_id) const {
  return store_.find(stimulus_id);
}

std::vector<std::string> StudyService::session_ids() const {
  std::shared_lock lock(sessions_mutex_);
  std::vector<std::string> ids;
  for (const auto& [id, s] : sessions_) ids.push_back(id);
  return ids;
}

void StudyService::replay(const fs::path& log) {
  std::ifstream in(log);
  std::string line;
  std::shared_ptr<Session> session;
  std::size_t line_no = 0;
  try {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const auto rec = json::parse(line);
      const auto type = rec.at("type").get<std::string>();
      if (type == "session") {
        if (session) throw FormatError("second session header");
        session = std::make_shared<Session>();
        session->id = rec.at("session_id").get<std::string>();
        session->seed = rec.at("seed").get<std::uint64_t>();
        session->created_ms = rec.at("created_ms").get<std::int64_t>();
        if (!rec.at("subject_tag").is_null()) session->subject_tag = rec["subject_tag"].get<std::string>();
        for (const auto& b : rec.at("blocks")) {
          const auto kind = parse_dataset_kind(b.at("dataset").get<std::string>());
          const auto cond = Condition::parse(b.at("condition").get<std::string>());
          if (!kind || !cond) throw FormatError("bad block descriptor");
          session->blocks.push_back({*kind, *cond, b.at("stimuli").get<std::vector<std::string>>()});
        }
      } else if (type == "response") {
        if (!session) throw FormatError("response before session header");
        const std::size_t pos = session->responses.size();
        const auto [b, offset] = session->locate(pos);
        const auto id = rec.at("stimulus_id").get<std::string>();
        if (b >= session->blocks.size() || session->blocks[b].stimuli[offset] != id) {
          throw FormatError("response out of order");
        }
        session->responses.push_back(
            {id, rec.at("label").get<std::string>(), rec.at("timestamp_ms").get<std::int64_t>()});
      } else {
        throw FormatError("unknown record type " + type);
      }
    }
  } catch (const std::exception& e) {
    throw FormatError(log.string() + ":" + std::to_string(line_no) + ": " + e.what());
  }
  if (!session) return;
  session->log_path = log;
  std::unique_lock lock(sessions_mutex_);
  sessions_.emplace(session->id, std::move(session));
}

}  // namespace agbench
