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

#include "agbench/study_http.hpp"

#include <httplib.h>

#include "agbench/dataset_io.hpp"

namespace agbench {

using json = nlohmann::json;

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, {{"error", message}});
}

int status_for(StudyError::Kind kind) {
  switch (kind) {
    case StudyError::Kind::kNotFound: return 404;
    case StudyError::Kind::kConflict: return 409;
    case StudyError::Kind::kInvalid: return 400;
  }
  return 500;
}

template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const StudyError& e) {
    send_error(res, status_for(e.kind()), e.what());
  } catch (const json::exception& e) {
    send_error(res, 400, std::string("malformed request: ") + e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, e.what());
  }
}

std::vector<StudyBlockSpec> parse_blocks(const json& body) {
  std::vector<StudyBlockSpec> blocks;
  for (const auto& b : body.at("blocks")) {
    const auto dataset = b.at("dataset").get<std::string>();
    const auto kind = parse_dataset_kind(dataset);
    if (!kind) throw StudyError(StudyError::Kind::kInvalid, "unknown dataset " + dataset);
    const auto key = b.at("condition").get<std::string>();
    const auto cond = Condition::parse(key);
    if (!cond) throw StudyError(StudyError::Kind::kInvalid, "bad condition " + key);
    blocks.push_back({*kind, *cond});
  }
  return blocks;
}

}  // namespace

void register_study_routes(httplib::Server& server, StudyService& service,
                           const std::optional<std::filesystem::path>& static_dir) {
  server.Post("/sessions", [&service](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto body = json::parse(req.body);
      std::optional<std::string> tag;
      if (body.contains("subject_tag") && !body["subject_tag"].is_null()) {
        tag = body["subject_tag"].get<std::string>();
      }
      const auto id =
          service.create_session(parse_blocks(body), body.value("seed", std::uint64_t{0}), tag);
      send_json(res, 201, {{"session_id", id}, {"total", service.next_stimulus(id).total}});
    });
  });

  server.Get(R"(/sessions/([0-9a-f]+)/next)",
             [&service](const httplib::Request& req, httplib::Response& res) {
               guarded(res, [&] { send_json(res, 200, service.next_stimulus(req.matches[1]).to_json()); });
             });

  server.Post(R"(/sessions/([0-9a-f]+)/responses)",
              [&service](const httplib::Request& req, httplib::Response& res) {
                guarded(res, [&] {
                  const auto body = json::parse(req.body);
                  const std::string id = req.matches[1];
                  const auto cursor = service.record_response(
                      id, body.at("stimulus_id").get<std::string>(), body.at("label").get<std::string>());
                  send_json(res, 200,
                            {{"accepted", true},
                             {"cursor", cursor},
                             {"done", service.next_stimulus(id).done}});
                });
              });

  server.Get(R"(/sessions/([0-9a-f]+)/results)",
             [&service](const httplib::Request& req, httplib::Response& res) {
               guarded(res, [&] { send_json(res, 200, service.session_results(req.matches[1])); });
             });

  server.Get(R"(/stimuli/([A-Za-z0-9_\-]+\.[A-Za-z0-9_]+\.[0-9]+)\.png)",
             [&service](const httplib::Request& req, httplib::Response& res) {
               guarded(res, [&] {
                 const auto* stim = service.stimulus(req.matches[1]);
                 if (!stim) {
                   send_error(res, 404, "unknown stimulus");
                   return;
                 }
                 const auto bytes = read_file(stim->file);
                 res.status = 200;
                 res.set_content(std::string(bytes.begin(), bytes.end()), "image/png");
               });
             });

  if (static_dir) server.set_mount_point("/", static_dir->string());
}

}  // namespace agbench
