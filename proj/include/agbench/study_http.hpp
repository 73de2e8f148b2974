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

// HTTP/JSON front of the study service:
//
//   POST /sessions                    {"blocks":[{"dataset","condition"}x3],"seed",
//                                      "subject_tag"?}  -> 201 {"session_id","total"}
//   GET  /sessions/{id}/next          -> next stimulus descriptor or {"done":true}
//   GET  /stimuli/{stimulus_id}.png   -> image/png
//   POST /sessions/{id}/responses     {"stimulus_id","label"} -> {"accepted","cursor","done"}
//   GET  /sessions/{id}/results       -> per-block counts and the response log
//
// Errors are {"error": message} with 400 (invalid), 404 (unknown), 409
// (out of order, repeated, or after completion).

#pragma once

#include <filesystem>
#include <optional>

#include "agbench/study.hpp"

namespace httplib {
class Server;
}

namespace agbench {

/// Registers the study routes; when `static_dir` is set it is also mounted
/// at "/" for the browser front end.
void register_study_routes(httplib::Server& server, StudyService& service,
                           const std::optional<std::filesystem::path>& static_dir = std::nullopt);

}  // namespace agbench
