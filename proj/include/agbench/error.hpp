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

#pragma once

#include <stdexcept>
#include <string>

namespace agbench {

// Malformed input: bad magic numbers, undecodable images, bad tables.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Payload shorter (or longer) than its header declares.
class LengthError : public FormatError {
 public:
  using FormatError::FormatError;
};

// A caller-supplied parameter violates an operation's precondition.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Tensor or image shapes that do not agree.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace agbench
