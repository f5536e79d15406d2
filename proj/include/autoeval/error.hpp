// Copyright 2026 The AutoEval Authors.
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

namespace autoeval {

// Error categories. Each maps onto one CLI exit code (see exit_code()).
enum class ErrorKind {
  kConfig,      // bad options or configuration
  kSpec,        // transform spec parameter out of range
  kIo,          // read/write failure, missing file
  kWorkspace,   // missing or inconsistent workspace contents
  kFormat,      // malformed file
  kValidation,  // data invariant violated
  kDimension,   // shape/size mismatch or unmet size precondition
  kInput,       // bad argument to an estimator
  kNumeric,     // non-finite result
  kTraining,    // classifier failed to train
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig: return "config error";
    case ErrorKind::kSpec: return "spec error";
    case ErrorKind::kIo: return "I/O error";
    case ErrorKind::kWorkspace: return "workspace error";
    case ErrorKind::kFormat: return "format error";
    case ErrorKind::kValidation: return "validation error";
    case ErrorKind::kDimension: return "dimension error";
    case ErrorKind::kInput: return "input error";
    case ErrorKind::kNumeric: return "numeric error";
    case ErrorKind::kTraining: return "training error";
  }
  return "error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// 0 ok, 2 config, 3 I/O, 4 validation/dimension, 5 numeric.
inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig:
    case ErrorKind::kSpec:
      return 2;
    case ErrorKind::kIo:
    case ErrorKind::kWorkspace:
      return 3;
    case ErrorKind::kFormat:
    case ErrorKind::kValidation:
    case ErrorKind::kDimension:
    case ErrorKind::kInput:
      return 4;
    case ErrorKind::kNumeric:
    case ErrorKind::kTraining:
      return 5;
  }
  return 1;
}

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace autoeval
