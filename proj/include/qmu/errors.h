// Copyright 2026 The QMU Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef QMU_ERRORS_H_
#define QMU_ERRORS_H_

#include <stdexcept>
#include <string>

namespace qmu {

// Invalid run configuration (bad flag value, missing required option).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input data. `row` is 1-based, 0 when not tied to a row.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t row = 0)
      : std::runtime_error(row ? "row " + std::to_string(row) + ": " + message
                               : message),
        row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

// Non-finite values, degenerate statistics and similar numeric failures.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qmu

#endif  // QMU_ERRORS_H_
