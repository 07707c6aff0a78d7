// Copyright 2026 The kpe Authors.
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

namespace kpe {

// Base class for every error the library raises. Callers that only care
// about success/failure catch this; the CLI maps it to a non-zero exit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration value or incompatible combination of settings.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed input file. Carries the location when one is known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0, std::size_t column = 0)
      : Error(line == 0 ? what
                        : what + " (line " + std::to_string(line) + ", column " +
                              std::to_string(column) + ")"),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

// Token streams or feature arrays that do not line up.
class AlignmentError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf reaching a layer boundary, or a loss that is not finite.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Shape mismatch between tensors, checkpoints or registries.
class ShapeError : public Error {
 public:
  using Error::Error;
};

}  // namespace kpe
