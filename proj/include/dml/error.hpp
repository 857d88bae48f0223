// Copyright 2026 The dml-xdomain Authors.
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

#ifndef DML_ERROR_HPP_
#define DML_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace dml {

// Base of every error raised by the library. `reason()` is a stable,
// machine-parsable tag (used verbatim by the CLI on failure).
class Error : public std::runtime_error {
 public:
  Error(std::string reason, const std::string& message)
      : std::runtime_error(message), reason_(std::move(reason)) {}

  const std::string& reason() const noexcept { return reason_; }

 private:
  std::string reason_;
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& message) : Error("shape-error", message) {}
};

class DegenerateInputError : public Error {
 public:
  explicit DegenerateInputError(const std::string& message)
      : Error("degenerate-input", message) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& message) : Error("numeric-divergence", message) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message) : Error("validation-error", message) {}
  ValidationError(std::string reason, const std::string& message)
      : Error(std::move(reason), message) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& message)
      : Error("parse-error", file + ":" + std::to_string(line) + ": " + message), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class LookupError : public Error {
 public:
  explicit LookupError(const std::string& message) : Error("unknown-id", message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("input-not-found", message) {}
  IoError(std::string reason, const std::string& message) : Error(std::move(reason), message) {}
};

}  // namespace dml

#endif  // DML_ERROR_HPP_
