// Copyright 2026 The apimon Authors
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

#ifndef APIMON_ERROR_H_
#define APIMON_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace apimon {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A text document (prototype DB, scenario, trace) failed to parse.
// Line and column are 1-based; column 0 means "whole line".
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& message)
      : Error(format(line, column, message)),
        line_(line),
        column_(column),
        message_(message) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  const std::string& message() const { return message_; }

 private:
  static std::string format(std::size_t line, std::size_t column,
                            const std::string& message) {
    std::string out = "line " + std::to_string(line);
    if (column != 0) out += ", column " + std::to_string(column);
    return out + ": " + message;
  }

  std::size_t line_;
  std::size_t column_;
  std::string message_;
};

// Structurally valid input that violates a semantic rule (duplicate key,
// overlapping modules, forwarder cycle, ...).
class LoadError : public Error {
 public:
  using Error::Error;
};

}  // namespace apimon

#endif  // APIMON_ERROR_H_
