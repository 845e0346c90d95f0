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

// Small character cursor shared by the line-oriented parsers.

#ifndef APIMON_SRC_COMMON_CURSOR_H_
#define APIMON_SRC_COMMON_CURSOR_H_

#include <cctype>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>

#include "apimon/error.h"

namespace apimon::detail {

class Cursor {
 public:
  Cursor(std::string_view line, std::size_t line_no)
      : line_(line), line_no_(line_no) {}

  bool done() {
    skip_space();
    return pos_ >= line_.size();
  }

  void skip_space() {
    while (pos_ < line_.size() &&
           std::isspace(static_cast<unsigned char>(line_[pos_])))
      ++pos_;
  }

  char peek() {
    skip_space();
    return pos_ < line_.size() ? line_[pos_] : '\0';
  }

  // Consumes `token` if it is next (after whitespace).
  bool accept(std::string_view token) {
    skip_space();
    if (line_.substr(pos_, token.size()) == token) {
      pos_ += token.size();
      return true;
    }
    return false;
  }

  void expect(std::string_view token) {
    if (!accept(token)) fail("expected '" + std::string(token) + "'");
  }

  // [A-Za-z_.][A-Za-z0-9_.$@?]*
  std::string identifier(std::string_view what = "identifier") {
    skip_space();
    std::size_t start = pos_;
    while (pos_ < line_.size() && is_ident_char(line_[pos_], pos_ == start))
      ++pos_;
    if (pos_ == start) fail("expected " + std::string(what));
    return std::string(line_.substr(start, pos_ - start));
  }

  bool at_identifier() {
    skip_space();
    return pos_ < line_.size() && is_ident_char(line_[pos_], true);
  }

  bool at_number() {
    skip_space();
    return pos_ < line_.size() &&
           std::isdigit(static_cast<unsigned char>(line_[pos_]));
  }

  // Decimal or 0x-prefixed hexadecimal, at most 32 bits.
  std::uint32_t number(std::string_view what = "number") {
    skip_space();
    std::size_t start = pos_;
    int base = 10;
    if (line_.substr(pos_, 2) == "0x" || line_.substr(pos_, 2) == "0X") {
      base = 16;
      pos_ += 2;
    }
    std::size_t digits_start = pos_;
    std::uint64_t value = 0;
    while (pos_ < line_.size()) {
      int d = digit(line_[pos_], base);
      if (d < 0) break;
      value = value * base + d;
      if (value > std::numeric_limits<std::uint32_t>::max()) {
        pos_ = start;
        fail(std::string(what) + " out of 32-bit range");
      }
      ++pos_;
    }
    if (pos_ == digits_start) {
      pos_ = start;
      fail("expected " + std::string(what));
    }
    return static_cast<std::uint32_t>(value);
  }

  // "..." with C escapes (\n \t \r \0 \\ \" \xNN).
  std::string quoted() {
    skip_space();
    if (pos_ >= line_.size() || line_[pos_] != '"') fail("expected string");
    ++pos_;
    std::string out;
    while (true) {
      if (pos_ >= line_.size()) fail("unterminated string");
      char c = line_[pos_++];
      if (c == '"') break;
      if (c != '\\') {
        out.push_back(c);
        continue;
      }
      if (pos_ >= line_.size()) fail("unterminated escape");
      char e = line_[pos_++];
      switch (e) {
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case 'r': out.push_back('\r'); break;
        case '0': out.push_back('\0'); break;
        case '\\': out.push_back('\\'); break;
        case '"': out.push_back('"'); break;
        case 'x': {
          int hi = pos_ < line_.size() ? digit(line_[pos_], 16) : -1;
          int lo = pos_ + 1 < line_.size() ? digit(line_[pos_ + 1], 16) : -1;
          if (hi < 0 || lo < 0) fail("bad \\x escape");
          out.push_back(static_cast<char>(hi * 16 + lo));
          pos_ += 2;
          break;
        }
        default:
          fail(std::string("unknown escape \\") + e);
      }
    }
    return out;
  }

  std::string_view rest() {
    skip_space();
    return line_.substr(pos_);
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError(line_no_, pos_ + 1, message);
  }

  std::size_t line_no() const { return line_no_; }
  std::size_t column() const { return pos_ + 1; }

 private:
  static bool is_ident_char(char c, bool first) {
    unsigned char u = static_cast<unsigned char>(c);
    if (std::isalpha(u) || c == '_' || c == '.') return true;
    if (first) return false;
    return std::isdigit(u) || c == '$' || c == '@' || c == '?';
  }

  static int digit(char c, int base) {
    int d = -1;
    if (c >= '0' && c <= '9') d = c - '0';
    else if (c >= 'a' && c <= 'f') d = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F') d = c - 'A' + 10;
    return d < base ? d : -1;
  }

  std::string_view line_;
  std::size_t line_no_;
  std::size_t pos_ = 0;
};

// Strips a trailing `#` comment (outside string literals).
inline std::string_view strip_comment(std::string_view line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (in_string) {
      if (c == '\\') ++i;
      else if (c == '"') in_string = false;
    } else if (c == '"') {
      in_string = true;
    } else if (c == '#') {
      return line.substr(0, i);
    }
  }
  return line;
}

}  // namespace apimon::detail

#endif  // APIMON_SRC_COMMON_CURSOR_H_
