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

#include <CLI11.hpp>
#include <iostream>

#include "apimon/cli/trace_io.h"

int main(int argc, char** argv) {
  CLI::App app{"Compare two trace files, ignoring seq and thread interleaving."};
  std::string left, right;
  bool identity = false;
  app.add_option("left", left, "first trace")->required()->check(CLI::ExistingFile);
  app.add_option("right", right, "second trace")->required()->check(CLI::ExistingFile);
  app.add_flag("--identity", identity, "compare call identity only, not values");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    auto diff = apimon::cli::diff_traces(
        apimon::cli::read_trace_file(left), apimon::cli::read_trace_file(right),
        identity ? apimon::cli::DiffMode::kIdentity : apimon::cli::DiffMode::kFull);
    std::cout << apimon::cli::format_diff(diff);
    return diff.empty() ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return 2;
  }
}
