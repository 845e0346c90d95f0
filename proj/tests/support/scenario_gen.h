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

// Random, well-formed scenario documents for property tests.

#ifndef APIMON_TESTS_SUPPORT_SCENARIO_GEN_H_
#define APIMON_TESTS_SUPPORT_SCENARIO_GEN_H_

#include <cstdint>
#include <string>

namespace apimon::testing {

struct GenOptions {
  int max_depth = 8;
  int max_threads = 4;
  // Allow a second process with an authentic thread and remote threads.
  bool injection = true;
};

// Non-adversarial by construction: every call returns through the frame it
// pushed, stdcall bodies pop exactly their argument footprint, and cdecl
// callers clean up.
std::string generate_scenario(std::uint32_t seed, const GenOptions& options = {});

}  // namespace apimon::testing

#endif  // APIMON_TESTS_SUPPORT_SCENARIO_GEN_H_
