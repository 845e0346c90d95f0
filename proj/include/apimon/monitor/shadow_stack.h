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

// Per-thread stack of in-flight monitored calls.

#ifndef APIMON_MONITOR_SHADOW_STACK_H_
#define APIMON_MONITOR_SHADOW_STACK_H_

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "apimon/proto.h"
#include "apimon/trace_record.h"
#include "apimon/types.h"

namespace apimon::monitor {

// An entry hook together with the prototype bound to it at registration.
struct ApiBinding {
  Addr address = 0;
  std::string module;
  std::string symbol;
  proto::Prototype prototype;
  bool known_prototype = false;
  // Exit observed at the return address (strategy (b)), either by choice
  // or because exit points could not be hooked.
  bool return_hook = false;
};

struct ShadowStackEntry {
  Addr ra = 0;
  Addr esp = 0;
  std::shared_ptr<const ApiBinding> api;
  // Pushed for a call that looked internal at entry; only the exit-time
  // recheck consults it.
  bool deferred = false;
  std::vector<RenderedArg> entry_args;
};

class ShadowStack {
 public:
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  const ShadowStackEntry& top() const { return entries_.back(); }
  const ShadowStackEntry& operator[](std::size_t i) const { return entries_[i]; }
  const std::vector<ShadowStackEntry>& entries() const { return entries_; }

  void push(ShadowStackEntry e) { entries_.push_back(std::move(e)); }
  // Pops from the top while top.esp <= esp.
  void remove_stale(Addr esp);
  // Topmost non-deferred entry.
  const ShadowStackEntry* visible_top() const;
  // Index of the topmost entry with the given return address.
  std::optional<std::size_t> find_ra(Addr ra) const;
  std::optional<std::size_t> find_deferred_esp(Addr esp) const;
  // Keeps entries [0, n).
  void resize(std::size_t n) { entries_.resize(n); }
  // esp strictly decreasing from bottom to top.
  bool monotonic() const;

 private:
  std::vector<ShadowStackEntry> entries_;
};

}  // namespace apimon::monitor

#endif  // APIMON_MONITOR_SHADOW_STACK_H_
