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

#include "apimon/monitor/shadow_stack.h"

namespace apimon::monitor {

void ShadowStack::remove_stale(Addr esp) {
  while (!entries_.empty() && entries_.back().esp <= esp) entries_.pop_back();
}

const ShadowStackEntry* ShadowStack::visible_top() const {
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it)
    if (!it->deferred) return &*it;
  return nullptr;
}

std::optional<std::size_t> ShadowStack::find_ra(Addr ra) const {
  for (std::size_t i = entries_.size(); i-- > 0;)
    if (entries_[i].ra == ra) return i;
  return std::nullopt;
}

std::optional<std::size_t> ShadowStack::find_deferred_esp(Addr esp) const {
  for (std::size_t i = entries_.size(); i-- > 0;)
    if (entries_[i].deferred && entries_[i].esp == esp) return i;
  return std::nullopt;
}

bool ShadowStack::monotonic() const {
  for (std::size_t i = 1; i < entries_.size(); ++i)
    if (entries_[i].esp >= entries_[i - 1].esp) return false;
  return true;
}

}  // namespace apimon::monitor
