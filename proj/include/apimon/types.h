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

#ifndef APIMON_TYPES_H_
#define APIMON_TYPES_H_

#include <compare>
#include <cstdint>

namespace apimon {

// 32-bit flat address in a simulated process.
using Addr = std::uint32_t;
using Pid = std::uint32_t;
using Tid = std::uint32_t;

inline constexpr std::uint32_t kPageSize = 4096;

inline constexpr Addr page_base(Addr a) { return a & ~(kPageSize - 1); }

// Half-open address interval [lo, hi).
struct AddrRange {
  Addr lo = 0;
  Addr hi = 0;

  bool contains(Addr a) const { return a >= lo && a < hi; }
  bool overlaps(const AddrRange& o) const { return lo < o.hi && o.lo < hi; }
  bool empty() const { return hi <= lo; }

  friend auto operator<=>(const AddrRange&, const AddrRange&) = default;
};

// Identifies a thread across the whole machine.
struct ThreadKey {
  Pid pid = 0;
  Tid tid = 0;

  friend auto operator<=>(const ThreadKey&, const ThreadKey&) = default;
};

}  // namespace apimon

#endif  // APIMON_TYPES_H_
