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

#include "apimon/range_blacklist.h"

#include <algorithm>
#include <cstdio>
#include <string>

#include "apimon/error.h"

namespace apimon::image {
namespace {

std::string describe(AddrRange r) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "[0x%08x, 0x%08x)", r.lo, r.hi);
  return buf;
}

}  // namespace

bool RangeBlacklist::overlaps_existing(AddrRange range) const {
  auto it = by_lo_.lower_bound(range.lo);
  if (it != by_lo_.end() && it->first < range.hi) return true;
  if (it != by_lo_.begin()) {
    --it;
    if (it->second > range.lo) return true;
  }
  return false;
}

void RangeBlacklist::add(AddrRange range) {
  if (range.empty()) throw LoadError("empty range " + describe(range));
  if (overlaps_existing(range))
    throw LoadError("range " + describe(range) + " overlaps the blacklist");
  by_lo_.emplace(range.lo, range.hi);
}

void RangeBlacklist::add(std::span<const AddrRange> ranges) {
  std::vector<AddrRange> sorted(ranges.begin(), ranges.end());
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i].empty()) throw LoadError("empty range " + describe(sorted[i]));
    if (overlaps_existing(sorted[i]) ||
        (i > 0 && sorted[i - 1].overlaps(sorted[i])))
      throw LoadError("range " + describe(sorted[i]) + " overlaps the blacklist");
  }
  for (const AddrRange& r : sorted) by_lo_.emplace(r.lo, r.hi);
}

bool RangeBlacklist::remove(AddrRange range) {
  auto it = by_lo_.find(range.lo);
  if (it == by_lo_.end() || it->second != range.hi) return false;
  by_lo_.erase(it);
  return true;
}

std::vector<AddrRange> RangeBlacklist::ranges() const {
  std::vector<AddrRange> out;
  out.reserve(by_lo_.size());
  for (const auto& [lo, hi] : by_lo_) out.push_back({lo, hi});
  return out;
}

}  // namespace apimon::image
