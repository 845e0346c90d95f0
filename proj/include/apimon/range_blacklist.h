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

#ifndef APIMON_RANGE_BLACKLIST_H_
#define APIMON_RANGE_BLACKLIST_H_

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "apimon/types.h"

namespace apimon::image {

// Set of pairwise-disjoint return ranges. Membership is a single
// upper_bound over a balanced tree keyed by interval start, which is all
// an interval tree degenerates to when intervals never overlap.
class RangeBlacklist {
 public:
  // Throws LoadError if the range is empty or overlaps an existing one;
  // the set is left unchanged in that case.
  void add(AddrRange range);
  // All-or-nothing insertion of several ranges.
  void add(std::span<const AddrRange> ranges);

  // Removes a range previously added with exactly these bounds.
  bool remove(AddrRange range);

  bool contains(Addr addr) const {
    auto it = by_lo_.upper_bound(addr);
    if (it == by_lo_.begin()) return false;
    --it;
    return addr < it->second;
  }

  std::size_t size() const { return by_lo_.size(); }
  bool empty() const { return by_lo_.empty(); }
  std::vector<AddrRange> ranges() const;

 private:
  bool overlaps_existing(AddrRange range) const;

  std::map<Addr, Addr> by_lo_;  // lo -> hi
};

}  // namespace apimon::image

#endif  // APIMON_RANGE_BLACKLIST_H_
