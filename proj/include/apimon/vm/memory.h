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

#ifndef APIMON_VM_MEMORY_H_
#define APIMON_VM_MEMORY_H_

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>

#include "apimon/types.h"

namespace apimon::vm {

// Read-only view of a process address space, as exposed to instrumentation.
class MemoryView {
 public:
  virtual ~MemoryView() = default;

  virtual bool is_valid(Addr a) const = 0;
  // All-or-nothing: returns false (and leaves `out` unspecified) if any
  // byte lies on an invalid page.
  virtual bool read(Addr a, std::span<std::uint8_t> out) const = 0;

  std::optional<std::uint32_t> read32(Addr a) const;
};

// Sparse paged memory. A page is valid iff it has been mapped.
class Memory : public MemoryView {
 public:
  Memory() = default;
  Memory(const Memory& other);
  Memory& operator=(const Memory& other);
  Memory(Memory&&) = default;
  Memory& operator=(Memory&&) = default;

  // Maps (zero-filled) every page overlapping [range.lo, range.hi).
  // Already-mapped pages keep their contents.
  void map(AddrRange range);
  void unmap(AddrRange range);

  bool is_valid(Addr a) const override;
  bool read(Addr a, std::span<std::uint8_t> out) const override;
  bool write(Addr a, std::span<const std::uint8_t> bytes);
  bool write32(Addr a, std::uint32_t value);

 private:
  using Page = std::array<std::uint8_t, kPageSize>;
  std::map<Addr, std::unique_ptr<Page>> pages_;  // keyed by page base
};

}  // namespace apimon::vm

#endif  // APIMON_VM_MEMORY_H_
