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

#include "apimon/vm/memory.h"

#include <algorithm>

namespace apimon::vm {

std::optional<std::uint32_t> MemoryView::read32(Addr a) const {
  std::array<std::uint8_t, 4> b{};
  if (!read(a, b)) return std::nullopt;
  return std::uint32_t{b[0]} | std::uint32_t{b[1]} << 8 |
         std::uint32_t{b[2]} << 16 | std::uint32_t{b[3]} << 24;
}

Memory::Memory(const Memory& other) { *this = other; }

Memory& Memory::operator=(const Memory& other) {
  if (this == &other) return *this;
  pages_.clear();
  for (const auto& [base, page] : other.pages_)
    pages_.emplace(base, std::make_unique<Page>(*page));
  return *this;
}

void Memory::map(AddrRange range) {
  if (range.empty()) return;
  std::uint64_t last = page_base(range.hi - 1);
  for (std::uint64_t p = page_base(range.lo); p <= last; p += kPageSize) {
    auto& slot = pages_[static_cast<Addr>(p)];
    if (!slot) slot = std::make_unique<Page>(Page{});
  }
}

void Memory::unmap(AddrRange range) {
  if (range.empty()) return;
  std::uint64_t last = page_base(range.hi - 1);
  for (std::uint64_t p = page_base(range.lo); p <= last; p += kPageSize)
    pages_.erase(static_cast<Addr>(p));
}

bool Memory::is_valid(Addr a) const { return pages_.count(page_base(a)) != 0; }

bool Memory::read(Addr a, std::span<std::uint8_t> out) const {
  std::uint64_t addr = a;
  std::size_t done = 0;
  while (done < out.size()) {
    if (addr > 0xffffffffu) return false;
    auto it = pages_.find(page_base(static_cast<Addr>(addr)));
    if (it == pages_.end()) return false;
    std::size_t off = addr - it->first;
    std::size_t n = std::min<std::size_t>(kPageSize - off, out.size() - done);
    std::copy_n(it->second->begin() + off, n, out.begin() + done);
    done += n;
    addr += n;
  }
  return true;
}

bool Memory::write(Addr a, std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) return true;
  // Validate first so a faulting write has no partial effect.
  std::uint64_t end = std::uint64_t{a} + bytes.size();
  if (end > 0x100000000ull) return false;
  for (std::uint64_t p = page_base(a); p < end; p += kPageSize)
    if (!pages_.count(static_cast<Addr>(p))) return false;
  std::uint64_t addr = a;
  std::size_t done = 0;
  while (done < bytes.size()) {
    Page& page = *pages_.at(page_base(static_cast<Addr>(addr)));
    std::size_t off = addr - page_base(static_cast<Addr>(addr));
    std::size_t n = std::min<std::size_t>(kPageSize - off, bytes.size() - done);
    std::copy_n(bytes.begin() + done, n, page.begin() + off);
    done += n;
    addr += n;
  }
  return true;
}

bool Memory::write32(Addr a, std::uint32_t value) {
  std::array<std::uint8_t, 4> b{static_cast<std::uint8_t>(value),
                                static_cast<std::uint8_t>(value >> 8),
                                static_cast<std::uint8_t>(value >> 16),
                                static_cast<std::uint8_t>(value >> 24)};
  return write(a, b);
}

}  // namespace apimon::vm
