// Copyright 2026 The boundtag Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "boundtag/memory.hpp"

#include <algorithm>
#include <cstring>
#include <sstream>

namespace boundtag {
namespace {

std::string describe(const char* what, Addr addr, std::uint64_t len) {
  std::ostringstream os;
  os << what << " of " << len << " bytes at 0x" << std::hex << addr << " touches unmapped memory";
  return os.str();
}

}  // namespace

void SimMemory::map(Addr base, std::uint64_t size) {
  if (size == 0) return;
  if (base < kLowGuard) {
    std::ostringstream os;
    os << "refusing to map 0x" << std::hex << base << " inside the low 4MB guard";
    throw SimFault(os.str());
  }
  if (base + size < base || base + size > kRawMask + 1) throw SimFault("mapping exceeds the 47-bit space");
  auto next = regions_.lower_bound(base);
  if (next != regions_.end() && next->first < base + size) throw SimFault("overlapping mapping");
  if (next != regions_.begin()) {
    auto prev = std::prev(next);
    if (prev->first + prev->second > base) throw SimFault("overlapping mapping");
  }
  regions_.emplace(base, size);
}

void SimMemory::unmap(Addr base) {
  auto it = regions_.find(base);
  if (it == regions_.end()) throw SimFault("unmap of a region that is not mapped");
  const std::uint64_t first = base / kPageSize;
  const std::uint64_t last = (base + it->second - 1) / kPageSize;
  if (last - first < pages_.size()) {
    for (std::uint64_t p = first; p <= last; ++p) pages_.erase(p);
  } else {
    std::erase_if(pages_, [&](const auto& kv) { return kv.first >= first && kv.first <= last; });
  }
  regions_.erase(it);
}

bool SimMemory::is_mapped(Addr addr, std::uint64_t len) const {
  if (len == 0) return true;
  if (addr + len < addr) return false;
  Addr cursor = addr;
  const Addr end = addr + len;
  while (cursor < end) {
    auto it = regions_.upper_bound(cursor);
    if (it == regions_.begin()) return false;
    --it;
    const Addr region_end = it->first + it->second;
    if (region_end <= cursor) return false;
    cursor = region_end;
  }
  return true;
}

void SimMemory::require_mapped(Addr addr, std::uint64_t len, const char* what) const {
  if (!is_mapped(addr, len)) throw SimFault(describe(what, addr, len));
}

std::vector<std::uint8_t> SimMemory::read(Addr addr, std::uint64_t len) const {
  std::vector<std::uint8_t> out(len);
  read_into(addr, out);
  return out;
}

void SimMemory::read_into(Addr addr, std::span<std::uint8_t> out) const {
  if (out.empty()) return;
  require_mapped(addr, out.size(), "read");
  std::size_t done = 0;
  while (done < out.size()) {
    const Addr a = addr + done;
    const std::uint64_t offset = a % kPageSize;
    const std::size_t chunk = std::min<std::size_t>(out.size() - done, kPageSize - offset);
    auto it = pages_.find(a / kPageSize);
    if (it == pages_.end()) {
      std::memset(out.data() + done, 0, chunk);
    } else {
      std::memcpy(out.data() + done, it->second->data() + offset, chunk);
    }
    done += chunk;
  }
}

void SimMemory::write(Addr addr, std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) return;
  require_mapped(addr, bytes.size(), "write");
  std::size_t done = 0;
  while (done < bytes.size()) {
    const Addr a = addr + done;
    const std::uint64_t offset = a % kPageSize;
    const std::size_t chunk = std::min<std::size_t>(bytes.size() - done, kPageSize - offset);
    auto& page = pages_[a / kPageSize];
    if (!page) page = std::make_unique<Page>(Page{});
    std::memcpy(page->data() + offset, bytes.data() + done, chunk);
    done += chunk;
  }
}

std::uint64_t SimMemory::read_uint(Addr addr, unsigned size) const {
  std::array<std::uint8_t, 8> buf{};
  read_into(addr, std::span<std::uint8_t>(buf.data(), size));
  std::uint64_t v = 0;
  for (unsigned i = 0; i < size; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

void SimMemory::write_uint(Addr addr, unsigned size, std::uint64_t value) {
  std::array<std::uint8_t, 8> buf{};
  for (unsigned i = 0; i < size; ++i) buf[i] = static_cast<std::uint8_t>(value >> (8 * i));
  write(addr, std::span<const std::uint8_t>(buf.data(), size));
}

}  // namespace boundtag
