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

// Sparse simulated address space.
//
// Regions are mapped explicitly; backing pages are materialized on first
// write and read back as zero until then, so mapping a whole 4GB frame costs
// nothing until it is touched.

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "boundtag/tagging.hpp"

namespace boundtag {

// An access outside every mapped region. Always a sandbox bug, never a guest
// program bug: guest violations are caught by the checks before memory is
// touched.
class SimFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SimMemory {
 public:
  static constexpr std::uint64_t kPageSize = 4096;

  void map(Addr base, std::uint64_t size);
  void unmap(Addr base);
  bool is_mapped(Addr addr, std::uint64_t len) const;
  std::size_t region_count() const { return regions_.size(); }
  std::size_t touched_pages() const { return pages_.size(); }

  std::vector<std::uint8_t> read(Addr addr, std::uint64_t len) const;
  void read_into(Addr addr, std::span<std::uint8_t> out) const;
  void write(Addr addr, std::span<const std::uint8_t> bytes);

  // Little-endian integer access, size in 1..8.
  std::uint64_t read_uint(Addr addr, unsigned size) const;
  void write_uint(Addr addr, unsigned size, std::uint64_t value);
  std::uint64_t read_u64(Addr addr) const { return read_uint(addr, 8); }
  void write_u64(Addr addr, std::uint64_t value) { write_uint(addr, 8, value); }

 private:
  using Page = std::array<std::uint8_t, kPageSize>;

  void require_mapped(Addr addr, std::uint64_t len, const char* what) const;

  std::map<Addr, std::uint64_t> regions_;  // base -> size
  std::unordered_map<std::uint64_t, std::unique_ptr<Page>> pages_;
};

}  // namespace boundtag
