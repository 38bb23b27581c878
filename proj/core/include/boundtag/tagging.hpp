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

// Tag-area encoding for 64-bit simulated pointers.
//
// A pointer value is split into a 17-bit tag area (bits 47-63) and a 47-bit
// raw address (bits 0-46). Three encodings share that layout:
//
//   Prism    bit 63 is the frame class. Small frames (64KB) keep the low 16
//            bits of EA in bits 47-62; large frames (4GB) keep bits 16-31 of
//            EA's offset inside the frame, EA itself being 64KB-aligned.
//   Pow2     the tag area holds log2 of the power-of-two allocation size.
//   Prism32  raw addresses are 32-bit; bits 32-63 hold EA verbatim.
//
// Everything here is a pure function of its arguments.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace boundtag {

using Addr = std::uint64_t;

inline constexpr int kTagShift = 47;
inline constexpr std::uint64_t kRawMask = 0x7FFF'FFFF'FFFFULL;
inline constexpr std::uint64_t kRaw32Mask = 0xFFFF'FFFFULL;
inline constexpr std::uint64_t kLargeClassBit = 1ULL << 63;

inline constexpr std::uint64_t kSmallFrameSize = 1ULL << 16;
inline constexpr std::uint64_t kLargeFrameSize = 1ULL << 32;
inline constexpr std::uint64_t kSmallFrameMask = 0x7FFF'FFFF'0000ULL;
inline constexpr std::uint64_t kLargeFrameMask = 0x7FFF'0000'0000ULL;

// Accesses to the first 4MB of the simulated address space always fault.
inline constexpr Addr kLowGuard = 1ULL << 22;

enum class Mode : std::uint8_t { Prism, Pow2, Prism32 };

struct ModeConfig {
  Mode mode = Mode::Prism;
  std::uint64_t q = 0;  // bytes of padding between EA and the stored SA
};

enum class FrameClass : std::uint8_t { Small, Large };

class EncodingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TaggedAddress {
 public:
  constexpr TaggedAddress() = default;
  constexpr explicit TaggedAddress(std::uint64_t value) : value_(value) {}

  constexpr std::uint64_t value() const { return value_; }
  constexpr std::uint64_t tag_area() const { return value_ >> kTagShift; }
  constexpr bool is_large() const { return (value_ & kLargeClassBit) != 0; }

  friend constexpr bool operator==(TaggedAddress, TaggedAddress) = default;

 private:
  std::uint64_t value_ = 0;
};

TaggedAddress encode_prism(Addr sa, Addr ea, FrameClass cls);

// Reconstructs EA from any address in [SA, EA] carrying the object's tag.
// Total: garbage in, garbage out, but never a memory access.
Addr compute_ea(TaggedAddress ksa);

// Like compute_ea, but rejects values whose raw part lies above the decoded EA
// (placeholders such as (void*)-1, or pointers that broke the KSA invariant).
Addr compute_ea_checked(TaggedAddress ksa);

inline FrameClass frame_class(TaggedAddress p) {
  return p.is_large() ? FrameClass::Large : FrameClass::Small;
}

TaggedAddress encode_pow2(Addr sa, unsigned log2_size);
unsigned pow2_log2(TaggedAddress p);
std::uint64_t pow2_aligned_size(TaggedAddress p);

TaggedAddress encode_ea32(Addr sa, Addr ea);
Addr decode_ea32(TaggedAddress p);

std::uint64_t strip_mask(Mode mode);
Addr strip_tag(TaggedAddress p, Mode mode);
inline Addr strip_tag(TaggedAddress p) { return strip_tag(p, Mode::Prism); }

// Smallest power of two >= n (n >= 1), and its exponent.
std::uint64_t next_pow2(std::uint64_t n);
unsigned log2_exact(std::uint64_t pow2);

std::string_view to_string(Mode mode);
Mode parse_mode(std::string_view name);  // throws std::invalid_argument

}  // namespace boundtag
