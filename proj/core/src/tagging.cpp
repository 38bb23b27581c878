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

#include "boundtag/tagging.hpp"

#include <bit>
#include <sstream>

namespace boundtag {
namespace {

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << "0x" << std::hex << v;
  return os.str();
}

}  // namespace

TaggedAddress encode_prism(Addr sa, Addr ea, FrameClass cls) {
  if (sa > ea) throw EncodingError("encode_prism: sa " + hex(sa) + " above ea " + hex(ea));
  if (ea > kRawMask) throw EncodingError("encode_prism: ea " + hex(ea) + " outside 47-bit space");
  if (cls == FrameClass::Small) {
    if ((sa >> 16) != (ea >> 16)) {
      throw EncodingError("encode_prism: small object " + hex(sa) + ".." + hex(ea) +
                          " straddles a 64KB frame");
    }
    return TaggedAddress(((ea & 0xFFFF) << kTagShift) | sa);
  }
  if ((ea & 0xFFFF) != 0) throw EncodingError("encode_prism: large ea " + hex(ea) + " not 64KB-aligned");
  if ((sa >> 32) != (ea >> 32)) {
    throw EncodingError("encode_prism: large object " + hex(sa) + ".." + hex(ea) +
                        " straddles a 4GB frame");
  }
  const std::uint64_t tag_offset = (ea & 0xFFFF'FFFFULL) >> 16;
  return TaggedAddress(kLargeClassBit | (tag_offset << kTagShift) | sa);
}

Addr compute_ea(TaggedAddress ksa) {
  const std::uint64_t v = ksa.value();
  if ((v & kLargeClassBit) == 0) {
    const std::uint64_t tag_offset = v >> kTagShift;
    const std::uint64_t frame_start = v & kSmallFrameMask;
    return frame_start + tag_offset;
  }
  const std::uint64_t frame_offset = (v >> 31) & 0xFFFF'0000ULL;
  const std::uint64_t frame_start = v & kLargeFrameMask;
  return frame_start + frame_offset;
}

Addr compute_ea_checked(TaggedAddress ksa) {
  const Addr ea = compute_ea(ksa);
  const Addr raw = ksa.value() & kRawMask;
  if (raw > ea) {
    throw EncodingError("pointer " + hex(ksa.value()) + " lies above its decoded end address " + hex(ea));
  }
  return ea;
}

TaggedAddress encode_pow2(Addr sa, unsigned log2_size) {
  if (log2_size > 46) throw EncodingError("encode_pow2: log2 size " + std::to_string(log2_size) + " > 46");
  if (sa > kRawMask) throw EncodingError("encode_pow2: sa " + hex(sa) + " outside 47-bit space");
  const std::uint64_t align = 1ULL << log2_size;
  if ((sa & (align - 1)) != 0) {
    throw EncodingError("encode_pow2: sa " + hex(sa) + " not aligned to " + hex(align));
  }
  return TaggedAddress((static_cast<std::uint64_t>(log2_size) << kTagShift) | sa);
}

unsigned pow2_log2(TaggedAddress p) { return static_cast<unsigned>(p.tag_area()); }

std::uint64_t pow2_aligned_size(TaggedAddress p) {
  const unsigned k = pow2_log2(p);
  // Tags above 63 cannot come from encode_pow2; treat them as an empty region.
  return k < 64 ? (1ULL << k) : 0;
}

TaggedAddress encode_ea32(Addr sa, Addr ea) {
  if (ea > kRaw32Mask) throw EncodingError("encode_ea32: ea " + hex(ea) + " does not fit 32 bits");
  if (sa > ea) throw EncodingError("encode_ea32: sa " + hex(sa) + " above ea " + hex(ea));
  return TaggedAddress((ea << 32) | sa);
}

Addr decode_ea32(TaggedAddress p) { return p.value() >> 32; }

std::uint64_t strip_mask(Mode mode) { return mode == Mode::Prism32 ? kRaw32Mask : kRawMask; }

Addr strip_tag(TaggedAddress p, Mode mode) { return p.value() & strip_mask(mode); }

std::uint64_t next_pow2(std::uint64_t n) { return n <= 1 ? 1 : std::bit_ceil(n); }

unsigned log2_exact(std::uint64_t pow2) { return static_cast<unsigned>(std::countr_zero(pow2)); }

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::Prism: return "prism";
    case Mode::Pow2: return "pow2";
    case Mode::Prism32: return "prism32";
  }
  return "?";
}

Mode parse_mode(std::string_view name) {
  if (name == "prism") return Mode::Prism;
  if (name == "pow2") return Mode::Pow2;
  if (name == "prism32") return Mode::Prism32;
  throw std::invalid_argument("unknown mode '" + std::string(name) + "' (expected prism, pow2 or prism32)");
}

}  // namespace boundtag
