#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace eqdisc::detail {

/// FNV-1a 64-bit content checksum, reported as 16 hex digits.
[[nodiscard]] inline std::string fnv1a64_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[h & 0xF];
    h >>= 4;
  }
  return out;
}

}  // namespace eqdisc::detail
