#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace arise {

// 64-bit FNV-1a. Stable across platforms and runs; used for derived ids and
// generator seeds, never for security.
constexpr std::uint64_t fnv1a64(std::string_view data,
                                std::uint64_t hash = 0xcbf29ce484222325ULL) noexcept {
  for (const char c : data) {
    hash ^= static_cast<std::uint8_t>(c);
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

inline std::string to_hex(std::uint64_t value) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[value & 0xF];
    value >>= 4;
  }
  return out;
}

}  // namespace arise
