#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace classmind {

// Lower-case hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

// 64-bit FNV-1a; stable across platforms and processes.
constexpr std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : data) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace classmind
