#ifndef LINKMSE_UTIL_HASH_HPP
#define LINKMSE_UTIL_HASH_HPP

#include <cstdint>
#include <string>

namespace linkmse {

// FNV-1a, 64-bit. Used for run manifests; not cryptographic.
inline std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t h = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t fnv1a64(const std::string& s, std::uint64_t h = 0xcbf29ce484222325ull) {
  return fnv1a64(s.data(), s.size(), h);
}

std::uint64_t hash_file(const std::string& path);  // throws IoError
std::string hex64(std::uint64_t v);

}  // namespace linkmse

#endif
