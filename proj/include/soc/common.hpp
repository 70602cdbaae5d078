#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace soc {

// Reserved token ids, fixed for every vocabulary.
constexpr std::uint32_t kPadId = 0;
constexpr std::uint32_t kUnkId = 1;
constexpr std::uint32_t kMaskId = 2;
constexpr std::uint32_t kNumReserved = 3;

inline bool is_reserved(std::uint32_t id) { return id < kNumReserved; }

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// FNV-1a over raw bytes; used for parameter-trajectory checksums.
inline std::uint64_t fnv1a(const void* data, std::size_t n,
                           std::uint64_t h = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace soc
