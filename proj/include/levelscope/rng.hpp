#pragma once

// Seeded random streams. Every stream is a std::mt19937_64 (whose output
// sequence is fixed by the standard) keyed by a splitmix64 hash of
// (master seed, stream id, index), so a draw depends only on its coordinates
// and never on how work is scheduled.

#include <cstdint>
#include <random>

namespace levelscope {

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                 std::uint64_t index = 0) {
  return splitmix64(splitmix64(splitmix64(master) ^ stream) ^ index);
}

inline Rng substream(std::uint64_t master, std::uint64_t stream,
                     std::uint64_t index = 0) {
  return Rng(derive_seed(master, stream, index));
}

// Unbiased integer in [0, n). Implemented by rejection on raw 64-bit output
// so results are identical across standard library implementations.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  if (n == 0) return 0;
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
  std::uint64_t draw = rng();
  while (draw >= limit) draw = rng();
  return draw % n;
}

// Stream identifiers, kept distinct so independent consumers never overlap.
namespace streams {
inline constexpr std::uint64_t kNullSimulation = 0x6E756C6CULL;
inline constexpr std::uint64_t kHistoryDraw = 0x68697374ULL;
inline constexpr std::uint64_t kPayment = 0x70617900ULL;
inline constexpr std::uint64_t kMemberLabel = 0x6C61626CULL;
inline constexpr std::uint64_t kSynthesis = 0x73796E74ULL;
inline constexpr std::uint64_t kLevelK = 0x6C766C6BULL;
inline constexpr std::uint64_t kUniformAgent = 0x756E6966ULL;
}  // namespace streams

}  // namespace levelscope
