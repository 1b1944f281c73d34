#pragma once

#include <cstdint>

namespace dda {

// splitmix64 step; the finalizer behind all derived seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d4a285329c21d5ULL;
  return x ^ (x >> 31);
}

// Deterministic sub-seed derivation: one master seed fans out to independent
// streams for clustering, per-cluster init and per-cluster training.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  return splitmix64(seed ^ splitmix64(salt));
}

namespace seed_salt {
inline constexpr std::uint64_t kKmeans = 0x6b6d65616e73ULL;      // "kmeans"
inline constexpr std::uint64_t kInit = 0x696e6974ULL;            // "init"
inline constexpr std::uint64_t kTrain = 0x747261696eULL;         // "train"
}  // namespace seed_salt

}  // namespace dda
