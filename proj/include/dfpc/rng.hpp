#pragma once

#include <cstdint>
#include <random>

namespace dfpc {

using Engine = std::mt19937_64;

// Named substreams of a run's master seed. Each (stream, index) pair gets an
// independent engine so per-column work can run in any order.
enum class Stream : std::uint64_t {
  sensing = 1,
  train_signals = 2,
  test_signals = 3,
  validation_signals = 4,
  gaussian_noise = 5,
  flips = 6,
  shuffle = 7,
  fresh_train = 8,
};

std::uint64_t splitmix64(std::uint64_t x);

// Deterministic child seed of (seed, a, b).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

inline std::uint64_t derive_seed(std::uint64_t seed, Stream s, std::uint64_t index = 0) {
  return derive_seed(seed, static_cast<std::uint64_t>(s), index);
}

inline Engine make_engine(std::uint64_t seed, std::uint64_t column) {
  return Engine(derive_seed(seed, 0x636f6cULL, column));
}

}  // namespace dfpc
