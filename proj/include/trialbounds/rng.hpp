#pragma once

#include <cstdint>

namespace trialbounds {

// Stateless 64-bit mixer (SplitMix64 finalizer). All randomness in the
// library is derived from this one primitive so that every draw is a pure
// function of (seed, stream label, counter) and generation order never
// matters.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Map 64 random bits to a double in [0, 1).
constexpr double unit_double(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Counter-based uniform stream. Draw i is independent of every other draw
// and of the order in which draws are requested, which makes chunk-parallel
// generation bit-identical to serial generation.
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, std::uint64_t label) noexcept
      : key_(mix64(mix64(seed) ^ label)) {}

  std::uint64_t bits(std::uint64_t counter) const noexcept {
    return mix64(key_ ^ mix64(counter));
  }

  double uniform(std::uint64_t counter) const noexcept {
    return unit_double(bits(counter));
  }

 private:
  std::uint64_t key_;
};

// Small sequential generator (SplitMix64) for consumers that need a stream
// of draws, e.g. one Fisher-Yates shuffle. Seed it from a CounterStream so
// each consumer owns an independent, reproducible stream.
class SequentialRng {
 public:
  explicit SequentialRng(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  double uniform() noexcept { return unit_double(next()); }

  // Uniform integer in [0, k) via 128-bit multiply-shift.
  std::uint64_t below(std::uint64_t k) noexcept {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * k) >> 64);
  }

 private:
  std::uint64_t state_;
};

}  // namespace trialbounds
