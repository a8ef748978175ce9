#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace qrc {

// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Derives a child seed from a parent and a path of integer tags, e.g.
// derive_seed(master, {N, repetition}). Distinct paths give unrelated seeds.
std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> path) noexcept;

// A seeded random stream. Uses std::mt19937_64, whose output sequence is fixed
// by the standard, and converts bits to doubles by hand, so draws are identical
// across standard library implementations.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lower, double upper) { return lower + (upper - lower) * uniform(); }

  // Independent child stream keyed by tag; does not advance this stream.
  RandomStream child(std::uint64_t tag) const { return RandomStream(derive_seed(seed_, {tag})); }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace qrc
