#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>

namespace cipherflow {

// Seeded random source with platform-independent draws.
//
// std::uniform_int_distribution is implementation-defined, so two standard
// libraries may produce different keys from the same seed. The bounded draws
// here are built directly on the mt19937_64 output sequence, which the
// standard does pin down.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  // Uniform integer in [lo, hi], inclusive.
  std::int64_t between(std::int64_t lo, std::int64_t hi);

  // Uniform real in [0, 1) with 53 bits of precision.
  double unit();

  // Random uppercase A-Z string of the given length.
  std::string letters(std::size_t length);

  // Index drawn proportionally to non-negative weights. At least one weight
  // must be positive.
  std::size_t weighted_index(std::span<const double> weights);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

// Derives an independent child seed, so sub-experiments (per method, per
// trial) do not share a stream.
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t salt);

}  // namespace cipherflow
