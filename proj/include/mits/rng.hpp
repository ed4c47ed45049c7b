#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace mits {

// Seeded random stream with portable draws. std::mt19937_64 output is fixed
// by the standard; the distribution helpers below are implemented here
// because the std:: distributions are implementation-defined.
class rng_stream {
public:
  explicit rng_stream(std::uint64_t seed) : engine_{seed} {}

  // Child stream for a named component ("detection", "demand", ...).
  // Draws on one child never shift another child's sequence.
  static rng_stream derive(std::uint64_t root_seed, std::string_view name);

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform01();

  // Uniform integer in [lo, hi], inclusive. Requires lo <= hi.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  bool bernoulli(double p);

private:
  std::mt19937_64 engine_;
};

std::uint64_t fnv1a64(std::string_view s);
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace mits
