#include "mits/rng.hpp"

#include <cassert>
#include <limits>

namespace mits {

std::uint64_t fnv1a64(std::string_view const s) {
  auto h = std::uint64_t{14695981039346656037ULL};
  for (auto const c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30U)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27U)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31U);
}

rng_stream rng_stream::derive(std::uint64_t const root_seed,
                              std::string_view const name) {
  return rng_stream{splitmix64(root_seed ^ splitmix64(fnv1a64(name)))};
}

double rng_stream::uniform01() {
  return static_cast<double>(engine_() >> 11U) * 0x1.0p-53;
}

std::int64_t rng_stream::uniform_int(std::int64_t const lo,
                                     std::int64_t const hi) {
  assert(lo <= hi);
  auto const span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo);
  if (span == std::numeric_limits<std::uint64_t>::max()) {
    return static_cast<std::int64_t>(engine_());
  }
  auto const range = span + 1;
  // Rejection sampling removes modulo bias.
  auto const limit = std::numeric_limits<std::uint64_t>::max() -
                     std::numeric_limits<std::uint64_t>::max() % range;
  auto x = engine_();
  while (x >= limit) {
    x = engine_();
  }
  return lo + static_cast<std::int64_t>(x % range);
}

bool rng_stream::bernoulli(double const p) {
  if (p >= 1.0) {
    engine_();
    return true;
  }
  return uniform01() < p;
}

}  // namespace mits
