#pragma once

#include <cstdint>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace mits {

// Simulation clock and durations are integer milliseconds since the scenario
// epoch. Scenario files and warnings use seconds.
using millis = std::int64_t;

constexpr millis kMillisPerSecond = 1000;
constexpr millis kNever = std::numeric_limits<millis>::max();

constexpr millis seconds_to_millis(std::int64_t const s) {
  return s * kMillisPerSecond;
}

inline millis seconds_to_millis(double const s) {
  return static_cast<millis>(std::llround(s * 1000.0));
}

constexpr double millis_to_seconds(millis const ms) {
  return static_cast<double>(ms) / 1000.0;
}

// Rounds up to whole seconds.
constexpr std::int64_t millis_to_whole_seconds(millis const ms) {
  return ms >= 0 ? (ms + kMillisPerSecond - 1) / kMillisPerSecond
                 : -((-ms) / kMillisPerSecond);
}

// Scenario content that violates a model invariant. The message names the
// offending identifier.
struct validation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace mits
