#pragma once

#include <cstdint>

namespace lbsim {

// Simulated time is an integer count of nanoseconds so that event ordering
// and log reproduction are exact; doubles appear only at the reporting edge.
using SimTime = std::int64_t;

constexpr SimTime kNsPerSecond = 1'000'000'000;
constexpr SimTime kNsPerMilli = 1'000'000;

constexpr SimTime seconds_to_ns(double s) {
  return static_cast<SimTime>(s * static_cast<double>(kNsPerSecond) + 0.5);
}

constexpr double ns_to_seconds(SimTime t) {
  return static_cast<double>(t) / static_cast<double>(kNsPerSecond);
}

constexpr SimTime millis_to_ns(double ms) {
  return static_cast<SimTime>(ms * static_cast<double>(kNsPerMilli) + 0.5);
}

}  // namespace lbsim
