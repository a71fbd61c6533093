#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace hdrfuse {

/// Per-channel triplet in R, G, B order.
using Rgb = std::array<double, 3>;

/// 8-bit pixel intensity triplet.
using Intensity = std::array<std::uint8_t, 3>;

inline constexpr int kChannels = 3;
inline constexpr int kLevels = 256;

/// Closed interval [lo, hi].
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  constexpr bool contains(double x) const { return lo <= x && x <= hi; }
  constexpr bool contains(const Interval& other) const {
    return lo <= other.lo && other.hi <= hi;
  }
  constexpr double width() const { return hi - lo; }

  friend constexpr bool operator==(const Interval&, const Interval&) = default;
};

/// Smallest interval containing both arguments.
constexpr Interval hull(const Interval& a, const Interval& b) {
  return {a.lo < b.lo ? a.lo : b.lo, a.hi > b.hi ? a.hi : b.hi};
}

// Error hierarchy. The CLI maps ConfigError to exit code 1 and the rest to 2.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};
struct CalibrationError : Error {
  using Error::Error;
};

}  // namespace hdrfuse
