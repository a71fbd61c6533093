#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace hdrfuse {

// Counter-based random numbers: every draw is a pure function of
// (seed, frame, pixel, channel), so captures can be split across threads
// and still reproduce bit for bit.

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t seed) : seed_(splitmix64(seed)) {}

  constexpr std::uint64_t bits(std::uint64_t frame, std::uint64_t pixel, std::uint64_t channel,
                               std::uint64_t draw = 0) const {
    std::uint64_t h = splitmix64(seed_ ^ frame);
    h = splitmix64(h ^ pixel);
    h = splitmix64(h ^ (channel << 32 | draw));
    return h;
  }

  /// Uniform in the open interval (0, 1).
  double uniform(std::uint64_t frame, std::uint64_t pixel, std::uint64_t channel,
                 std::uint64_t draw = 0) const {
    return (static_cast<double>(bits(frame, pixel, channel, draw) >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller.
  double normal(std::uint64_t frame, std::uint64_t pixel, std::uint64_t channel) const {
    double u1 = uniform(frame, pixel, channel, 0);
    double u2 = uniform(frame, pixel, channel, 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t seed_;
};

}  // namespace hdrfuse
