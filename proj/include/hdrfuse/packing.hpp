#pragma once

// 64-bit storage format for HDR colors.
//
//   Complete:   bits  0..15 R radiance code, 16..31 G, 32..47 B,
//               bits 48..63 weight code (never 0)
//   Incomplete: bytes 0..5 = R lo, R hi, G lo, G hi, B lo, B hi bound codes
//               on a 256-level log grid over [l_min, l_max]; bits 48..63 = 0

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "hdrfuse/fusion.hpp"

namespace hdrfuse {

struct PackedColor {
  std::uint64_t bits = 0;

  std::uint16_t weight_code() const { return static_cast<std::uint16_t>(bits >> 48); }
  bool complete() const { return weight_code() != 0; }

  friend bool operator==(const PackedColor&, const PackedColor&) = default;
};

/// Quantization scale shared by pack and unpack.
///
/// The bound grid is built with multiplications and divisions only, so the
/// codes do not depend on the platform's libm.
class PackScale {
 public:
  PackScale() : PackScale(1.0, 2.0, 1.0) {}
  PackScale(double l_min, double l_max, double w_cap) : l_min_(l_min), l_max_(l_max), w_cap_(w_cap) {
    if (!(l_min > 0.0 && l_max > l_min && w_cap > 0.0))
      throw std::invalid_argument("pack scale needs 0 < l_min < l_max and w_cap > 0");
    const double ratio = l_max / l_min;
    // Bisect for q with q^255 = ratio.
    double lo = 1.0, hi = ratio;
    for (int i = 0; i < 200 && lo < hi; ++i) {
      double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;
      (power255(mid) < ratio ? lo : hi) = mid;
    }
    grid_[0] = l_min;
    for (int k = 1; k < 255; ++k) grid_[k] = grid_[k - 1] * lo;
    grid_[255] = l_max;
    for (int k = 254; k > 0 && grid_[k] >= l_max; --k) grid_[k] = l_max;
  }

  static PackScale from(const ExposureProgram& program) {
    return {program.radiance_range().lo, program.radiance_range().hi, 64.0 * program.max_time()};
  }

  double l_min() const { return l_min_; }
  double l_max() const { return l_max_; }
  double w_cap() const { return w_cap_; }
  double radiance_step() const { return l_max_ / 65535.0; }
  double weight_step() const { return w_cap_ / 65535.0; }

  /// Value of level k on the log-spaced bound grid; exact at both ends.
  double grid(int k) const { return grid_[std::clamp(k, 0, 255)]; }

  /// Largest grid index whose value is <= x (0 below the grid).
  int grid_floor(double x) const {
    auto it = std::upper_bound(grid_.begin(), grid_.end(), x);
    return it == grid_.begin() ? 0 : static_cast<int>(it - grid_.begin()) - 1;
  }

  /// Smallest grid index whose value is >= x (255 above the grid).
  int grid_ceil(double x) const {
    auto it = std::lower_bound(grid_.begin(), grid_.end(), x);
    return it == grid_.end() ? 255 : static_cast<int>(it - grid_.begin());
  }

 private:
  static double power255(double q) {
    double result = 1.0, base = q;
    for (int e = 255; e > 0; e >>= 1) {
      if (e & 1) result *= base;
      base *= base;
    }
    return result;
  }

  double l_min_;
  double l_max_;
  double w_cap_;
  std::array<double, 256> grid_{};
};

struct PackStats {
  std::size_t clamped = 0;
};

namespace detail {

inline std::uint16_t quantize16(double value, double full_scale, bool& clamped) {
  double q = std::round(value / full_scale * 65535.0);
  if (!(q >= 0.0)) {
    clamped = true;
    return 0;
  }
  if (q > 65535.0) {
    clamped = true;
    return 65535;
  }
  return static_cast<std::uint16_t>(q);
}

}  // namespace detail

inline PackedColor pack(const HdrColor& color, const PackScale& scale, PackStats* stats = nullptr) {
  bool clamped = false;
  std::uint64_t bits = 0;
  if (color.complete()) {
    const auto& cc = color.complete_state();
    for (int c = 0; c < kChannels; ++c)
      bits |= static_cast<std::uint64_t>(detail::quantize16(cc.radiance(c), scale.l_max(), clamped)) << (16 * c);
    std::uint16_t w = detail::quantize16(cc.weight(), scale.w_cap(), clamped);
    if (w == 0) w = 1;  // zero is reserved for Incomplete
    bits |= static_cast<std::uint64_t>(w) << 48;
  } else {
    const auto& ic = color.incomplete_state();
    for (int c = 0; c < kChannels; ++c) {
      const Interval& b = ic.bounds[c];
      if (b.lo < scale.l_min() || b.hi > scale.l_max()) clamped = true;
      // Round outward so the stored interval never shrinks.
      bits |= static_cast<std::uint64_t>(scale.grid_floor(b.lo)) << (16 * c);
      bits |= static_cast<std::uint64_t>(scale.grid_ceil(b.hi)) << (16 * c + 8);
    }
  }
  if (clamped && stats) ++stats->clamped;
  return {bits};
}

/// Restores a color. A Complete color comes back with every channel
/// carrying the common weight.
inline HdrColor unpack(PackedColor p, const PackScale& scale) {
  if (p.complete()) {
    CompleteColor cc;
    const double w = p.weight_code() / 65535.0 * scale.w_cap();
    for (int c = 0; c < kChannels; ++c) {
      double l = static_cast<std::uint16_t>(p.bits >> (16 * c)) / 65535.0 * scale.l_max();
      cc.sum_weight[c] = w;
      cc.sum_signal[c] = l * w;
    }
    return HdrColor(cc);
  }
  IncompleteColor ic;
  for (int c = 0; c < kChannels; ++c) {
    int lo = static_cast<int>((p.bits >> (16 * c)) & 0xFF);
    int hi = static_cast<int>((p.bits >> (16 * c + 8)) & 0xFF);
    ic.bounds[c] = {scale.grid(lo), scale.grid(hi)};
  }
  return HdrColor(ic);
}

}  // namespace hdrfuse
