#pragma once

// Radiometric camera model: inverse response curves, vignetting, the
// signal-dependent noise model, and detectable ranges of an exposure program.

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "hdrfuse/image_io.hpp"
#include "hdrfuse/types.hpp"

namespace hdrfuse {

/// Per-channel inverse camera response g: intensity -> normalized exposure.
///
/// Each table is non-decreasing, non-negative and ends at exactly 1.
class ResponseCurve {
 public:
  using Table = std::array<double, kLevels>;

  ResponseCurve() : ResponseCurve(linear()) {}

  /// Validates and adopts the tables. Throws std::invalid_argument if any
  /// table is decreasing, negative, or does not end at 1.
  explicit ResponseCurve(const std::array<Table, kChannels>& tables) : tables_(tables) {
    for (const auto& t : tables_) {
      if (t[kLevels - 1] != 1.0)
        throw std::invalid_argument("response table must end at exactly 1");
      for (int z = 0; z < kLevels; ++z) {
        if (!(t[z] >= 0.0)) throw std::invalid_argument("response table has negative entry");
        if (z > 0 && t[z] < t[z - 1])
          throw std::invalid_argument("response table is not monotone");
      }
    }
  }

  /// g(z) = z / 255 on every channel.
  static ResponseCurve linear() { return gamma(1.0); }

  /// g(z) = (z / 255)^gamma on every channel.
  static ResponseCurve gamma(double gamma) {
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
    Table t{};
    for (int z = 0; z < kLevels; ++z) t[z] = std::pow(z / 255.0, gamma);
    t[kLevels - 1] = 1.0;
    return ResponseCurve({t, t, t});
  }

  double inverse(int channel, int z) const { return tables_[channel][z]; }

  Rgb inverse(const Intensity& z) const {
    return {tables_[0][z[0]], tables_[1][z[1]], tables_[2][z[2]]};
  }

  /// Forward response f(x) = max{z : g(z) <= x}, with x clamped to [0, 1].
  int forward(int channel, double x) const {
    const Table& t = tables_[channel];
    x = std::clamp(x, 0.0, 1.0);
    auto it = std::upper_bound(t.begin(), t.end(), x);
    if (it == t.begin()) return 0;
    return static_cast<int>(it - t.begin()) - 1;
  }

  Intensity forward(const Rgb& x) const {
    return {static_cast<std::uint8_t>(forward(0, x[0])),
            static_cast<std::uint8_t>(forward(1, x[1])),
            static_cast<std::uint8_t>(forward(2, x[2]))};
  }

  const Table& table(int channel) const { return tables_[channel]; }

 private:
  std::array<Table, kChannels> tables_;
};

/// Writes 3 lines (R, G, B) of 256 comma-separated values.
inline void write_response_curve(const std::filesystem::path& path, const ResponseCurve& curve) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << std::setprecision(17);
  for (int c = 0; c < kChannels; ++c) {
    for (int z = 0; z < kLevels; ++z) out << (z ? "," : "") << curve.inverse(c, z);
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

inline ResponseCurve read_response_curve(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::array<ResponseCurve::Table, kChannels> tables{};
  std::string line;
  for (int c = 0; c < kChannels; ++c) {
    if (!std::getline(in, line)) throw IoError(path.string() + ": expected 3 lines");
    std::stringstream ss(line);
    std::string cell;
    int z = 0;
    while (std::getline(ss, cell, ',')) {
      if (z >= kLevels) throw IoError(path.string() + ": more than 256 values on a line");
      try {
        tables[c][z++] = std::stod(cell);
      } catch (const std::exception&) {
        throw IoError(path.string() + ": bad value '" + cell + "'");
      }
    }
    if (z != kLevels) throw IoError(path.string() + ": expected 256 values per line");
  }
  try {
    return ResponseCurve(tables);
  } catch (const std::invalid_argument& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

/// Per-pixel, per-channel attenuation in (0, 1].
class VignettingMap {
 public:
  VignettingMap() = default;

  /// Takes a 1- or 3-channel image; a single channel is shared by R, G and B.
  explicit VignettingMap(const FloatImage& img) : width_(img.width), height_(img.height) {
    if (img.channels != 1 && img.channels != 3)
      throw std::invalid_argument("vignetting map needs 1 or 3 channels");
    values_.resize(static_cast<std::size_t>(width_) * height_);
    for (int y = 0; y < height_; ++y)
      for (int x = 0; x < width_; ++x)
        for (int c = 0; c < kChannels; ++c) {
          double v = img.at(x, y, img.channels == 1 ? 0 : c);
          if (!(v > 0.0 && v <= 1.0))
            throw std::invalid_argument("vignetting values must lie in (0, 1]");
          values_[static_cast<std::size_t>(y) * width_ + x][c] = v;
        }
  }

  static VignettingMap uniform(int width, int height) {
    FloatImage img(width, height, 1);
    std::fill(img.data.begin(), img.data.end(), 1.0f);
    return VignettingMap(img);
  }

  /// Radial falloff v(r) = (1 + (r/r0)^2)^-2, with r0 chosen so the image
  /// corners are attenuated to `corner`, then rescaled so the brightest
  /// pixel is exactly 1.
  static VignettingMap radial(int width, int height, double corner = 0.5) {
    if (!(corner > 0.0 && corner <= 1.0))
      throw std::invalid_argument("corner attenuation must lie in (0, 1]");
    const double cx = (width - 1) / 2.0, cy = (height - 1) / 2.0;
    const double rc = std::hypot(cx, cy);
    // (1 + (rc/r0)^2)^-2 = corner
    const double k = 1.0 / std::sqrt(corner) - 1.0;
    FloatImage img(width, height, 1);
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) {
        double v = 1.0;
        if (k > 0.0 && rc > 0.0) {
          double rr = (std::pow(x - cx, 2) + std::pow(y - cy, 2)) / (rc * rc) * k;
          v = 1.0 / ((1.0 + rr) * (1.0 + rr));
        }
        img.at(x, y, 0) = static_cast<float>(v);
      }
    float peak = *std::max_element(img.data.begin(), img.data.end());
    for (auto& v : img.data) v = std::min(1.0f, v / peak);
    return VignettingMap(img);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixel_count() const { return values_.size(); }

  const Rgb& at(std::size_t i) const { return values_[i]; }
  const Rgb& at(int x, int y) const { return values_[static_cast<std::size_t>(y) * width_ + x]; }

  double min_value() const {
    double m = 1.0;
    for (const auto& v : values_) m = std::min({m, v[0], v[1], v[2]});
    return m;
  }

  FloatImage to_image() const {
    FloatImage img(width_, height_, 3);
    for (std::size_t i = 0; i < values_.size(); ++i)
      for (int c = 0; c < kChannels; ++c) img.data[3 * i + c] = static_cast<float>(values_[i][c]);
    return img;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<Rgb> values_;
};

inline VignettingMap read_vignetting(const std::filesystem::path& path) {
  try {
    return VignettingMap(read_pfm(path));
  } catch (const std::invalid_argument& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

/// Signal-dependent noise: Var[X] = a_c * X for each channel. The
/// signal-independent component is dropped.
struct NoiseModel {
  Rgb a{0.0, 0.0, 0.0};

  /// True when some channel carries no noise; such a model cannot be used
  /// for inverse-variance weights directly.
  bool degenerate() const { return !(a[0] > 0.0 && a[1] > 0.0 && a[2] > 0.0); }
};

inline void check_exposure_args(double t, double v) {
  if (!(t > 0.0)) throw std::invalid_argument("exposure time must be positive");
  if (!(v > 0.0 && v <= 1.0)) throw std::invalid_argument("attenuation must lie in (0, 1]");
}

/// Radiance estimate L = g(z) / (t v).
inline double estimate_radiance(const ResponseCurve& curve, int channel, int z, double t, double v) {
  check_exposure_args(t, v);
  return curve.inverse(channel, z) / (t * v);
}

inline Rgb estimate_radiance(const ResponseCurve& curve, const Intensity& z, double t, const Rgb& v) {
  Rgb out{};
  for (int c = 0; c < kChannels; ++c) out[c] = estimate_radiance(curve, c, z[c], t, v[c]);
  return out;
}

/// Variance of a radiance estimate: a L / (t v).
inline double radiance_variance(double a, double radiance, double t, double v) {
  check_exposure_args(t, v);
  if (!(radiance >= 0.0)) throw std::invalid_argument("radiance must be non-negative");
  return a * radiance / (t * v);
}

enum class Exposedness : std::uint8_t { under, well, over };

/// The ordered set of exposure times a camera supports, together with the
/// saturation thresholds that decide which intensities count as well-exposed.
///
/// A channel is under-exposed iff z <= z_lo and over-exposed iff z >= z_hi.
/// x_min = g(z_lo + 1) and x_max = g(z_hi) are per channel.
class ExposureProgram {
 public:
  ExposureProgram(std::vector<double> times, const ResponseCurve& curve, int z_lo = 4, int z_hi = 250)
      : times_(std::move(times)), z_lo_(z_lo), z_hi_(z_hi) {
    if (times_.empty()) throw std::invalid_argument("exposure program needs at least one time");
    std::sort(times_.begin(), times_.end());
    if (std::adjacent_find(times_.begin(), times_.end()) != times_.end())
      throw std::invalid_argument("exposure times must be distinct");
    if (!(times_.front() > 0.0)) throw std::invalid_argument("exposure times must be positive");
    if (!(0 <= z_lo && z_lo + 1 < z_hi && z_hi <= 255))
      throw std::invalid_argument("need 0 <= z_lo < z_lo + 1 < z_hi <= 255");
    for (int c = 0; c < kChannels; ++c) {
      x_min_[c] = curve.inverse(c, z_lo + 1);
      x_max_[c] = curve.inverse(c, z_hi);
      if (!(x_min_[c] > 0.0 && x_min_[c] < x_max_[c]))
        throw std::invalid_argument("response curve gives an empty well-exposed range");
    }
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (int c = 0; c < kChannels; ++c) {
      lo = std::min(lo, x_min_[c] / times_.back());
      hi = std::max(hi, x_max_[c] / times_.front());
    }
    radiance_range_ = {lo, hi};
  }

  /// m times spaced geometrically over [t_min, t_max].
  static std::vector<double> geometric_times(double t_min, double t_max, int m) {
    if (m < 1 || !(t_min > 0.0) || !(t_max >= t_min))
      throw std::invalid_argument("bad geometric time range");
    std::vector<double> out(m);
    for (int i = 0; i < m; ++i)
      out[i] = m == 1 ? t_min : t_min * std::pow(t_max / t_min, static_cast<double>(i) / (m - 1));
    out.back() = t_max;
    return out;
  }

  const std::vector<double>& times() const { return times_; }
  double min_time() const { return times_.front(); }
  double max_time() const { return times_.back(); }
  bool contains(double t) const { return std::binary_search(times_.begin(), times_.end(), t); }

  int z_lo() const { return z_lo_; }
  int z_hi() const { return z_hi_; }
  const Rgb& x_min() const { return x_min_; }
  const Rgb& x_max() const { return x_max_; }

  Exposedness classify(int z) const {
    if (z <= z_lo_) return Exposedness::under;
    if (z >= z_hi_) return Exposedness::over;
    return Exposedness::well;
  }

  /// Irradiances observable without saturation at exposure time t.
  Interval detectable_range(double t, int channel) const {
    if (!contains(t)) throw std::invalid_argument("exposure time not in program");
    return {x_min_[channel] / t, x_max_[channel] / t};
  }

  /// Union of the detectable ranges over all exposure times.
  Interval system_range(int channel) const {
    return {x_min_[channel] / times_.back(), x_max_[channel] / times_.front()};
  }

  /// The radiance range [l_min, l_max] incomplete bounds start from: the
  /// system range taken over all channels.
  const Interval& radiance_range() const { return radiance_range_; }

 private:
  std::vector<double> times_;
  int z_lo_;
  int z_hi_;
  Rgb x_min_{};
  Rgb x_max_{};
  Interval radiance_range_{};
};

}  // namespace hdrfuse
