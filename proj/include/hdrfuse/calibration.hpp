#pragma once

// Offline calibration: the inverse response curve from an exposure stack,
// and the noise coefficient from repeated captures of a static scene.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "hdrfuse/image_io.hpp"
#include "hdrfuse/radiometry.hpp"

namespace hdrfuse {

struct CrfFitOptions {
  double smoothness = 50.0;
  int sites = 256;  // sample sites, laid out on a uniform grid
};

struct CrfFit {
  ResponseCurve curve;
  double residual = 0.0;  // RMS of the weighted data equations, log domain
};

namespace detail {

// Hat weighting over intensities; zero at both rails.
inline double hat_weight(int z) { return z <= 127 ? z : 255 - z; }

inline std::vector<std::size_t> grid_sites(int width, int height, int count) {
  const double aspect = static_cast<double>(width) / height;
  int nx = std::max(1, static_cast<int>(std::round(std::sqrt(count * aspect))));
  int ny = std::max(1, (count + nx - 1) / nx);
  nx = std::min(nx, width);
  ny = std::min(ny, height);
  std::vector<std::size_t> sites;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      int x = static_cast<int>((i + 0.5) * width / nx);
      int y = static_cast<int>((j + 0.5) * height / ny);
      sites.push_back(static_cast<std::size_t>(y) * width + x);
    }
  return sites;
}

}  // namespace detail

/// Recovers the inverse response from frames of a static scene taken at
/// different exposure times.
///
/// Solves the log-domain least squares problem
///   w(z_ij) [ln g(z_ij) - ln E_i] = w(z_ij) ln t_j
/// with a second-difference smoothness penalty and ln g(128) = 0, per
/// channel, then rescales so that g(255) = 1 and forces monotonicity.
/// Throws CalibrationError if fewer than two distinct exposure times are
/// present or the system is rank deficient.
inline CrfFit fit_response_curve(std::span<const LdrFrame> stack, const CrfFitOptions& opt = {}) {
  if (stack.empty()) throw CalibrationError("empty exposure stack");
  const int width = stack.front().width, height = stack.front().height;
  std::vector<double> times;
  for (const auto& f : stack) {
    if (f.width != width || f.height != height)
      throw CalibrationError("frames in the stack differ in size");
    if (!(f.exposure > 0.0)) throw CalibrationError("frame without a positive exposure time");
    times.push_back(f.exposure);
  }
  std::sort(times.begin(), times.end());
  if (std::unique(times.begin(), times.end()) - times.begin() < 2)
    throw CalibrationError("need at least two distinct exposure times");
  if (static_cast<std::size_t>(width) * height < 50 || opt.sites < 50)
    throw CalibrationError("need at least 50 sample sites");
  if (!(opt.smoothness > 0.0)) throw CalibrationError("smoothness must be positive");

  const auto sites = detail::grid_sites(width, height, opt.sites);
  std::array<ResponseCurve::Table, kChannels> tables{};
  double sq_residual = 0.0;
  std::size_t residual_rows = 0;

  for (int c = 0; c < kChannels; ++c) {
    // Sites whose samples all sit on the rails carry no information.
    std::vector<std::size_t> used;
    for (std::size_t s : sites) {
      bool informative = false;
      for (const auto& f : stack)
        if (detail::hat_weight(f.data[3 * s + c]) > 0) informative = true;
      if (informative) used.push_back(s);
    }
    if (used.size() < 2) throw CalibrationError("all sampled pixels are saturated");

    const int n = kLevels;
    const int cols = n + static_cast<int>(used.size());
    const int data_rows = static_cast<int>(used.size() * stack.size());
    const int rows = data_rows + 1 + (n - 2);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(rows, cols);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(rows);

    int k = 0;
    for (std::size_t i = 0; i < used.size(); ++i)
      for (const auto& f : stack) {
        int z = f.data[3 * used[i] + c];
        double w = detail::hat_weight(z);
        A(k, z) = w;
        A(k, n + static_cast<int>(i)) = -w;
        b(k) = w * std::log(f.exposure);
        ++k;
      }
    A(k++, 128) = 1.0;
    for (int z = 1; z < n - 1; ++z) {
      double w = opt.smoothness * detail::hat_weight(z);
      A(k, z - 1) = w;
      A(k, z) = -2.0 * w;
      A(k, z + 1) = w;
      ++k;
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    if (qr.rank() < cols) throw CalibrationError("response calibration system is rank deficient");
    Eigen::VectorXd x = qr.solve(b);

    Eigen::VectorXd r = (A * x - b).head(data_rows);
    sq_residual += r.squaredNorm();
    residual_rows += data_rows;

    auto& t = tables[c];
    const double top = x(n - 1);
    for (int z = 0; z < n; ++z) t[z] = std::exp(x(z) - top);
    for (int z = 1; z < n; ++z) t[z] = std::max(t[z], t[z - 1]);
    for (int z = 0; z < n; ++z) t[z] = std::min(t[z], 1.0);
    t[n - 1] = 1.0;
  }

  return {ResponseCurve(tables), std::sqrt(sq_residual / static_cast<double>(residual_rows))};
}

/// Mean and variance of g(Z) at one pixel and channel over repeated frames.
struct MeanVariance {
  double mean = 0.0;
  double variance = 0.0;
};

/// Streams repeated frames of one exposure setting and accumulates per-pixel
/// exposure statistics (Welford).
class ExposureStatistics {
 public:
  explicit ExposureStatistics(const ResponseCurve& curve) : curve_(curve) {}

  void add(const LdrFrame& frame) {
    if (count_ == 0) {
      width_ = frame.width;
      height_ = frame.height;
      mean_.assign(frame.data.size(), 0.0);
      m2_.assign(frame.data.size(), 0.0);
    } else if (frame.width != width_ || frame.height != height_) {
      throw CalibrationError("repeated frames differ in size");
    }
    ++count_;
    for (std::size_t i = 0; i < frame.data.size(); ++i) {
      double x = curve_.inverse(static_cast<int>(i % kChannels), frame.data[i]);
      double d = x - mean_[i];
      mean_[i] += d / count_;
      m2_[i] += d * (x - mean_[i]);
    }
  }

  std::size_t frame_count() const { return count_; }

  /// Per-channel (mean, unbiased variance) pairs, one per pixel.
  std::array<std::vector<MeanVariance>, kChannels> samples() const {
    if (count_ < 2) throw CalibrationError("need at least 2 repeated frames per setting");
    std::array<std::vector<MeanVariance>, kChannels> out;
    for (std::size_t i = 0; i < mean_.size(); ++i)
      out[i % kChannels].push_back({mean_[i], m2_[i] / static_cast<double>(count_ - 1)});
    return out;
  }

 private:
  ResponseCurve curve_;
  int width_ = 0;
  int height_ = 0;
  std::size_t count_ = 0;
  std::vector<double> mean_;
  std::vector<double> m2_;
};

struct NoiseFitOptions {
  int bins = 100;
  int z_hi = 250;                  // over-exposure threshold; x_max = g(z_hi)
  double saturation_margin = 0.95; // bins with mean above margin * x_max are dropped
};

struct NoiseFit {
  NoiseModel model;
  std::array<bool, kChannels> degenerate{};
  std::array<std::vector<MeanVariance>, kChannels> bin_medians;  // points used by the fit
};

/// Fits Var = a * mean through the origin on per-bin median variances.
inline NoiseFit fit_noise_from_samples(const std::array<std::vector<MeanVariance>, kChannels>& samples,
                                       const ResponseCurve& curve, const NoiseFitOptions& opt = {}) {
  if (opt.bins < 3) throw CalibrationError("need at least 3 bins");
  NoiseFit fit;
  for (int c = 0; c < kChannels; ++c) {
    const double limit = opt.saturation_margin * curve.inverse(c, opt.z_hi);
    std::vector<std::vector<MeanVariance>> bins(opt.bins);
    for (const auto& s : samples[c]) {
      int b = std::clamp(static_cast<int>(s.mean * opt.bins), 0, opt.bins - 1);
      bins[b].push_back(s);
    }
    double sxy = 0.0, sxx = 0.0;
    for (auto& bin : bins) {
      if (bin.empty()) continue;
      auto mid = bin.begin() + static_cast<std::ptrdiff_t>((bin.size() - 1) / 2);
      std::nth_element(bin.begin(), mid, bin.end(),
                       [](const MeanVariance& a, const MeanVariance& b) { return a.variance < b.variance; });
      if (mid->mean > limit) continue;
      fit.bin_medians[c].push_back(*mid);
      sxy += mid->mean * mid->variance;
      sxx += mid->mean * mid->mean;
    }
    if (fit.bin_medians[c].size() < 3 || !(sxx > 0.0))
      throw CalibrationError("fewer than 3 populated bins for noise fit");
    fit.model.a[c] = sxy / sxx;
    fit.degenerate[c] = !(fit.model.a[c] > 0.0);
  }
  return fit;
}

/// Noise coefficient from repeated captures; one inner vector per exposure
/// setting.
inline NoiseFit fit_noise_coefficient(std::span<const std::vector<LdrFrame>> settings,
                                      const ResponseCurve& curve, const NoiseFitOptions& opt = {}) {
  std::array<std::vector<MeanVariance>, kChannels> all;
  for (const auto& repeats : settings) {
    ExposureStatistics stats(curve);
    for (const auto& f : repeats) stats.add(f);
    auto s = stats.samples();
    for (int c = 0; c < kChannels; ++c) all[c].insert(all[c].end(), s[c].begin(), s[c].end());
  }
  return fit_noise_from_samples(all, curve, opt);
}

}  // namespace hdrfuse
