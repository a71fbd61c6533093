#pragma once

// Synthetic camera. Produces noisy, saturating 8-bit frames of a radiance
// scene with Z = f(t L V + n), n ~ Normal(0, a t L V), and applies exposure
// commands after a fixed number of frames.

#include <cmath>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hdrfuse/fusion.hpp"
#include "hdrfuse/image_io.hpp"
#include "hdrfuse/radiometry.hpp"
#include "hdrfuse/rng.hpp"

namespace hdrfuse {

/// Ground-truth linear radiance per pixel.
struct Scene {
  int width = 0;
  int height = 0;
  std::vector<Rgb> radiance;  // row-major

  const Rgb& at(int x, int y) const { return radiance[static_cast<std::size_t>(y) * width + x]; }
  std::size_t pixel_count() const { return radiance.size(); }
};

enum class SceneKind { log_gradient, checkerboard, bright_dark_split, from_file };

struct SceneParams {
  int width = 64;
  int height = 16;
  double low = 0.001;   // darkest radiance
  double high = 1.0;    // brightest radiance
  int cell = 8;         // checkerboard cell size in pixels
  std::filesystem::path file;
};

/// Builds a deterministic scene. Grey scenes carry equal radiance on all
/// channels.
///   log_gradient       column x has radiance low * (high/low)^(x / (width-1))
///   checkerboard       cells alternate between low and high
///   bright_dark_split  left half low, right half high
///   from_file          3-channel PFM
inline Scene make_scene(SceneKind kind, const SceneParams& p) {
  if (kind == SceneKind::from_file) {
    FloatImage img = read_pfm(p.file);
    if (img.channels != 3) throw ConfigError("scene file must have 3 channels: " + p.file.string());
    Scene s{img.width, img.height, std::vector<Rgb>(static_cast<std::size_t>(img.width) * img.height)};
    for (std::size_t i = 0; i < s.radiance.size(); ++i)
      for (int c = 0; c < kChannels; ++c) {
        double v = img.data[3 * i + c];
        if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("scene radiance must be finite and >= 0");
        s.radiance[i][c] = v;
      }
    return s;
  }
  if (p.width <= 0 || p.height <= 0) throw ConfigError("scene dimensions must be positive");
  if (!(p.low > 0.0 && p.high >= p.low)) throw ConfigError("scene needs 0 < low <= high");
  if (kind == SceneKind::checkerboard && p.cell <= 0) throw ConfigError("checkerboard cell must be positive");
  Scene s{p.width, p.height, std::vector<Rgb>(static_cast<std::size_t>(p.width) * p.height)};
  for (int y = 0; y < p.height; ++y)
    for (int x = 0; x < p.width; ++x) {
      double l = p.low;
      switch (kind) {
        case SceneKind::log_gradient:
          l = p.width == 1 ? p.low : p.low * std::pow(p.high / p.low, static_cast<double>(x) / (p.width - 1));
          break;
        case SceneKind::checkerboard:
          l = ((x / p.cell + y / p.cell) % 2 == 0) ? p.low : p.high;
          break;
        case SceneKind::bright_dark_split:
          l = x < p.width / 2 ? p.low : p.high;
          break;
        case SceneKind::from_file:
          break;
      }
      s.radiance[static_cast<std::size_t>(y) * p.width + x] = {l, l, l};
    }
  return s;
}

/// Simulated camera with exposure-command lag.
///
/// A command issued before capture k takes effect at capture k + lag.
/// Commands apply in issue order. Capture is not thread-safe; serialize
/// command_exposure and capture per instance.
class CameraSim {
 public:
  CameraSim(ResponseCurve curve, VignettingMap vmap, NoiseModel noise, ExposureProgram program,
            double initial_exposure, int lag = 3, std::uint64_t seed = 0)
      : curve_(std::move(curve)), vmap_(std::move(vmap)), noise_(noise), program_(std::move(program)),
        lag_(lag), rng_(seed), exposure_(initial_exposure) {
    if (lag < 0) throw std::invalid_argument("lag must be non-negative");
    if (!program_.contains(initial_exposure)) throw std::invalid_argument("initial exposure not in program");
    for (double a : noise_.a)
      if (!(a >= 0.0)) throw std::invalid_argument("noise coefficient must be non-negative");
  }

  /// Queues an exposure change; throws if t is not a program time.
  void command_exposure(double t) {
    if (!program_.contains(t)) throw std::invalid_argument("exposure time not in program");
    pending_.push_back({t, frame_index_ + static_cast<std::uint64_t>(lag_)});
  }

  /// Exposure the next capture will use.
  double next_exposure() const {
    double t = exposure_;
    for (const auto& p : pending_)
      if (p.due <= frame_index_) t = p.t;
    return t;
  }

  std::size_t pending() const { return pending_.size(); }
  std::uint64_t frames_captured() const { return frame_index_; }
  int lag() const { return lag_; }

  LdrFrame capture(const Scene& scene) {
    if (scene.width != vmap_.width() || scene.height != vmap_.height())
      throw std::invalid_argument("scene and vignetting dimensions differ");
    while (!pending_.empty() && pending_.front().due <= frame_index_) {
      exposure_ = pending_.front().t;
      pending_.pop_front();
    }
    LdrFrame frame(scene.width, scene.height, exposure_);
    for (std::size_t i = 0; i < scene.pixel_count(); ++i) {
      Intensity z{};
      for (int c = 0; c < kChannels; ++c) {
        const double x = exposure_ * scene.radiance[i][c] * vmap_.at(i)[c];
        double noisy = x;
        if (noise_.a[c] > 0.0 && x > 0.0)
          noisy += std::sqrt(noise_.a[c] * x) * rng_.normal(frame_index_, i, static_cast<std::uint64_t>(c));
        z[c] = static_cast<std::uint8_t>(curve_.forward(c, std::max(noisy, 0.0)));
      }
      frame.set(i, z);
    }
    ++frame_index_;
    return frame;
  }

  const ResponseCurve& curve() const { return curve_; }
  const VignettingMap& vignetting() const { return vmap_; }
  const NoiseModel& noise() const { return noise_; }
  const ExposureProgram& program() const { return program_; }

 private:
  struct Pending {
    double t;
    std::uint64_t due;
  };

  ResponseCurve curve_;
  VignettingMap vmap_;
  NoiseModel noise_;
  ExposureProgram program_;
  int lag_;
  CounterRng rng_;
  double exposure_;
  std::uint64_t frame_index_ = 0;
  std::deque<Pending> pending_;
};

/// How batch merging treats a pixel whose channels are not all well-exposed.
enum class ChannelPolicy {
  independent,  // classical HDR merge: each channel uses its own well-exposed samples
  synchronized  // only samples with all channels well-exposed are used
};

struct GroundTruth {
  int width = 0;
  int height = 0;
  std::vector<Rgb> radiance;
  std::vector<bool> valid;  // every channel had at least one usable sample
};

/// Batch HDR merge: the inverse-variance weighted mean of the per-sample
/// radiance estimates, w_i = 1 / Var[L_i] = t_i v_i / (a L), evaluated with a
/// common reference radiance so the weights share one scale. A noise-free
/// model falls back to a = 1, which leaves the estimate unchanged.
inline GroundTruth batch_ground_truth(std::span<const LdrFrame> frames, const ResponseCurve& curve,
                                      const VignettingMap& vmap, const NoiseModel& noise,
                                      const ExposureProgram& program,
                                      ChannelPolicy policy = ChannelPolicy::independent) {
  if (frames.empty()) throw std::invalid_argument("batch merge needs at least one frame");
  GroundTruth gt;
  gt.width = frames.front().width;
  gt.height = frames.front().height;
  if (vmap.width() != gt.width || vmap.height() != gt.height)
    throw std::invalid_argument("vignetting and frame dimensions differ");
  const std::size_t n = frames.front().pixel_count();
  std::vector<Rgb> num(n, Rgb{}), den(n, Rgb{});
  constexpr double kReference = 1.0;
  for (const auto& f : frames) {
    if (f.width != gt.width || f.height != gt.height) throw std::invalid_argument("frames differ in size");
    for (std::size_t i = 0; i < n; ++i) {
      const Intensity z = f.at(i);
      const Classification cls = classify(z, program);
      if (policy == ChannelPolicy::synchronized && !cls.valid) continue;
      for (int c = 0; c < kChannels; ++c) {
        if (cls.channel[c] != Exposedness::well) continue;
        const double v = vmap.at(i)[c];
        const double a = noise.a[c] > 0.0 ? noise.a[c] : 1.0;
        const double w = 1.0 / radiance_variance(a, kReference, f.exposure, v);
        num[i][c] += w * estimate_radiance(curve, c, z[c], f.exposure, v);
        den[i][c] += w;
      }
    }
  }
  gt.radiance.resize(n);
  gt.valid.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    bool ok = true;
    for (int c = 0; c < kChannels; ++c) {
      ok = ok && den[i][c] > 0.0;
      gt.radiance[i][c] = den[i][c] > 0.0 ? num[i][c] / den[i][c] : 0.0;
    }
    gt.valid[i] = ok;
  }
  return gt;
}

}  // namespace hdrfuse
