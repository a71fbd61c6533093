#pragma once

// Synthetic data shared by the unit tests and the acceptance binary.

#include <cmath>
#include <vector>

#include "hdrfuse/hdrfuse.hpp"

namespace fixture {

using namespace hdrfuse;

/// 64x48 scene: a 3-decade log gradient across columns, modulated by a
/// factor 2^((y-24)/12) down the rows so sites are not duplicated.
inline Scene calibration_scene() {
  Scene s = make_scene(SceneKind::log_gradient, {64, 48, 1e-3, 1.0, 8, {}});
  for (int y = 0; y < s.height; ++y)
    for (int x = 0; x < s.width; ++x) {
      auto& r = s.radiance[static_cast<std::size_t>(y) * s.width + x];
      const double f = std::pow(2.0, (y - 24) / 12.0);
      for (auto& v : r) v *= f;
    }
  return s;
}

/// One frame per exposure time of an 8-step bracket over [0.25, 64].
inline std::vector<LdrFrame> crf_stack(const ResponseCurve& curve, double noise, std::uint64_t seed) {
  const Scene scene = calibration_scene();
  const auto times = ExposureProgram::geometric_times(0.25, 64.0, 8);
  const ExposureProgram program(times, curve);
  CameraSim sim(curve, VignettingMap::radial(scene.width, scene.height), NoiseModel{{noise, noise, noise}}, program,
                times.front(), 0, seed);
  std::vector<LdrFrame> stack;
  for (double t : times) {
    sim.command_exposure(t);
    stack.push_back(sim.capture(scene));
  }
  return stack;
}

inline double rms_difference(const ResponseCurve& a, const ResponseCurve& b, int channel) {
  double se = 0.0;
  for (int z = 0; z < 256; ++z) {
    const double d = a.inverse(channel, z) - b.inverse(channel, z);
    se += d * d;
  }
  return std::sqrt(se / 256.0);
}

/// Per-pixel exposure statistics from `repeats` captures at each of four
/// exposure times, for a flat-field camera with linear response.
inline std::array<std::vector<MeanVariance>, 3> noise_samples(const Rgb& a, int repeats, std::uint64_t seed) {
  const auto curve = ResponseCurve::linear();
  const Scene scene = make_scene(SceneKind::log_gradient, {64, 16, 1e-3, 1.0, 8, {}});
  const auto times = ExposureProgram::geometric_times(1.0, 8.0, 4);
  const ExposureProgram program(times, curve);
  CameraSim sim(curve, VignettingMap::uniform(scene.width, scene.height), NoiseModel{a}, program, times.front(), 0,
                seed);
  std::array<std::vector<MeanVariance>, 3> all;
  for (double t : times) {
    sim.command_exposure(t);
    ExposureStatistics stats(curve);
    for (int k = 0; k < repeats; ++k) stats.add(sim.capture(scene));
    auto s = stats.samples();
    for (int c = 0; c < 3; ++c) all[c].insert(all[c].end(), s[c].begin(), s[c].end());
  }
  return all;
}

}  // namespace fixture
