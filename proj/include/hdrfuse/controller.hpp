#pragma once

// Map-aware exposure time selection.
//
// For every candidate exposure time t the controller scores
//   U(t) = beta * U_e(t) + U_r(t)
// where U_e is the expected number of incomplete points that a frame at t
// would complete, and U_r rewards complete points that would be observed
// validly, in proportion to t over their accumulated weight.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "hdrfuse/map_buffer.hpp"
#include "hdrfuse/radiometry.hpp"

namespace hdrfuse {

/// Probability that a radiance log-uniformly distributed over `bounds`
/// falls inside `detectable`.
inline double saturation_probability(const Interval& bounds, const Interval& detectable) {
  if (!(bounds.lo > 0.0 && detectable.lo > 0.0))
    throw std::invalid_argument("saturation_probability needs positive interval endpoints");
  if (bounds.hi < bounds.lo || detectable.hi < detectable.lo)
    throw std::invalid_argument("saturation_probability needs ordered intervals");
  if (bounds.lo == bounds.hi) return detectable.contains(bounds.lo) ? 1.0 : 0.0;
  const double lo = std::max(bounds.lo, detectable.lo);
  const double hi = std::min(bounds.hi, detectable.hi);
  if (!(hi > lo)) return 0.0;
  return std::clamp(std::log(hi / lo) / std::log(bounds.hi / bounds.lo), 0.0, 1.0);
}

/// Radiances that produce a valid sample at exposure t on a pixel with
/// attenuation v: the detectable irradiance range divided by v.
inline Interval detectable_radiance(const ExposureProgram& program, double t, int channel, double v) {
  return {program.x_min()[channel] / (t * v), program.x_max()[channel] / (t * v)};
}

inline void check_controller_inputs(const RenderedView& view, const VignettingMap& vmap,
                                    const ExposureProgram& program, double t) {
  if (!program.contains(t)) throw std::invalid_argument("exposure time not in program");
  if (vmap.pixel_count() != view.size()) throw std::invalid_argument("vignetting and view sizes differ");
}

inline double exploration_utility(double t, const RenderedView& view, const VignettingMap& vmap,
                                  const ExposureProgram& program) {
  check_controller_inputs(view, vmap, program, t);
  double sum = 0.0;
  for (std::size_t i = 0; i < view.size(); ++i) {
    if (!view.incomplete(i)) continue;
    double p = 1.0;
    for (int c = 0; c < kChannels; ++c)
      p *= saturation_probability(view.bounds[i][c], detectable_radiance(program, t, c, vmap.at(i)[c]));
    sum += p;
  }
  return sum;
}

inline double refinement_utility(double t, const RenderedView& view, const VignettingMap& vmap,
                                 const ExposureProgram& program) {
  check_controller_inputs(view, vmap, program, t);
  double sum = 0.0;
  for (std::size_t i = 0; i < view.size(); ++i) {
    if (view.incomplete(i)) continue;
    bool valid = true;
    for (int c = 0; c < kChannels && valid; ++c)
      valid = program.detectable_range(t, c).contains(view.radiance[i][c] * vmap.at(i)[c]);
    if (valid) sum += t / view.weight[i];
  }
  return sum;
}

struct ControllerConfig {
  double beta = 1.0;             // exploration scale
  double tie_tolerance = 1e-12;  // relative; scores this close count as tied
};

struct UtilityTerms {
  double t = 0.0;
  double exploration = 0.0;
  double refinement = 0.0;
  double total = 0.0;
};

struct ExposureDecision {
  double t = 0.0;
  std::vector<UtilityTerms> trace;  // one entry per candidate, ascending t
};

/// Chooses the argmax of beta * U_e + U_r over the program. Among scores
/// within `tie_tolerance` of the best, the largest t wins.
inline ExposureDecision select_exposure(const RenderedView& view, const VignettingMap& vmap,
                                        const ExposureProgram& program, const ControllerConfig& config = {}) {
  if (!(config.beta >= 0.0)) throw std::invalid_argument("beta must be non-negative");
  ExposureDecision out;
  double best = -std::numeric_limits<double>::infinity();
  for (double t : program.times()) {
    UtilityTerms u{t, exploration_utility(t, view, vmap, program), refinement_utility(t, view, vmap, program), 0.0};
    u.total = config.beta * u.exploration + u.refinement;
    best = std::max(best, u.total);
    out.trace.push_back(u);
  }
  const double floor = best - config.tie_tolerance * std::abs(best);
  for (const auto& u : out.trace)
    if (u.total >= floor) out.t = u.t;
  return out;
}

inline ExposureDecision select_exposure(const MapBuffer& map, const VignettingMap& vmap,
                                        const ExposureProgram& program, const ControllerConfig& config = {}) {
  return select_exposure(render(map), vmap, program, config);
}

enum class SweepKind { additive_up, additive_down, multiplicative_up, multiplicative_down };

/// Baseline controller that ignores the map and sweeps the exposure range.
///
/// Up sweeps start at the shortest time, down sweeps at the longest. Each
/// step adds/subtracts `step` or multiplies/divides by it, snaps to the
/// nearest program time (always moving at least one position), and wraps to
/// the other end once the range end has been used.
class SweepController {
 public:
  SweepController(SweepKind kind, const ExposureProgram& program, double step)
      : kind_(kind), times_(program.times()), step_(step) {
    if (multiplicative() && !(step > 1.0)) throw std::invalid_argument("multiplicative factor must exceed 1");
    if (!multiplicative() && !(step > 0.0)) throw std::invalid_argument("additive step must be positive");
    index_ = upward() ? 0 : times_.size() - 1;
  }

  double current() const { return times_[index_]; }

  /// Advances and returns the new exposure time.
  double advance() {
    const std::size_t last = times_.size() - 1;
    if (upward() && index_ == last) {
      index_ = 0;
      return current();
    }
    if (!upward() && index_ == 0) {
      index_ = last;
      return current();
    }
    const double t = current();
    double target;
    switch (kind_) {
      case SweepKind::additive_up: target = t + step_; break;
      case SweepKind::additive_down: target = t - step_; break;
      case SweepKind::multiplicative_up: target = t * step_; break;
      case SweepKind::multiplicative_down: target = t / step_; break;
    }
    target = std::clamp(target, times_.front(), times_.back());
    std::size_t best = index_;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < times_.size(); ++i) {
      double d = multiplicative() ? std::abs(std::log(times_[i] / target)) : std::abs(times_[i] - target);
      if (d < best_dist) {
        best_dist = d;
        best = i;
      }
    }
    if (upward())
      index_ = std::max(best, index_ + 1);
    else
      index_ = std::min(best, index_ - 1);
    return current();
  }

 private:
  bool multiplicative() const {
    return kind_ == SweepKind::multiplicative_up || kind_ == SweepKind::multiplicative_down;
  }
  bool upward() const { return kind_ == SweepKind::additive_up || kind_ == SweepKind::multiplicative_up; }

  SweepKind kind_;
  std::vector<double> times_;
  double step_;
  std::size_t index_ = 0;
};

}  // namespace hdrfuse
