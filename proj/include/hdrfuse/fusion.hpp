#pragma once

// Incremental HDR color estimation for a single map point.
//
// A color starts Incomplete, carrying per-channel radiance bounds that are
// tightened by invalid observations. The first valid observation (all three
// channels well-exposed) promotes it to Complete; from then on valid
// observations are averaged in with weight t*v and invalid ones are ignored.

#include <algorithm>
#include <array>
#include <variant>

#include "hdrfuse/radiometry.hpp"
#include "hdrfuse/types.hpp"

namespace hdrfuse {

struct Classification {
  std::array<Exposedness, kChannels> channel{};
  bool valid = false;
};

/// Valid iff every channel lies strictly between z_lo and z_hi.
inline Classification classify(const Intensity& z, const ExposureProgram& program) {
  Classification out;
  out.valid = true;
  for (int c = 0; c < kChannels; ++c) {
    out.channel[c] = program.classify(z[c]);
    out.valid = out.valid && out.channel[c] == Exposedness::well;
  }
  return out;
}

/// One pixel sample of a map point.
struct Observation {
  Intensity z{};
  double t = 0.0;
  Rgb v{1.0, 1.0, 1.0};
};

struct IncompleteColor {
  std::array<Interval, kChannels> bounds{};
  // Set once a channel has been well-exposed; its bounds are then the hull
  // of the well-exposed samples.
  std::array<bool, kChannels> seen_well{};

  static IncompleteColor fresh(const ExposureProgram& program) {
    IncompleteColor c;
    c.bounds.fill(program.radiance_range());
    return c;
  }
};

/// Accumulates Sum g(z_i) and Sum t_i v_i per channel. The estimate is their
/// ratio, which is the inverse-variance weighted mean under the noise model.
struct CompleteColor {
  Rgb sum_signal{};
  Rgb sum_weight{};

  double radiance(int c) const { return sum_signal[c] / sum_weight[c]; }
  Rgb radiance() const { return {radiance(0), radiance(1), radiance(2)}; }
  /// The common weight stored with the color: the green denominator.
  double weight() const { return sum_weight[1]; }
};

/// Result of folding one observation into a color.
enum class FusionOutcome : std::uint8_t { refined, promoted, updated, ignored };

/// Tightens incomplete bounds with an invalid observation. Returns true when
/// a saturation bound contradicted the current interval and was clamped.
inline bool update_incomplete(IncompleteColor& color, const Observation& obs, const Classification& cls,
                              const ResponseCurve& curve, const ExposureProgram& program) {
  const Interval range = program.radiance_range();
  bool conflict = false;
  for (int c = 0; c < kChannels; ++c) {
    Interval& b = color.bounds[c];
    const double tv = obs.t * obs.v[c];
    switch (cls.channel[c]) {
      case Exposedness::well: {
        double l = std::clamp(curve.inverse(c, obs.z[c]) / tv, range.lo, range.hi);
        b = color.seen_well[c] ? hull(b, {l, l}) : Interval{l, l};
        color.seen_well[c] = true;
        break;
      }
      case Exposedness::over:
        if (color.seen_well[c]) break;
        b.lo = std::clamp(std::max(b.lo, program.x_max()[c] / tv), range.lo, range.hi);
        if (b.lo > b.hi) {
          b.hi = b.lo;
          conflict = true;
        }
        break;
      case Exposedness::under:
        if (color.seen_well[c]) break;
        b.hi = std::clamp(std::min(b.hi, program.x_min()[c] / tv), range.lo, range.hi);
        if (b.hi < b.lo) {
          b.lo = b.hi;
          conflict = true;
        }
        break;
    }
  }
  return conflict;
}

/// Turns a valid observation into a Complete color.
inline CompleteColor promote(const Observation& obs, const ResponseCurve& curve) {
  CompleteColor out;
  for (int c = 0; c < kChannels; ++c) {
    check_exposure_args(obs.t, obs.v[c]);
    out.sum_signal[c] = curve.inverse(c, obs.z[c]);
    out.sum_weight[c] = obs.t * obs.v[c];
  }
  return out;
}

/// Averages a valid observation into a Complete color.
inline void update_complete(CompleteColor& color, const Observation& obs, const ResponseCurve& curve) {
  for (int c = 0; c < kChannels; ++c) {
    color.sum_signal[c] += curve.inverse(c, obs.z[c]);
    color.sum_weight[c] += obs.t * obs.v[c];
  }
}

/// Two-state HDR color of one map point.
class HdrColor {
 public:
  explicit HdrColor(const IncompleteColor& c) : state_(c) {}
  explicit HdrColor(const CompleteColor& c) : state_(c) {}

  static HdrColor fresh(const ExposureProgram& program) {
    return HdrColor(IncompleteColor::fresh(program));
  }

  bool complete() const { return std::holds_alternative<CompleteColor>(state_); }
  const IncompleteColor& incomplete_state() const { return std::get<IncompleteColor>(state_); }
  const CompleteColor& complete_state() const { return std::get<CompleteColor>(state_); }

  /// Routes an observation through the state machine. `conflict` is set when
  /// the saturation bounds had to be clamped.
  FusionOutcome observe(const Observation& obs, const ResponseCurve& curve, const ExposureProgram& program,
                        bool* conflict = nullptr) {
    const Classification cls = classify(obs.z, program);
    if (auto* done = std::get_if<CompleteColor>(&state_)) {
      if (!cls.valid) return FusionOutcome::ignored;
      update_complete(*done, obs, curve);
      return FusionOutcome::updated;
    }
    if (cls.valid) {
      state_ = promote(obs, curve);
      return FusionOutcome::promoted;
    }
    bool clash = update_incomplete(std::get<IncompleteColor>(state_), obs, cls, curve, program);
    if (conflict) *conflict = clash;
    return FusionOutcome::refined;
  }

 private:
  std::variant<IncompleteColor, CompleteColor> state_;
};

}  // namespace hdrfuse
