#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"

using namespace hdrfuse;

namespace {

const ExposureProgram& race_program() {
  static const ExposureProgram p(ExposureProgram::geometric_times(1.0, 1000.0, 16), ResponseCurve::linear());
  return p;
}

HdrColor complete_color(const Rgb& l, double w) {
  CompleteColor cc;
  for (int c = 0; c < 3; ++c) {
    cc.sum_weight[c] = w;
    cc.sum_signal[c] = l[c] * w;
  }
  return HdrColor(cc);
}

HdrColor incomplete_color(const std::array<Interval, 3>& b) {
  IncompleteColor ic;
  ic.bounds = b;
  return HdrColor(ic);
}

}  // namespace

TEST(PackScale, GridEndpointsAndOrder) {
  const PackScale s = PackScale::from(race_program());
  EXPECT_EQ(s.grid(0), race_program().radiance_range().lo);
  EXPECT_EQ(s.grid(255), race_program().radiance_range().hi);
  EXPECT_EQ(s.w_cap(), 64.0 * 1000.0);
  for (int k = 1; k < 256; ++k) ASSERT_GT(s.grid(k), s.grid(k - 1));
  // Log spacing: every step has the same ratio up to rounding.
  const double q = std::pow(s.l_max() / s.l_min(), 1.0 / 255.0);
  for (int k = 1; k < 256; ++k) ASSERT_NEAR(s.grid(k) / s.grid(k - 1), q, 1e-9);
}

TEST(PackScale, FloorAndCeil) {
  const PackScale s(0.01, 100.0, 1.0);
  EXPECT_EQ(s.grid_floor(0.001), 0);
  EXPECT_EQ(s.grid_ceil(1000.0), 255);
  for (int k = 0; k < 256; ++k) {
    ASSERT_EQ(s.grid_floor(s.grid(k)), k);
    ASSERT_EQ(s.grid_ceil(s.grid(k)), k);
  }
  const double mid = std::sqrt(s.grid(40) * s.grid(41));
  EXPECT_EQ(s.grid_floor(mid), 40);
  EXPECT_EQ(s.grid_ceil(mid), 41);
  EXPECT_THROW(PackScale(0.0, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(PackScale(1.0, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(PackScale(0.1, 1.0, 0.0), std::invalid_argument);
}

TEST(Pack, CompleteRoundtrip) {
  const PackScale s = PackScale::from(race_program());
  const HdrColor c = complete_color({0.5, 0.5, 0.5}, 1.0);
  const PackedColor p = pack(c, s);
  EXPECT_TRUE(p.complete());
  const HdrColor back = unpack(p, s);
  ASSERT_TRUE(back.complete());
  for (int ch = 0; ch < 3; ++ch) EXPECT_LE(std::abs(back.complete_state().radiance(ch) - 0.5), s.radiance_step());
  EXPECT_LE(std::abs(back.complete_state().weight() - 1.0), s.weight_step());
}

TEST(Pack, CompleteLayout) {
  const PackScale s(0.001, 2.0, 100.0);
  const PackedColor p = pack(complete_color({1.0, 0.5, 2.0}, 50.0), s);
  EXPECT_EQ(p.bits & 0xFFFF, 32768u);           // round(0.5 * 65535)
  EXPECT_EQ((p.bits >> 16) & 0xFFFF, 16384u);   // round(0.25 * 65535)
  EXPECT_EQ((p.bits >> 32) & 0xFFFF, 65535u);
  EXPECT_EQ(p.weight_code(), 32768u);
}

TEST(Pack, TinyWeightKeepsNonzeroCode) {
  const PackScale s = PackScale::from(race_program());
  const PackedColor p = pack(complete_color({0.01, 0.01, 0.01}, 1e-9), s);
  EXPECT_EQ(p.weight_code(), 1u);
  EXPECT_TRUE(p.complete());
}

TEST(Pack, FullRangeIncompleteIsExact) {
  const PackScale s = PackScale::from(race_program());
  const Interval full = race_program().radiance_range();
  const HdrColor c = incomplete_color({full, full, full});
  const PackedColor p = pack(c, s);
  EXPECT_FALSE(p.complete());
  EXPECT_EQ(p.bits, 0x0000FF00FF00FF00ull);
  const HdrColor back = unpack(p, s);
  ASSERT_FALSE(back.complete());
  for (int ch = 0; ch < 3; ++ch) EXPECT_EQ(back.incomplete_state().bounds[ch], full);
}

TEST(Pack, ClampsAndCounts) {
  const PackScale s(0.01, 1.0, 10.0);
  PackStats stats;
  const PackedColor hot = pack(complete_color({5.0, 0.5, 0.5}, 100.0), s, &stats);
  EXPECT_EQ(stats.clamped, 1u);
  EXPECT_EQ(hot.bits & 0xFFFF, 65535u);
  EXPECT_EQ(hot.weight_code(), 65535u);
  pack(incomplete_color({Interval{0.001, 0.5}, Interval{0.02, 0.5}, Interval{0.02, 0.5}}), s, &stats);
  EXPECT_EQ(stats.clamped, 2u);
  pack(complete_color({0.5, 0.5, 0.5}, 1.0), s, &stats);
  EXPECT_EQ(stats.clamped, 2u);
}

TEST(Pack, RandomRoundtripBounds) {
  const PackScale s = PackScale::from(race_program());
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double llo = std::log(s.l_min()), lhi = std::log(s.l_max());
  const double q = std::exp((lhi - llo) / 255.0);
  for (int trial = 0; trial < 20000; ++trial) {
    if (trial % 2 == 0) {
      const Rgb l{u(rng) * s.l_max(), u(rng) * s.l_max(), u(rng) * s.l_max()};
      const double w = u(rng) * s.w_cap();
      const HdrColor back = unpack(pack(complete_color(l, w), s), s);
      ASSERT_TRUE(back.complete());
      for (int c = 0; c < 3; ++c)
        ASSERT_LE(std::abs(back.complete_state().radiance(c) - l[c]), 0.5 * s.radiance_step() * (1 + 1e-9));
      ASSERT_LE(std::abs(back.complete_state().weight() - w), s.weight_step());
    } else {
      std::array<Interval, 3> b{};
      for (auto& iv : b) {
        double x = std::exp(llo + u(rng) * (lhi - llo)), y = std::exp(llo + u(rng) * (lhi - llo));
        iv = {std::min(x, y), std::max(x, y)};
      }
      const HdrColor back = unpack(pack(incomplete_color(b), s), s);
      ASSERT_FALSE(back.complete());
      for (int c = 0; c < 3; ++c) {
        const Interval& got = back.incomplete_state().bounds[c];
        ASSERT_TRUE(got.contains(b[c]));
        // At most one grid step of widening on each side.
        ASSERT_GE(got.lo, b[c].lo / q * (1 - 1e-12));
        ASSERT_LE(got.hi, b[c].hi * q * (1 + 1e-12));
      }
    }
  }
}

TEST(Pack, IncompleteBytesAreOrdered) {
  const PackScale s(0.01, 100.0, 1.0);
  const HdrColor c = incomplete_color({Interval{s.grid(3), s.grid(9)}, Interval{s.grid(10), s.grid(200)},
                                       Interval{s.grid(0), s.grid(255)}});
  EXPECT_EQ(pack(c, s).bits, 0x0000FF00C80A0903ull);
}
