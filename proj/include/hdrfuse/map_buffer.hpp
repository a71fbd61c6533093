#pragma once

// A pixel-aligned grid of HDR colors: the map seen by a static camera, where
// rendering the map into the image plane is the identity.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <vector>

#include "hdrfuse/fusion.hpp"
#include "hdrfuse/image_io.hpp"
#include "hdrfuse/packing.hpp"

namespace hdrfuse {

struct FusionStats {
  std::size_t promoted = 0;
  std::size_t updated = 0;
  std::size_t refined = 0;
  std::size_t ignored = 0;
  std::size_t conflicts = 0;
  // Accumulator writes; always 3 * (promoted + updated) since channels are
  // updated together or not at all.
  std::size_t channel_updates = 0;

  std::size_t total() const { return promoted + updated + refined + ignored; }
};

class MapBuffer {
 public:
  MapBuffer(int width, int height, const ExposureProgram& program)
      : width_(width), height_(height),
        cells_(static_cast<std::size_t>(width) * height, HdrColor::fresh(program)) {
    if (width <= 0 || height <= 0) throw std::invalid_argument("map dimensions must be positive");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return cells_.size(); }

  const HdrColor& at(std::size_t i) const { return cells_[i]; }
  HdrColor& at(std::size_t i) { return cells_[i]; }
  const std::vector<HdrColor>& cells() const { return cells_; }

  std::size_t complete_count() const {
    std::size_t n = 0;
    for (const auto& c : cells_) n += c.complete() ? 1 : 0;
    return n;
  }
  double complete_fraction() const {
    return static_cast<double>(complete_count()) / static_cast<double>(cells_.size());
  }

 private:
  int width_;
  int height_;
  std::vector<HdrColor> cells_;
};

/// Fuses one frame into the map, pixel by pixel.
inline FusionStats fuse_frame(MapBuffer& map, const LdrFrame& frame, const VignettingMap& vmap,
                              const ResponseCurve& curve, const ExposureProgram& program) {
  if (frame.width != map.width() || frame.height != map.height())
    throw std::invalid_argument("frame and map dimensions differ");
  if (vmap.width() != map.width() || vmap.height() != map.height())
    throw std::invalid_argument("vignetting and map dimensions differ");
  if (!(frame.exposure > 0.0)) throw std::invalid_argument("frame has no positive exposure time");
  FusionStats stats;
  for (std::size_t i = 0; i < map.size(); ++i) {
    Observation obs{frame.at(i), frame.exposure, vmap.at(i)};
    bool conflict = false;
    switch (map.at(i).observe(obs, curve, program, &conflict)) {
      case FusionOutcome::promoted:
        ++stats.promoted;
        stats.channel_updates += kChannels;
        break;
      case FusionOutcome::updated:
        ++stats.updated;
        stats.channel_updates += kChannels;
        break;
      case FusionOutcome::refined:
        ++stats.refined;
        break;
      case FusionOutcome::ignored:
        ++stats.ignored;
        break;
    }
    stats.conflicts += conflict ? 1 : 0;
  }
  return stats;
}

/// The radiance, weight and bounds maps the controller reads. Incomplete
/// cells have weight 0; complete cells have degenerate bounds at their
/// radiance.
struct RenderedView {
  int width = 0;
  int height = 0;
  std::vector<Rgb> radiance;
  std::vector<double> weight;
  std::vector<std::array<Interval, kChannels>> bounds;

  std::size_t size() const { return weight.size(); }
  bool incomplete(std::size_t i) const { return weight[i] == 0.0; }
};

inline RenderedView render(const MapBuffer& map) {
  RenderedView view;
  view.width = map.width();
  view.height = map.height();
  view.radiance.resize(map.size());
  view.weight.resize(map.size());
  view.bounds.resize(map.size());
  for (std::size_t i = 0; i < map.size(); ++i) {
    const HdrColor& c = map.at(i);
    if (c.complete()) {
      view.radiance[i] = c.complete_state().radiance();
      view.weight[i] = c.complete_state().weight();
      for (int ch = 0; ch < kChannels; ++ch) view.bounds[i][ch] = {view.radiance[i][ch], view.radiance[i][ch]};
    } else {
      view.radiance[i] = {0.0, 0.0, 0.0};
      view.weight[i] = 0.0;
      view.bounds[i] = c.incomplete_state().bounds;
    }
  }
  return view;
}

// Map snapshot file, all fields little-endian:
//   u32 width, u32 height, f64 l_min, f64 l_max, f64 w_cap,
//   then width*height u64 packed colors, row-major.

namespace detail {

inline void put_le(std::vector<unsigned char>& out, std::uint64_t v, int bytes) {
  for (int b = 0; b < bytes; ++b) out.push_back(static_cast<unsigned char>(v >> (8 * b)));
}

inline std::uint64_t get_le(const unsigned char* p, int bytes) {
  std::uint64_t v = 0;
  for (int b = 0; b < bytes; ++b) v |= static_cast<std::uint64_t>(p[b]) << (8 * b);
  return v;
}

}  // namespace detail

inline std::vector<unsigned char> encode_snapshot(const MapBuffer& map, const PackScale& scale,
                                                  PackStats* stats = nullptr) {
  std::vector<unsigned char> out;
  out.reserve(32 + 8 * map.size());
  detail::put_le(out, static_cast<std::uint32_t>(map.width()), 4);
  detail::put_le(out, static_cast<std::uint32_t>(map.height()), 4);
  detail::put_le(out, std::bit_cast<std::uint64_t>(scale.l_min()), 8);
  detail::put_le(out, std::bit_cast<std::uint64_t>(scale.l_max()), 8);
  detail::put_le(out, std::bit_cast<std::uint64_t>(scale.w_cap()), 8);
  for (const auto& c : map.cells()) detail::put_le(out, pack(c, scale, stats).bits, 8);
  return out;
}

struct Snapshot {
  int width = 0;
  int height = 0;
  PackScale scale;
  std::vector<PackedColor> words;
};

inline Snapshot decode_snapshot(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < 32) throw IoError("snapshot header truncated");
  Snapshot s;
  s.width = static_cast<int>(detail::get_le(bytes.data(), 4));
  s.height = static_cast<int>(detail::get_le(bytes.data() + 4, 4));
  const double l_min = std::bit_cast<double>(detail::get_le(bytes.data() + 8, 8));
  const double l_max = std::bit_cast<double>(detail::get_le(bytes.data() + 16, 8));
  const double w_cap = std::bit_cast<double>(detail::get_le(bytes.data() + 24, 8));
  try {
    s.scale = PackScale(l_min, l_max, w_cap);
  } catch (const std::invalid_argument& e) {
    throw IoError(std::string("snapshot header: ") + e.what());
  }
  const std::size_t n = static_cast<std::size_t>(s.width) * static_cast<std::size_t>(s.height);
  if (s.width <= 0 || s.height <= 0 || bytes.size() != 32 + 8 * n)
    throw IoError("snapshot size does not match its header");
  s.words.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.words[i].bits = detail::get_le(bytes.data() + 32 + 8 * i, 8);
  return s;
}

inline void write_snapshot(const std::filesystem::path& path, const MapBuffer& map, const PackScale& scale,
                           PackStats* stats = nullptr) {
  auto bytes = encode_snapshot(map, scale, stats);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

inline Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_snapshot(bytes);
}

}  // namespace hdrfuse
