#pragma once

// 8-bit RGB frames, float maps, and their PPM / PFM file formats.

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "hdrfuse/types.hpp"

namespace hdrfuse {

/// An 8-bit RGB image tagged with the exposure time (seconds) it was taken at.
struct LdrFrame {
  int width = 0;
  int height = 0;
  double exposure = 0.0;
  std::vector<std::uint8_t> data;  // interleaved RGB, row-major, top row first

  LdrFrame() = default;
  LdrFrame(int w, int h, double t)
      : width(w), height(h), exposure(t),
        data(static_cast<std::size_t>(w) * h * kChannels, 0) {}

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }

  Intensity at(std::size_t i) const {
    return {data[3 * i], data[3 * i + 1], data[3 * i + 2]};
  }
  void set(std::size_t i, const Intensity& z) {
    data[3 * i] = z[0];
    data[3 * i + 1] = z[1];
    data[3 * i + 2] = z[2];
  }
};

/// A float image with 1 or 3 channels, row-major, top row first.
struct FloatImage {
  int width = 0;
  int height = 0;
  int channels = 3;
  std::vector<float> data;

  FloatImage() = default;
  FloatImage(int w, int h, int c)
      : width(w), height(h), channels(c),
        data(static_cast<std::size_t>(w) * h * c, 0.0f) {}

  float& at(int x, int y, int c) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  float at(int x, int y, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
};

namespace detail {

// Reads the next whitespace-separated header token, skipping '#' comments.
inline std::string next_header_token(std::istream& in) {
  std::string token;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!token.empty()) break;
      continue;
    }
    token.push_back(static_cast<char>(ch));
  }
  return token;
}

inline int parse_dim(const std::string& token, const std::string& path) {
  try {
    std::size_t used = 0;
    int v = std::stoi(token, &used);
    if (used != token.size() || v <= 0) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    throw IoError(path + ": bad header field '" + token + "'");
  }
}

}  // namespace detail

/// Writes a binary (P6) PPM.
inline void write_ppm(const std::filesystem::path& path, const LdrFrame& frame) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "P6\n" << frame.width << ' ' << frame.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(frame.data.data()),
            static_cast<std::streamsize>(frame.data.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

/// Reads a binary (P6) PPM with maxval 255. The exposure is left at 0.
inline LdrFrame read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::string p = path.string();
  if (detail::next_header_token(in) != "P6") throw IoError(p + ": not a P6 PPM");
  int w = detail::parse_dim(detail::next_header_token(in), p);
  int h = detail::parse_dim(detail::next_header_token(in), p);
  int maxval = detail::parse_dim(detail::next_header_token(in), p);
  if (maxval != 255) throw IoError(p + ": only 8-bit PPM is supported");
  LdrFrame frame(w, h, 0.0);
  in.read(reinterpret_cast<char*>(frame.data.data()),
          static_cast<std::streamsize>(frame.data.size()));
  if (in.gcount() != static_cast<std::streamsize>(frame.data.size()))
    throw IoError(p + ": truncated pixel data");
  return frame;
}

/// Sidecar path for a frame dump: "<stem>.txt" next to the PPM.
inline std::filesystem::path sidecar_path(const std::filesystem::path& ppm) {
  auto s = ppm;
  s.replace_extension(".txt");
  return s;
}

/// Writes `frame` as PPM plus a sidecar text line "t=<seconds>".
inline void write_frame_dump(const std::filesystem::path& ppm, const LdrFrame& frame) {
  write_ppm(ppm, frame);
  std::ofstream side(sidecar_path(ppm));
  if (!side) throw IoError("cannot write sidecar for " + ppm.string());
  side << "t=" << std::setprecision(17) << frame.exposure << '\n';
}

inline LdrFrame read_frame_dump(const std::filesystem::path& ppm) {
  LdrFrame frame = read_ppm(ppm);
  std::ifstream side(sidecar_path(ppm));
  if (!side) throw IoError("missing sidecar for " + ppm.string());
  std::string line;
  std::getline(side, line);
  if (line.rfind("t=", 0) != 0) throw IoError("bad sidecar for " + ppm.string());
  try {
    frame.exposure = std::stod(line.substr(2));
  } catch (const std::exception&) {
    throw IoError("bad exposure in sidecar for " + ppm.string());
  }
  if (!(frame.exposure > 0.0)) throw IoError("non-positive exposure in " + ppm.string());
  return frame;
}

/// Loads every "*.ppm" frame dump in `dir`, sorted by filename.
inline std::vector<LdrFrame> read_frame_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".ppm")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  std::vector<LdrFrame> frames;
  frames.reserve(files.size());
  for (const auto& f : files) frames.push_back(read_frame_dump(f));
  return frames;
}

/// Writes a little-endian PFM. Scanlines are stored bottom-to-top as the
/// format prescribes; in memory the top row comes first.
inline void write_pfm(const std::filesystem::path& path, const FloatImage& img) {
  if (img.channels != 1 && img.channels != 3)
    throw IoError("PFM supports 1 or 3 channels");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << (img.channels == 3 ? "PF" : "Pf") << '\n'
      << img.width << ' ' << img.height << "\n-1.0\n";
  const std::size_t row = static_cast<std::size_t>(img.width) * img.channels;
  std::vector<unsigned char> buf(row * 4);
  for (int y = img.height - 1; y >= 0; --y) {
    for (std::size_t i = 0; i < row; ++i) {
      std::uint32_t bits = std::bit_cast<std::uint32_t>(img.data[y * row + i]);
      for (int b = 0; b < 4; ++b) buf[4 * i + b] = static_cast<unsigned char>(bits >> (8 * b));
    }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  }
  if (!out) throw IoError("write failed: " + path.string());
}

inline FloatImage read_pfm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::string p = path.string();
  std::string magic = detail::next_header_token(in);
  int channels;
  if (magic == "PF")
    channels = 3;
  else if (magic == "Pf")
    channels = 1;
  else
    throw IoError(p + ": not a PFM file");
  int w = detail::parse_dim(detail::next_header_token(in), p);
  int h = detail::parse_dim(detail::next_header_token(in), p);
  double scale;
  try {
    scale = std::stod(detail::next_header_token(in));
  } catch (const std::exception&) {
    throw IoError(p + ": bad scale field");
  }
  if (scale == 0.0) throw IoError(p + ": zero scale field");
  const bool little = scale < 0.0;
  FloatImage img(w, h, channels);
  const std::size_t row = static_cast<std::size_t>(w) * channels;
  std::vector<unsigned char> buf(row * 4);
  for (int y = h - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() != static_cast<std::streamsize>(buf.size()))
      throw IoError(p + ": truncated pixel data");
    for (std::size_t i = 0; i < row; ++i) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) {
        int shift = little ? 8 * b : 8 * (3 - b);
        bits |= static_cast<std::uint32_t>(buf[4 * i + b]) << shift;
      }
      img.data[y * row + i] = std::bit_cast<float>(bits);
    }
  }
  return img;
}

}  // namespace hdrfuse
