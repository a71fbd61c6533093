#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "hdrfuse/hdrfuse.hpp"

using namespace hdrfuse;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

}  // namespace

TEST(Ppm, Roundtrip) {
  TempDir dir("hdrfuse_ppm");
  LdrFrame f(5, 3, 0.0);
  for (std::size_t i = 0; i < f.data.size(); ++i) f.data[i] = static_cast<std::uint8_t>(i * 17);
  write_ppm(dir.path / "a.ppm", f);
  const LdrFrame g = read_ppm(dir.path / "a.ppm");
  EXPECT_EQ(g.width, 5);
  EXPECT_EQ(g.height, 3);
  EXPECT_EQ(g.data, f.data);
  EXPECT_EQ(slurp(dir.path / "a.ppm").substr(0, 11), "P6\n5 3\n255\n");
}

TEST(Ppm, HeaderCommentsAndErrors) {
  TempDir dir("hdrfuse_ppm_err");
  spit(dir.path / "c.ppm", std::string("P6 # made by hand\n1 1\n# depth\n255\n") + "\x01\x02\x03");
  const LdrFrame f = read_ppm(dir.path / "c.ppm");
  EXPECT_EQ(f.at(0), (Intensity{1, 2, 3}));
  spit(dir.path / "d.ppm", "P6\n2 2\n255\n\x01\x02");
  EXPECT_THROW(read_ppm(dir.path / "d.ppm"), IoError);
  spit(dir.path / "e.ppm", "P6\n1 1\n65535\n\x01\x02\x03\x04\x05\x06");
  EXPECT_THROW(read_ppm(dir.path / "e.ppm"), IoError);
  spit(dir.path / "f.ppm", "P3\n1 1\n255\n1 2 3\n");
  EXPECT_THROW(read_ppm(dir.path / "f.ppm"), IoError);
  spit(dir.path / "g.ppm", "P6\n-1 1\n255\n");
  EXPECT_THROW(read_ppm(dir.path / "g.ppm"), IoError);
  EXPECT_THROW(read_ppm(dir.path / "missing.ppm"), IoError);
}

TEST(FrameDump, SidecarRoundtrip) {
  TempDir dir("hdrfuse_dump");
  LdrFrame f(2, 2, 0.0123456789);
  f.set(3, {9, 8, 7});
  write_frame_dump(dir.path / "x.ppm", f);
  EXPECT_EQ(sidecar_path(dir.path / "x.ppm"), dir.path / "x.txt");
  EXPECT_EQ(slurp(dir.path / "x.txt").substr(0, 2), "t=");
  const LdrFrame g = read_frame_dump(dir.path / "x.ppm");
  EXPECT_EQ(g.exposure, f.exposure);
  EXPECT_EQ(g.data, f.data);
  fs::remove(dir.path / "x.txt");
  EXPECT_THROW(read_frame_dump(dir.path / "x.ppm"), IoError);
  spit(dir.path / "x.txt", "t=0\n");
  EXPECT_THROW(read_frame_dump(dir.path / "x.ppm"), IoError);
  spit(dir.path / "x.txt", "exposure 1\n");
  EXPECT_THROW(read_frame_dump(dir.path / "x.ppm"), IoError);
}

TEST(FrameDump, DirectoryIsSortedByName) {
  TempDir dir("hdrfuse_dumpdir");
  for (int k : {2, 0, 1}) write_frame_dump(dir.path / ("f" + std::to_string(k) + ".ppm"), LdrFrame(1, 1, 1.0 + k));
  spit(dir.path / "notes.md", "ignored");
  const auto frames = read_frame_dir(dir.path);
  ASSERT_EQ(frames.size(), 3u);
  EXPECT_EQ(frames[0].exposure, 1.0);
  EXPECT_EQ(frames[2].exposure, 3.0);
  EXPECT_THROW(read_frame_dir(dir.path / "nope"), IoError);
}

TEST(Pfm, RoundtripBothChannelCounts) {
  TempDir dir("hdrfuse_pfm");
  for (int ch : {1, 3}) {
    FloatImage img(4, 3, ch);
    for (std::size_t i = 0; i < img.data.size(); ++i) img.data[i] = 0.5f + static_cast<float>(i) * 1e-3f;
    write_pfm(dir.path / "a.pfm", img);
    const FloatImage back = read_pfm(dir.path / "a.pfm");
    EXPECT_EQ(back.channels, ch);
    EXPECT_EQ(back.width, 4);
    EXPECT_EQ(back.height, 3);
    EXPECT_EQ(back.data, img.data);
  }
  FloatImage two(1, 1, 2);
  EXPECT_THROW(write_pfm(dir.path / "b.pfm", two), IoError);
}

TEST(Pfm, BottomRowFirstLittleEndian) {
  TempDir dir("hdrfuse_pfm_order");
  FloatImage img(1, 2, 1);
  img.data = {1.0f, 2.0f};  // top, bottom
  write_pfm(dir.path / "o.pfm", img);
  const std::string s = slurp(dir.path / "o.pfm");
  const std::string header = "Pf\n1 2\n-1.0\n";
  ASSERT_EQ(s.substr(0, header.size()), header);
  // 2.0f = 0x40000000, written first and little-endian.
  EXPECT_EQ(s.substr(header.size()), std::string("\x00\x00\x00\x40\x00\x00\x80\x3f", 8));
}

TEST(Pfm, ReadsBigEndian) {
  TempDir dir("hdrfuse_pfm_be");
  spit(dir.path / "be.pfm", std::string("Pf\n2 1\n1.0\n") + std::string("\x3f\x80\x00\x00\x40\x40\x00\x00", 8));
  const FloatImage img = read_pfm(dir.path / "be.pfm");
  EXPECT_EQ(img.data, (std::vector<float>{1.0f, 3.0f}));
  spit(dir.path / "short.pfm", "PF\n2 2\n-1.0\n\x00\x00");
  EXPECT_THROW(read_pfm(dir.path / "short.pfm"), IoError);
  spit(dir.path / "zero.pfm", "PF\n1 1\n0\n");
  EXPECT_THROW(read_pfm(dir.path / "zero.pfm"), IoError);
}
