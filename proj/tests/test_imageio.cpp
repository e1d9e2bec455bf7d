#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "sinr/imageio.hpp"

using namespace sinr;

namespace {

ImageGrid parse(const std::string& s) {
  std::istringstream in(s);
  return read_pnm(in);
}

}  // namespace

TEST(ReadPnm, AsciiLevels) {
  EXPECT_EQ(parse("P2\n1 1\n255\n255\n").data[0], 1.0);
  EXPECT_EQ(parse("P2\n1 1\n255\n0\n").data[0], -1.0);
  EXPECT_DOUBLE_EQ(parse("P2 1 1 255 128").data[0], 2.0 * 128 / 255 - 1.0);
  EXPECT_DOUBLE_EQ(parse("P2\n# comment\n1 1\n255\n128").data[0], 2.0 * 128 / 255 - 1.0);
}

TEST(ReadPnm, AsciiColor) {
  const auto g = parse("P3\n2 1\n15\n0 15 0  15 0 15\n");
  EXPECT_EQ(g.channels, 3);
  EXPECT_EQ(g.at(0, 0, 1), 1.0);
  EXPECT_EQ(g.at(0, 1, 1), -1.0);
}

TEST(ReadPnm, Binary16Bit) {
  std::string s = "P5\n2 1\n65535\n";
  s += std::string("\xff\xff\x00\x00", 4);
  const auto g = parse(s);
  EXPECT_EQ(g.data[0], 1.0);
  EXPECT_EQ(g.data[1], -1.0);
}

TEST(ReadPnm, Errors) {
  EXPECT_THROW(parse("P7\n1 1\n255\n0"), IoError);
  EXPECT_THROW(parse("P2\n1 x\n255\n0"), IoError);
  EXPECT_THROW(parse("P5\n2 2\n255\n\x01"), IoError);
  EXPECT_THROW(parse("P2\n2 1\n255\n1"), IoError);
  EXPECT_THROW(parse("P2\n1 1\n255\n256"), IoError);
  EXPECT_THROW(parse("P2\n1 1\n70000\n0"), IoError);
  EXPECT_THROW(read_pnm("/nonexistent/file.pgm"), IoError);
}

TEST(WritePnm, BinaryRoundTripIsPixelIdentical) {
  std::string payload;
  for (int i = 0; i < 12; ++i) payload.push_back(static_cast<char>(i * 21));
  const std::string file = "P5\n4 3\n255\n" + payload;
  const auto g = parse(file);
  std::ostringstream out;
  write_pnm(g, out);
  EXPECT_EQ(out.str(), file);

  const auto path = std::filesystem::temp_directory_path() / "sinr_rt.ppm";
  ImageGrid c;
  c.width = 3;
  c.height = 2;
  c.channels = 3;
  for (int i = 0; i < 18; ++i) c.data.push_back(2.0 * (i * 13) / 255.0 - 1.0);
  write_pnm(c, path.string());
  const auto back = read_pnm(path.string());
  std::filesystem::remove(path);
  EXPECT_EQ(back.data, c.data);
}

TEST(Dataset, PixelCenters) {
  ImageGrid g;
  g.width = 2;
  g.height = 2;
  g.data = {0.0, 0.1, 0.2, 0.3};
  const auto ds = to_dataset(g);
  EXPECT_EQ(ds.coords(0, 0), -0.5);
  EXPECT_EQ(ds.coords(0, 1), -0.5);
  EXPECT_EQ(ds.coords(1, 0), 0.5);
  EXPECT_EQ(ds.coords(2, 1), 0.5);
  EXPECT_EQ(ds.values(3, 0), 0.3);
}

TEST(Dataset, Extremes) {
  const auto g = synthetic_image(256, 256, 4, 1);
  const auto ds = to_dataset(g);
  EXPECT_EQ(ds.coords.rows(), 65536);
  EXPECT_DOUBLE_EQ(ds.coords.col(0).maxCoeff(), 1.0 - 1.0 / 256);
  EXPECT_DOUBLE_EQ(ds.coords.col(1).minCoeff(), -(1.0 - 1.0 / 256));
  EXPECT_THROW(to_dataset(g, 1.5), PreconditionError);
}

TEST(Synthetic, DeterministicAndInRange) {
  const auto a = synthetic_image(32, 32, 5, 7, 3);
  const auto b = synthetic_image(32, 32, 5, 7, 3);
  EXPECT_EQ(a.data, b.data);
  double mx = 0.0;
  for (double v : a.data) mx = std::max(mx, std::abs(v));
  EXPECT_LE(mx, 0.9 + 1e-12);
  EXPECT_NO_THROW(a.validate());
}
