#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "tiertraffic/frame.hpp"
#include "tiertraffic/image_ops.hpp"
#include "tiertraffic/raw_io.hpp"

namespace tt = tiertraffic;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("tiertraffic_" + name);
}

tt::Frame random_frame(int w, int h, int c, unsigned seed, int index) {
  tt::Frame f(w, h, c, index, index / 15.0);
  std::mt19937 rng(seed);
  for (auto& v : f.data()) v = static_cast<std::uint8_t>(rng() & 0xFF);
  return f;
}

}  // namespace

TEST(VideoSpecTest, FrameCountRounds) {
  tt::VideoSpec spec{320, 180, 15.0, 90.0};
  EXPECT_EQ(spec.frame_count(), 1350);
  EXPECT_THROW((tt::VideoSpec{0, 10, 15.0, 1.0}.validate()), std::invalid_argument);
  EXPECT_THROW((tt::VideoSpec{10, 10, 0.0, 1.0}.validate()), std::invalid_argument);
}

TEST(FrameTest, PlanarLayout) {
  tt::Frame f(4, 3, 3);
  f.at(2, 1, 3) = 77;
  EXPECT_EQ(f.data()[(2 * 3 + 1) * 4 + 3], 77);
  EXPECT_EQ(f.plane(2)[1 * 4 + 3], 77);
  EXPECT_THROW(tt::Frame(4, 3, 2), std::invalid_argument);
}

TEST(RawIoTest, RoundTripIsBitExact) {
  const auto path = temp_path("roundtrip.ttfv");
  std::vector<tt::Frame> frames;
  for (int i = 0; i < 5; ++i) frames.push_back(random_frame(17, 9, 3, 100 + i, i));
  tt::save_raw_sequence(path, frames, 15);
  const auto back = tt::load_raw_sequence(path);
  ASSERT_EQ(back.size(), frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) EXPECT_EQ(back[i], frames[i]);
  std::filesystem::remove(path);
}

TEST(RawIoTest, TruncatedFileReportsOffset) {
  const auto path = temp_path("truncated.ttfv");
  tt::save_raw_sequence(path, {random_frame(8, 8, 1, 1, 0), random_frame(8, 8, 1, 2, 1)}, 15);
  const auto full = std::filesystem::file_size(path);
  std::filesystem::resize_file(path, full - 10);
  try {
    tt::load_raw_sequence(path);
    FAIL() << "expected FormatError";
  } catch (const tt::FormatError& e) {
    EXPECT_EQ(e.offset(), full - 10);
  }
  std::filesystem::remove(path);
}

TEST(RawIoTest, BadMagicRejectedAtZero) {
  const auto path = temp_path("badmagic.ttfv");
  {
    std::ofstream out(path, std::ios::binary);
    out << "NOPE0000000000000000000000000000";
  }
  try {
    tt::load_raw_sequence(path);
    FAIL() << "expected FormatError";
  } catch (const tt::FormatError& e) {
    EXPECT_EQ(e.offset(), 0u);
  }
  std::filesystem::remove(path);
}

TEST(ImageOpsTest, IntegerDecimationGivesBlockMeans) {
  const tt::Frame f = random_frame(8, 6, 3, 7, 0);
  const tt::Frame half = tt::resize(f, 4, 3);
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < 3; ++y) {
      for (int x = 0; x < 4; ++x) {
        const int sum = f.at(c, 2 * y, 2 * x) + f.at(c, 2 * y, 2 * x + 1) + f.at(c, 2 * y + 1, 2 * x) +
                        f.at(c, 2 * y + 1, 2 * x + 1);
        EXPECT_EQ(half.at(c, y, x), static_cast<int>(std::lround(sum / 4.0)));
      }
    }
  }
}

TEST(ImageOpsTest, UpscaleReplicatesPixels) {
  const tt::Frame f = random_frame(5, 4, 1, 9, 0);
  const tt::Frame up = tt::resize(f, 10, 8);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 10; ++x) EXPECT_EQ(up.at(0, y, x), f.at(0, y / 2, x / 2));
  }
}

TEST(ImageOpsTest, IntensityIsRoundedChannelMean) {
  tt::Frame f(1, 1, 3);
  f.at(0, 0, 0) = 10;
  f.at(1, 0, 0) = 11;
  f.at(2, 0, 0) = 11;
  EXPECT_EQ(tt::to_intensity(f).at(0, 0, 0), 11);  // 32/3 = 10.67
  EXPECT_EQ(tt::to_intensity(f).channels(), 1);
}
