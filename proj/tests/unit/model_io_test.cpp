#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <random>

#include "tiertraffic/model_io.hpp"
#include "tiertraffic/raw_io.hpp"

namespace tt = tiertraffic;

namespace {

tt::Frame noisy(int w, int h, int c, unsigned seed) {
  tt::Frame f(w, h, c);
  std::mt19937 rng(seed);
  for (auto& v : f.data()) v = static_cast<std::uint8_t>(rng() % 5 == 0 ? rng() & 0xFF : 100 + rng() % 3);
  return f;
}

}  // namespace

TEST(ModelIoTest, BackgroundRoundTrip) {
  tt::PixelMixtureModel m(7, 5, 3);
  for (unsigned i = 0; i < 40; ++i) m.update(noisy(7, 5, 3, i));
  const auto blob = tt::save_model(m);
  const auto back = tt::load_background_model(blob);
  EXPECT_EQ(tt::save_model(back), blob);
  EXPECT_TRUE(back.initialized());
}

TEST(ModelIoTest, AdaptiveRoundTrip) {
  tt::AdaptiveMixtureModel m(6, 4, 1);
  for (unsigned i = 0; i < 40; ++i) m.update(noisy(6, 4, 1, i));
  const auto blob = tt::save_model(m);
  EXPECT_EQ(tt::save_model(tt::load_adaptive_model(blob)), blob);
}

TEST(ModelIoTest, DetectorRoundTripContinuesIdentically) {
  tt::GfmDetector det(8, 6, 3);
  for (unsigned i = 0; i < 50; ++i) det.detect(noisy(8, 6, 3, i));
  auto copy = tt::load_gfm_detector(tt::save_model(det));
  for (unsigned i = 50; i < 60; ++i) {
    const auto f = noisy(8, 6, 3, i);
    EXPECT_EQ(det.detect(f), copy.detect(f));
  }
  EXPECT_EQ(tt::save_model(det), tt::save_model(copy));
}

TEST(ModelIoTest, CorruptBlobsReportOffsets) {
  tt::GlobalForegroundModel g(3);
  g.update({1, 2, 3});
  auto blob = tt::save_model(g);

  auto bad_magic = blob;
  bad_magic[0] = 'X';
  try {
    tt::load_foreground_model(bad_magic);
    FAIL();
  } catch (const tt::FormatError& e) {
    EXPECT_EQ(e.offset(), 0u);
  }

  auto bad_version = blob;
  bad_version[4] = 9;
  try {
    tt::load_foreground_model(bad_version);
    FAIL();
  } catch (const tt::FormatError& e) {
    EXPECT_EQ(e.offset(), 4u);
  }

  auto truncated = blob;
  truncated.resize(blob.size() - 3);
  EXPECT_THROW(tt::load_foreground_model(truncated), tt::FormatError);

  auto extra = blob;
  extra.push_back(0);
  EXPECT_THROW(tt::load_foreground_model(extra), tt::FormatError);

  // Weight field of the only component set to 0.5: weights no longer sum to one.
  auto unnormalized = blob;
  const double half = 0.5;
  std::memcpy(unnormalized.data() + blob.size() - 16, &half, 8);
  EXPECT_THROW(tt::load_foreground_model(unnormalized), tt::FormatError);
}

TEST(ModelIoTest, PgmRoundTrip) {
  tt::ForegroundMask m(13, 7);
  m.at(0, 0) = 1;
  m.at(12, 6) = 1;
  m.at(5, 3) = 1;
  const auto path = std::filesystem::temp_directory_path() / "tiertraffic_mask.pgm";
  tt::write_pgm(path, m);
  EXPECT_EQ(tt::read_pgm(path), m);
  EXPECT_EQ(std::filesystem::file_size(path), std::string("P5\n13 7\n255\n").size() + 91);
  std::filesystem::remove(path);
}
