#include <gtest/gtest.h>

#include "actcrop/retarget.hpp"
#include "test_util.hpp"

namespace actcrop {
namespace {

using testing::random_sequence;

Frame sub_image(const Frame& f, int x0, int y0, int n) {
  Frame out(n, n, f.timestamp);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x)
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = f.at(x0 + x, y0 + y, c);
  return out;
}

TEST(CropPatch, WholeSquareFrameIsIdentity) {
  const Frame f = random_sequence(48, 48, 1).frames[0];
  for (Resample r : {Resample::Nearest, Resample::Bilinear})
    EXPECT_EQ(crop_patch(f, {24, 24, 48, 0}, {48, r}), f) << to_string(r);
}

TEST(CropPatch, IntegerAlignedNearestIsBitExact) {
  const Frame f = random_sequence(120, 90, 1, 3).frames[0];
  EXPECT_EQ(crop_patch(f, {17 + 28, 9 + 28, 56, 0}, {56, Resample::Nearest}), sub_image(f, 17, 9, 56));
}

TEST(CropPatch, ConstantRegionStaysConstantUnderBilinear) {
  Frame f = random_sequence(160, 140, 1, 5).frames[0];
  for (int y = 20; y < 120; ++y)
    for (int x = 30; x < 130; ++x) {
      f.at(x, y, 0) = 12;
      f.at(x, y, 1) = 200;
      f.at(x, y, 2) = 77;
    }
  const Frame out = crop_patch(f, {80, 70, 100, 0}, {50, Resample::Bilinear});
  ASSERT_EQ(out.width, 50);
  for (int y = 0; y < 50; ++y)
    for (int x = 0; x < 50; ++x) {
      ASSERT_EQ(out.at(x, y, 0), 12);
      ASSERT_EQ(out.at(x, y, 1), 200);
      ASSERT_EQ(out.at(x, y, 2), 77);
    }
}

TEST(CropPatch, FractionalPatchAveragesNeighbours) {
  Frame f(16, 16);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x)
      for (int c = 0; c < 3; ++c) f.at(x, y, c) = static_cast<std::uint8_t>(10 * x);
  // Shifting the window by half a pixel lands each sample between columns.
  const Frame out = crop_patch(f, {8.5, 8, 8, 0}, {8, Resample::Bilinear});
  for (int i = 0; i < 8; ++i) EXPECT_EQ(out.at(i, 3, 0), 10 * (i + 4) + 5);
}

TEST(CropPatch, OutOfBoundsAndBadSizeRejected) {
  const Frame f = random_sequence(32, 32, 1).frames[0];
  try {
    crop_patch(f, {5, 16, 20, 0}, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PatchOutOfBounds);
  }
  EXPECT_THROW(crop_patch(f, {16, 16, 16, 0}, {4, Resample::Bilinear}), Error);
}

TEST(RetargetVideo, ShapeContract) {
  const VideoSequence seq = random_sequence(64, 48, 16);
  PatchTrack tr;
  for (int t = 0; t < 16; ++t) tr.patches.push_back({30.0 + 0.3 * t, 24.0, 40.0 + 0.25 * t, t});
  for (int size : {56, 112}) {
    const VideoSequence out = retarget_video(seq, tr, {size, Resample::Bilinear});
    ASSERT_EQ(out.frame_count(), 16);
    for (int t = 0; t < 16; ++t) {
      EXPECT_EQ(out.frames[t].width, size);
      EXPECT_EQ(out.frames[t].height, size);
      EXPECT_EQ(out.frames[t].timestamp, t);
    }
  }
}

TEST(RetargetVideo, ConstantTrackIsFixedWindowCrop) {
  const VideoSequence seq = random_sequence(80, 60, 5, 8);
  PatchTrack tr;
  for (int t = 0; t < 5; ++t) tr.patches.push_back({40, 30, 56, t});
  const VideoSequence out = retarget_video(seq, tr, {56, Resample::Nearest});
  for (int t = 0; t < 5; ++t) EXPECT_EQ(out.frames[t], sub_image(seq.frames[t], 12, 2, 56));
}

TEST(RetargetVideo, LengthMismatch) {
  const VideoSequence seq = random_sequence(32, 32, 3);
  PatchTrack tr;
  tr.patches.push_back({16, 16, 16, 0});
  EXPECT_THROW(retarget_video(seq, tr, {}), Error);
}

TEST(ResampleNames, ParseRoundTrip) {
  EXPECT_EQ(parse_resample("nearest"), Resample::Nearest);
  EXPECT_EQ(parse_resample(to_string(Resample::Bilinear)), Resample::Bilinear);
  EXPECT_THROW(parse_resample("cubic"), Error);
}

}  // namespace
}  // namespace actcrop
