#include <gtest/gtest.h>

#include "actcrop/evalharness.hpp"

namespace actcrop {
namespace {

SyntheticSpec small_spec(Trajectory tr, std::uint64_t seed) {
  SyntheticSpec s;
  s.frames = 24;
  s.trajectory = tr;
  s.seed = seed;
  return s;
}

// Tight box of colour-keyed pixels recomputed straight from the frame.
Box key_box(const Frame& f) {
  Box b{f.width, f.height, -1, -1};
  for (int y = 0; y < f.height; ++y)
    for (int x = 0; x < f.width; ++x)
      if (static_cast<int>(f.at(x, y, 0)) - f.at(x, y, 1) > 100) {
        b.left = std::min(b.left, x);
        b.top = std::min(b.top, y);
        b.right = std::max(b.right, x);
        b.bottom = std::max(b.bottom, y);
      }
  return b;
}

TEST(Synthetic, StaticSubjectGivesConstantTruth) {
  SyntheticSpec s = small_spec(Trajectory::Linear, 3);
  s.velocity = {0, 0};
  const SyntheticVideo v = generate_synthetic(s);
  for (int t = 1; t < s.frames; ++t) EXPECT_EQ(v.ground_truth[t].point(), v.ground_truth[0].point());
}

TEST(Synthetic, LinearVelocityAdvancesExactly) {
  SyntheticSpec s = small_spec(Trajectory::Linear, 1);
  s.velocity = {2, 0};
  const SyntheticVideo v = generate_synthetic(s);
  for (int t = 1; t < s.frames; ++t) {
    EXPECT_DOUBLE_EQ(v.ground_truth[t].x - v.ground_truth[t - 1].x, 2.0);
    EXPECT_DOUBLE_EQ(v.ground_truth[t].y, v.ground_truth[0].y);
  }
}

TEST(Synthetic, SameSeedSamePixels) {
  const SyntheticSpec s = small_spec(Trajectory::RandomWalk, 11);
  const SyntheticVideo a = generate_synthetic(s), b = generate_synthetic(s);
  EXPECT_EQ(a.video, b.video);
  EXPECT_EQ(a.ground_truth, b.ground_truth);
  SyntheticSpec s2 = s;
  s2.seed = 12;
  EXPECT_NE(generate_synthetic(s2).video, a.video);
}

TEST(Synthetic, TruthMatchesColourKeyForEveryTrajectory) {
  for (Trajectory tr : {Trajectory::Linear, Trajectory::Sinusoidal, Trajectory::RandomWalk})
    for (BackgroundMotion bg : {BackgroundMotion::Static, BackgroundMotion::Drifting}) {
      SyntheticSpec s = small_spec(tr, 5);
      s.background = bg;
      s.jitter_fraction = 0.2;
      const SyntheticVideo v = generate_synthetic(s);
      ASSERT_EQ(v.video.frame_count(), s.frames);
      for (int t = 0; t < s.frames; ++t) {
        const Box b = key_box(v.video.frames[t]);
        const SquarePatch& g = v.ground_truth[t];
        ASSERT_DOUBLE_EQ(g.x, b.center_x()) << to_string(tr) << " t=" << t;
        ASSERT_DOUBLE_EQ(g.y, b.center_y());
        ASSERT_DOUBLE_EQ(g.d, std::max(b.width(), b.height()));
        ASSERT_GE(b.left, 0);
        ASSERT_LT(b.right, s.frame_w);
      }
    }
}

TEST(Synthetic, CorruptedFrameCount) {
  SyntheticSpec s = small_spec(Trajectory::Linear, 2);
  s.frames = 40;
  s.jitter_fraction = 0.1;
  const SyntheticVideo v = generate_synthetic(s);
  EXPECT_EQ(v.corrupted.size(), 4u);
  EXPECT_TRUE(std::is_sorted(v.corrupted.begin(), v.corrupted.end()));
}

TEST(Synthetic, SubjectThatCannotFitThrows) {
  SyntheticSpec s = small_spec(Trajectory::Linear, 0);
  s.velocity = {10, 0};
  try {
    generate_synthetic(s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SubjectEscapesFrame);
  }
  s = small_spec(Trajectory::Linear, 0);
  s.subject_size = 200;
  EXPECT_THROW(generate_synthetic(s), Error);
}

TEST(TrajectoryNames, ParseRoundTrip) {
  for (Trajectory t : {Trajectory::Linear, Trajectory::Sinusoidal, Trajectory::RandomWalk})
    EXPECT_EQ(parse_trajectory(to_string(t)), t);
  EXPECT_EQ(parse_background("drifting"), BackgroundMotion::Drifting);
  EXPECT_THROW(parse_trajectory("spiral"), Error);
}

PatchTrack track_of(std::initializer_list<SquarePatch> ps) {
  PatchTrack tr;
  int t = 0;
  for (SquarePatch p : ps) {
    p.t = t++;
    tr.patches.push_back(p);
  }
  return tr;
}

TEST(Evaluate, PerfectPrediction) {
  const PatchTrack g = track_of({{10, 10, 10}, {12, 11, 10}, {14, 12, 11}, {16, 13, 12}});
  const TrackMetrics m = evaluate(g, g, g);
  EXPECT_DOUBLE_EQ(m.mean_iou_gt, 1.0);
  EXPECT_DOUBLE_EQ(m.center_rmse, 0.0);
  EXPECT_DOUBLE_EQ(m.containment, 1.0);
  EXPECT_DOUBLE_EQ(m.jitter_raw, m.jitter_smoothed);
}

TEST(Evaluate, DisjointPrediction) {
  const PatchTrack g = track_of({{10, 10, 10}, {10, 10, 10}, {10, 10, 10}});
  const PatchTrack p = track_of({{80, 80, 10}, {80, 80, 10}, {80, 80, 10}});
  const TrackMetrics m = evaluate(p, g, p);
  EXPECT_DOUBLE_EQ(m.mean_iou_gt, 0.0);
  EXPECT_DOUBLE_EQ(m.containment, 0.0);
  EXPECT_DOUBLE_EQ(m.jitter_smoothed, 0.0);
}

TEST(Evaluate, HandBuiltFiveFrames) {
  const PatchTrack g = track_of({{10, 10, 10}, {10, 10, 10}, {10, 10, 10}, {10, 10, 10}, {10, 10, 10}});
  const PatchTrack p = track_of({{10, 10, 10}, {15, 10, 10}, {10, 10, 10}, {10, 20, 10}, {10, 10, 20}});
  const TrackMetrics m = evaluate(p, g, g);
  EXPECT_NEAR(m.mean_iou_gt, (1 + 1.0 / 3 + 1 + 0 + 0.25) / 5, 1e-9);
  EXPECT_NEAR(m.center_rmse, 5.0, 1e-9);
  EXPECT_NEAR(m.containment, 0.8, 1e-9);
  EXPECT_NEAR(m.jitter_smoothed, (10 + std::sqrt(125.0) + std::sqrt(500.0)) / 3, 1e-9);
  EXPECT_NEAR(m.jitter_raw, 0.0, 1e-12);
}

TEST(Evaluate, Errors) {
  const PatchTrack a = track_of({{10, 10, 10}, {10, 10, 10}});
  const PatchTrack b = track_of({{10, 10, 10}});
  EXPECT_THROW(evaluate(a, b, a), Error);
  EXPECT_THROW(evaluate(PatchTrack{}, PatchTrack{}, PatchTrack{}), Error);
}

TEST(Jitter, ShortTracksAreZero) {
  EXPECT_EQ(track_jitter(track_of({{1, 2, 3}, {5, 6, 7}})), 0.0);
  EXPECT_DOUBLE_EQ(track_jitter(track_of({{0, 0, 0}, {1, 0, 0}, {0, 0, 0}})), 2.0);
}

}  // namespace
}  // namespace actcrop
