#include <fstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "actcrop/evalharness.hpp"
#include "actcrop/parallel.hpp"
#include "actcrop/pipeline.hpp"
#include "actcrop/videoio.hpp"
#include "test_util.hpp"

namespace actcrop {
namespace {

using testing::TempDir;

VideoSequence small_video(int frames = 16) {
  SyntheticSpec s;
  s.frames = frames;
  s.seed = 4;
  s.trajectory = Trajectory::Sinusoidal;
  return generate_synthetic(s).video;
}

TEST(Config, FileValuesApplied) {
  TempDir dir("cfg");
  std::ofstream(dir / "a.conf") << "# comment\n[flow]\nwindow_size = 11\n\n[output]\nout_size=112\n"
                                   "resample = nearest  # trailing\npivot_budget = 5\ndump_tracks = true\n";
  PipelineConfig c;
  apply_config_file(c, dir / "a.conf");
  EXPECT_EQ(c.flow.window_size, 11);
  EXPECT_EQ(c.retarget.out_size, 112);
  EXPECT_EQ(c.retarget.resample, Resample::Nearest);
  EXPECT_EQ(c.budget_for(64), 5);
  EXPECT_TRUE(c.dump_tracks);
  const auto j = config_to_json(c);
  EXPECT_EQ(j.at("out_size").get<int>(), 112);
  EXPECT_EQ(j.at("resample").get<std::string>(), "nearest");
}

TEST(Config, BadInputRejected) {
  PipelineConfig c;
  EXPECT_THROW(apply_config_value(c, "no_such_key", "1"), Error);
  EXPECT_THROW(apply_config_value(c, "k", "four"), Error);
  EXPECT_THROW(apply_config_value(c, "dump_tracks", "maybe"), Error);
  TempDir dir("cfg2");
  std::ofstream(dir / "b.conf") << "window_size 11\n";
  EXPECT_THROW(apply_config_file(c, dir / "b.conf"), Error);
  EXPECT_THROW(apply_config_file(c, dir / "missing.conf"), Error);
  c = PipelineConfig{};
  c.workers = 0;
  EXPECT_THROW(c.validate(), Error);
}

TEST(Config, DefaultBudgetFollowsFraction) {
  PipelineConfig c;
  EXPECT_EQ(c.budget_for(64), 10);
  c.pivot_fraction = 0.1;
  EXPECT_EQ(c.budget_for(64), 6);
}

TEST(FrameSeed, DistinctPerFrameAndRun) {
  EXPECT_NE(frame_seed(0, 0), frame_seed(0, 1));
  EXPECT_NE(frame_seed(0, 3), frame_seed(1, 3));
  EXPECT_EQ(frame_seed(7, 3), frame_seed(7, 3));
}

TEST(ParallelFor, VisitsEveryIndexOnce) {
  std::vector<int> hits(100, 0);
  parallel_for(100, 4, [&](int i) { ++hits[i]; });
  EXPECT_EQ(std::count(hits.begin(), hits.end(), 1), 100);
}

TEST(ParallelFor, RethrowsLowestFailingIndex) {
  try {
    parallel_for(50, 4, [](int i) {
      if (i % 10 == 7) throw std::runtime_error(std::to_string(i));
    });
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "7");
  }
}

TEST(Pipeline, ShapeContractAndReport) {
  const VideoSequence seq = small_video();
  PipelineConfig c;
  const PipelineResult r = run_pipeline(seq, c);
  ASSERT_EQ(r.output.frame_count(), 16);
  for (const Frame& f : r.output.frames) {
    EXPECT_EQ(f.width, 56);
    EXPECT_EQ(f.height, 56);
  }
  EXPECT_EQ(r.raw.size(), 16);
  EXPECT_EQ(r.smoothed.kind, TrackKind::Smoothed);
  EXPECT_EQ(r.report.frames, 16);
  EXPECT_FALSE(r.report.pivots.empty());
  EXPECT_FALSE(r.report.timings.empty());
}

TEST(Pipeline, WorkersDoNotChangeResults) {
  const VideoSequence seq = small_video(12);
  PipelineConfig c;
  const PipelineResult a = run_pipeline(seq, c);
  c.workers = 3;
  const PipelineResult b = run_pipeline(seq, c);
  EXPECT_EQ(a.output, b.output);
  EXPECT_EQ(a.raw, b.raw);
  EXPECT_EQ(a.smoothed, b.smoothed);
}

TEST(Pipeline, SuppliedTrackSkipsLocalization) {
  const VideoSequence seq = small_video(8);
  PatchTrack tr;
  for (int t = 0; t < 8; ++t) tr.patches.push_back({64, 48, 64, t});
  PipelineConfig c;
  c.retarget.resample = Resample::Nearest;
  c.retarget.out_size = 64;
  const PipelineResult r = run_pipeline(seq, c, tr);
  EXPECT_EQ(r.output.frames[3].at(0, 0, 0), seq.frames[3].at(32, 16, 0));
  tr.patches.pop_back();
  EXPECT_THROW(run_pipeline(seq, c, tr), Error);
}

TEST(Pipeline, FileRunWritesOutputAndSidecars) {
  TempDir dir("run");
  write_sequence(small_video(10), dir / "in", FrameFormat::Ppm);
  PipelineConfig c;
  c.dump_tracks = true;
  c.output_format = FrameFormat::Raw;
  const PipelineReport rep = run_pipeline(c, dir / "in", dir / "out");
  EXPECT_EQ(rep.frames, 10);
  const VideoSequence out = read_sequence(dir / "out");
  EXPECT_EQ(out.frame_count(), 10);
  EXPECT_EQ(out.size(), (FrameSize{56, 56}));
  EXPECT_EQ(read_track_sidecar(dir / "out/track_raw.json").size(), 10);
  EXPECT_EQ(read_track_sidecar(dir / "out/track_smoothed.json").size(), 10);
  EXPECT_TRUE(rep.to_json().contains("low_confidence_frames"));
}

TEST(Pipeline, SingleFrameFailsAtIngest) {
  TempDir dir("one");
  std::filesystem::create_directories(dir / "in");
  write_png(small_video(2).frames[0], dir / "in/f0.png");
  try {
    run_pipeline(PipelineConfig{}, dir / "in", dir / "out");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooFewFrames);
    EXPECT_NE(std::string(e.what()).find("ingest"), std::string::npos);
  }
}

TEST(Pipeline, DebugDirReceivesArtifacts) {
  TempDir dir("dbg");
  PipelineConfig c;
  c.debug_dir = dir / "debug";
  run_pipeline(small_video(4), c);
  EXPECT_TRUE(std::filesystem::exists(dir / "debug/hsv_000000.png"));
  EXPECT_TRUE(std::filesystem::exists(dir / "debug/labels_000003.png"));
}

}  // namespace
}  // namespace actcrop
