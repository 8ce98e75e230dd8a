#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "actcrop/localize.hpp"
#include "actcrop/motionseg.hpp"
#include "actcrop/opticalflow.hpp"
#include "actcrop/retarget.hpp"
#include "actcrop/temporal.hpp"
#include "actcrop/videoio.hpp"

namespace actcrop {

struct PipelineConfig {
  FlowParams flow;
  SegmentParams segment;
  LocalizeParams localize;
  double pivot_fraction = 0.15;
  std::optional<int> pivot_budget;  // overrides pivot_fraction when set
  RetargetParams retarget;
  FrameFormat output_format = FrameFormat::Png;
  std::uint64_t seed = 0;
  int workers = 1;
  std::optional<std::filesystem::path> debug_dir;
  bool dump_tracks = false;

  int budget_for(int frame_count) const;
  void validate() const;
};

// Reads `key = value` lines; `#` starts a comment and `[section]` headers are
// accepted and ignored. Unknown keys raise InvalidArgument.
void apply_config_file(PipelineConfig& config, const std::filesystem::path& path);
void apply_config_value(PipelineConfig& config, const std::string& key, const std::string& value);
nlohmann::json config_to_json(const PipelineConfig& config);

// Per-frame k-means seed derived from the run seed.
std::uint64_t frame_seed(std::uint64_t seed, int t);

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct PipelineReport {
  int frames = 0;
  std::vector<StageTiming> timings;
  std::vector<int> low_confidence_frames;
  std::vector<int> pivots;

  nlohmann::json to_json() const;
};

struct LocalizationResult {
  PatchTrack raw;
  std::vector<bool> low_confidence;
};

// Flow, segmentation and per-frame localization for every frame. Frame t uses
// flow(t, t+1); the last frame reuses flow(F-2, F-1).
LocalizationResult localize_sequence(const VideoSequence& seq, const PipelineConfig& config,
                                     PipelineReport* report = nullptr);

struct PipelineResult {
  VideoSequence output;
  PatchTrack raw;
  PatchTrack smoothed;
  PipelineReport report;
};

// In-memory pipeline. When `track` is given, localization and smoothing are
// skipped and the supplied track is cropped directly.
PipelineResult run_pipeline(const VideoSequence& seq, const PipelineConfig& config,
                            const std::optional<PatchTrack>& track = std::nullopt);

// File-based pipeline: reads `input`, writes the cropped sequence to `output`
// and, with dump_tracks, `track_raw.json` / `track_smoothed.json` beside it.
PipelineReport run_pipeline(const PipelineConfig& config, const std::filesystem::path& input,
                            const std::filesystem::path& output,
                            const std::optional<std::filesystem::path>& track_path = std::nullopt);

}  // namespace actcrop
