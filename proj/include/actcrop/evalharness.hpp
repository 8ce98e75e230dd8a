#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "actcrop/image.hpp"
#include "actcrop/track.hpp"

namespace actcrop {

enum class Trajectory { Linear, Sinusoidal, RandomWalk };
enum class BackgroundMotion { Static, Drifting };

Trajectory parse_trajectory(std::string_view name);
const char* to_string(Trajectory t);
BackgroundMotion parse_background(std::string_view name);
const char* to_string(BackgroundMotion b);

struct SyntheticSpec {
  int frame_w = 128;
  int frame_h = 96;
  int frames = 64;
  int subject_size = 40;
  int border_margin = 12;  // min gap between subject and frame edge
  Eigen::Vector2d velocity{1.0, 0.4};  // px/frame; speed bound for non-linear paths
  Trajectory trajectory = Trajectory::Linear;
  BackgroundMotion background = BackgroundMotion::Static;
  Eigen::Vector2d drift{-0.6, 0.4};  // background px/frame when drifting
  double noise_sigma = 2.0;
  double jitter_fraction = 0.0;  // share of frames carrying a one-frame distractor
  std::uint64_t seed = 0;
};

struct SyntheticVideo {
  VideoSequence video;
  PatchTrack ground_truth;        // square around the fully covered (colour-keyed) subject pixels
  std::vector<int> corrupted;     // frames carrying a distractor
};

// Textured subject (two-colour checkerboard, colour-keyed) moving over a grey
// background. Deterministic in spec.seed.
SyntheticVideo generate_synthetic(const SyntheticSpec& spec);

// True for pixels carrying the subject colour key.
bool is_subject_pixel(const Frame& frame, int x, int y);

struct TrackMetrics {
  double mean_iou_gt = 0.0;
  double center_rmse = 0.0;
  double jitter_raw = 0.0;
  double jitter_smoothed = 0.0;
  double containment = 0.0;

  nlohmann::json to_json() const;
};

// Mean norm of the second difference of (x, y, d); 0 for fewer than 3 frames.
double track_jitter(const PatchTrack& track);

TrackMetrics evaluate(const PatchTrack& pred, const PatchTrack& gt, const PatchTrack& raw);

struct PipelineConfig;

struct CaseResult {
  SyntheticSpec spec;
  TrackMetrics smoothed;  // smoothed track against ground truth
  TrackMetrics raw;       // raw per-frame track against ground truth
};

// Generates each video, runs the in-memory pipeline on it and scores both the
// raw and the smoothed tracks.
std::vector<CaseResult> run_suite(const std::vector<SyntheticSpec>& specs, const PipelineConfig& config);

}  // namespace actcrop
