#pragma once

#include <span>
#include <vector>

#include "actcrop/bezier.hpp"
#include "actcrop/image.hpp"
#include "actcrop/track.hpp"

namespace actcrop {

inline constexpr double kMinSmoothedSide = 8.0;

// Area intersection-over-union of two axis-aligned squares (t is ignored).
double iou(const SquarePatch& a, const SquarePatch& b);

// S_i = sum over f != i of IoU(i, f) / |i - f|.
std::vector<double> cohesion_scores(const PatchTrack& track);

struct PivotSet {
  std::vector<int> pt;      // chosen pivots, ascending
  std::vector<int> pt_fin;  // pt with 0 and F-1 added, ascending
  int frame_count = 0;

  int first() const { return pt.front(); }
  int last() const { return pt.back(); }
};

// Greedy selection: repeatedly take the available timestamp with the highest
// score (ties: smaller timestamp) and retire it together with the two
// timestamps on each side, until `budget` pivots exist or none is available.
PivotSet select_pivots(std::span<const double> scores, int budget);

// round(fraction * F), at least 1.
int pivot_budget(int frame_count, double fraction = 0.15);

// Copies the first pivot's patch into t = 0 and the last pivot's into t = F-1.
PatchTrack correct_endpoints(const PatchTrack& track, const PivotSet& pivots);

// Piecewise Bezier through consecutive pivots of pt_fin, using the in-between
// patches as control points. No clamping.
PatchTrack polybezier(const PatchTrack& track, const PivotSet& pivots);

// Shifts each patch inside the frame and bounds d to [8, min(W, H)].
PatchTrack clamp_track(const PatchTrack& track, const FrameSize& frame);

// polybezier followed by clamp_track.
PatchTrack smooth_track(const PatchTrack& track, const PivotSet& pivots, const FrameSize& frame);

struct SmoothingResult {
  std::vector<double> scores;
  PivotSet pivots;
  PatchTrack corrected;
  PatchTrack smoothed;
};

// Full temporal stage on a raw track: scoring, pivot choice, endpoint
// correction and polyBezier smoothing.
SmoothingResult stabilize_track(const PatchTrack& raw, const FrameSize& frame, int budget);

}  // namespace actcrop
