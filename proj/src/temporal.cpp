#include "actcrop/temporal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace actcrop {

namespace {

double overlap_1d(double c0, double h0, double c1, double h1) {
  return std::max(0.0, std::min(c0 + h0, c1 + h1) - std::max(c0 - h0, c1 - h1));
}

}  // namespace

double iou(const SquarePatch& a, const SquarePatch& b) {
  const double inter = overlap_1d(a.x, a.d / 2, b.x, b.d / 2) * overlap_1d(a.y, a.d / 2, b.y, b.d / 2);
  if (inter <= 0.0) return 0.0;
  const double uni = a.d * a.d + b.d * b.d - inter;
  return std::min(1.0, inter / uni);
}

std::vector<double> cohesion_scores(const PatchTrack& track) {
  const int n = track.size();
  std::vector<double> s(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int f = i + 1; f < n; ++f) {
      const double w = iou(track[i], track[f]) / (f - i);
      s[i] += w;
      s[f] += w;
    }
  return s;
}

PivotSet select_pivots(std::span<const double> scores, int budget) {
  const int n = static_cast<int>(scores.size());
  if (n == 0) throw Error(ErrorCode::EmptyTrack, "no scores to select pivots from");
  if (budget < 1) throw Error(ErrorCode::InvalidArgument, "pivot budget must be >= 1");

  PivotSet out;
  out.frame_count = n;
  std::vector<bool> available(n, true);
  while (static_cast<int>(out.pt.size()) < budget) {
    int best = -1;
    for (int i = 0; i < n; ++i)
      if (available[i] && (best < 0 || scores[i] > scores[best])) best = i;
    if (best < 0) break;
    out.pt.push_back(best);
    for (int j = std::max(0, best - 2); j <= std::min(n - 1, best + 2); ++j) available[j] = false;
  }
  std::sort(out.pt.begin(), out.pt.end());

  out.pt_fin = out.pt;
  out.pt_fin.push_back(0);
  out.pt_fin.push_back(n - 1);
  std::sort(out.pt_fin.begin(), out.pt_fin.end());
  out.pt_fin.erase(std::unique(out.pt_fin.begin(), out.pt_fin.end()), out.pt_fin.end());
  return out;
}

int pivot_budget(int frame_count, double fraction) {
  return std::max(1, static_cast<int>(std::lround(fraction * frame_count)));
}

PatchTrack correct_endpoints(const PatchTrack& track, const PivotSet& pivots) {
  if (pivots.pt.empty()) throw Error(ErrorCode::EmptyTrack, "pivot set is empty");
  if (track.size() != pivots.frame_count)
    throw Error(ErrorCode::LengthMismatch, "track and pivot set disagree on frame count");
  PatchTrack out = track;
  const int last = track.size() - 1;
  const SquarePatch& head = track[pivots.first()];
  const SquarePatch& tail = track[pivots.last()];
  out[0] = {head.x, head.y, head.d, 0};
  out[last] = {tail.x, tail.y, tail.d, last};
  return out;
}

PatchTrack polybezier(const PatchTrack& track, const PivotSet& pivots) {
  if (track.size() != pivots.frame_count)
    throw Error(ErrorCode::LengthMismatch, "track and pivot set disagree on frame count");
  PatchTrack out = track;
  out.kind = TrackKind::Smoothed;

  std::vector<Eigen::Vector3d> ctrl;
  for (std::size_t k = 0; k + 1 < pivots.pt_fin.size(); ++k) {
    const int i = pivots.pt_fin[k];
    const int j = pivots.pt_fin[k + 1];
    ctrl.clear();
    for (int t = i; t <= j; ++t) ctrl.push_back(track[t].point());
    for (int delta = 0; delta <= j - i; ++delta) {
      const Eigen::Vector3d p = bezier_eval<double, 3>(ctrl, static_cast<double>(delta) / (j - i));
      out[i + delta] = {p.x(), p.y(), p.z(), i + delta};
    }
  }
  return out;
}

PatchTrack clamp_track(const PatchTrack& track, const FrameSize& frame) {
  PatchTrack out = track;
  const double cap = frame.min_side();
  for (SquarePatch& p : out.patches) {
    p.d = std::clamp(p.d, std::min(kMinSmoothedSide, cap), cap);
    p.x = std::clamp(p.x, p.d / 2, frame.width - p.d / 2);
    p.y = std::clamp(p.y, p.d / 2, frame.height - p.d / 2);
  }
  return out;
}

PatchTrack smooth_track(const PatchTrack& track, const PivotSet& pivots, const FrameSize& frame) {
  return clamp_track(polybezier(track, pivots), frame);
}

SmoothingResult stabilize_track(const PatchTrack& raw, const FrameSize& frame, int budget) {
  if (raw.size() < 2) throw Error(ErrorCode::TooFewFrames, "track needs at least 2 entries");
  SmoothingResult r;
  r.scores = cohesion_scores(raw);
  r.pivots = select_pivots(r.scores, budget);
  r.corrected = correct_endpoints(raw, r.pivots);
  r.smoothed = smooth_track(r.corrected, r.pivots, frame);
  return r;
}

}  // namespace actcrop
