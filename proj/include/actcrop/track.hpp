#pragma once

#include <vector>

#include <Eigen/Core>

namespace actcrop {

// Square crop window in continuous pixel coordinates: the square covers
// [x - d/2, x + d/2] x [y - d/2, y + d/2], where pixel (i, j) spans
// [i, i + 1) x [j, j + 1).
struct SquarePatch {
  double x = 0.0;
  double y = 0.0;
  double d = 1.0;
  int t = 0;

  Eigen::Vector3d point() const { return {x, y, d}; }
  bool operator==(const SquarePatch&) const = default;
};

enum class TrackKind { Raw, Smoothed };

struct PatchTrack {
  std::vector<SquarePatch> patches;
  TrackKind kind = TrackKind::Raw;

  int size() const { return static_cast<int>(patches.size()); }
  const SquarePatch& operator[](int t) const { return patches[t]; }
  SquarePatch& operator[](int t) { return patches[t]; }

  bool operator==(const PatchTrack&) const = default;
};

}  // namespace actcrop
