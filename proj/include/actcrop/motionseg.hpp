#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "actcrop/image.hpp"
#include "actcrop/opticalflow.hpp"

namespace actcrop {

inline constexpr int kBackgroundLabel = -1;

// Per-pixel cluster ids. After stacking, pixels covered by no cleaned mask
// carry kBackgroundLabel.
struct ClusterLabelMap {
  LabelImage labels;
  int k = 0;
  std::vector<Eigen::Vector2d> centroids;  // in (s cos h, s sin h) space; empty after stacking

  int width() const { return static_cast<int>(labels.cols()); }
  int height() const { return static_cast<int>(labels.rows()); }
};

// Cluster Connected Component: an 8-connected region of one stacked label.
struct ClusterComponent {
  int cluster_id = 0;
  std::vector<Eigen::Vector2i> pixels;  // (x, y)
  Box bbox;
  double avg_saturation = 0.0;
  bool touches_border = false;

  long pixel_count() const { return static_cast<long>(pixels.size()); }
};
using C3 = ClusterComponent;

struct SegmentParams {
  int k = 4;
  int open_radius = 2;
  int close_radius = 3;
  double min_component_fraction = 0.0005;  // of frame area

  int min_component_px(const FrameSize& size) const;
  void validate() const;
};

// Clustering feature of a motion pixel: saturation-scaled unit hue vector.
inline Eigen::Vector2d motion_feature(float h_deg, float s) {
  const double r = h_deg * std::numbers::pi / 180.0;
  return {s * std::cos(r), s * std::sin(r)};
}

// Lloyd iterations from a k-means++ seeding. K is reduced to the number of
// distinct feature points when fewer exist; fewer than two distinct points
// raises SingleClusterError.
ClusterLabelMap kmeanspp_cluster(const MotionHsvImage& img, int k, std::uint64_t seed);

// Closing, then opening, then removal of 8-connected components smaller than
// min_component_px. Structuring elements are (2r+1)x(2r+1) squares.
Mask clean_cluster_mask(const Mask& mask, int open_radius, int close_radius, int min_component_px);

// Paints masks onto a background map in ascending average-saturation order
// (ties: smaller cluster id first), so more motion overwrites less.
ClusterLabelMap stack_by_saturation(const std::vector<std::pair<int, Mask>>& cleaned_masks,
                                    const MotionHsvImage& hsv);

std::vector<ClusterComponent> extract_c3s(const ClusterLabelMap& stacked, const MotionHsvImage& hsv);

struct Segmentation {
  ClusterLabelMap clusters;
  ClusterLabelMap stacked;
  std::vector<ClusterComponent> c3s;
};

// Whole per-frame chain. Frames whose motion image has a single distinct
// feature (e.g. no motion at all) yield an empty component list.
Segmentation segment_motion(const MotionHsvImage& hsv, const SegmentParams& params,
                            std::uint64_t seed);

namespace detail {
Mask dilate(const Mask& m, int r);
Mask erode(const Mask& m, int r);
// 8-connected labelling of nonzero pixels; returns the component count.
int label_components(const Mask& m, LabelImage& labels);
double inertia(const MotionHsvImage& img, const ClusterLabelMap& map);
}  // namespace detail

}  // namespace actcrop
