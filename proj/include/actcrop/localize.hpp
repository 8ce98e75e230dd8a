#pragma once

#include <optional>
#include <span>
#include <vector>

#include "actcrop/image.hpp"
#include "actcrop/motionseg.hpp"
#include "actcrop/track.hpp"

namespace actcrop {

struct LocalizeParams {
  double a_min_fraction = 0.25;

  // Clamped into [0.05, 0.9].
  double effective_fraction() const;
  double a_min(const FrameSize& size) const { return effective_fraction() * size.area(); }
};

struct Candidates {
  const ClusterComponent* top = nullptr;
  const ClusterComponent* second = nullptr;
};

// The two interior components with the highest average saturation. Ties go to
// the larger component, then the smaller cluster id. Throws
// ErrorCode::NoInteriorC3 when every component touches the frame border.
Candidates select_candidates(std::span<const ClusterComponent> c3s);

// Expands `bbox` by the smallest equal margin that reaches `a_min` area. Sides
// that hit the frame edge push the shortfall to the opposite side; an axis
// capped at the frame extent hands the missing area to the other axis.
Box grow_to_min_area(const Box& bbox, double a_min, const FrameSize& frame);

// Smallest square containing `box`, shifted inside the frame; the side is
// capped at the frame's shorter dimension.
SquarePatch square_patch(const Box& box, const FrameSize& frame, int t);

struct LocalizedPatch {
  SquarePatch patch;
  bool low_confidence = false;
};

LocalizedPatch localize_frame(std::span<const ClusterComponent> c3s, const LocalizeParams& params,
                              const FrameSize& frame, int t);

}  // namespace actcrop
