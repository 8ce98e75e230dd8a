#pragma once

#include <string_view>

#include "actcrop/image.hpp"
#include "actcrop/track.hpp"

namespace actcrop {

enum class Resample { Bilinear, Nearest };

Resample parse_resample(std::string_view name);
const char* to_string(Resample r);

struct RetargetParams {
  int out_size = 56;
  Resample resample = Resample::Bilinear;
};

// Samples the square window of `patch` into an out_size x out_size frame.
Frame crop_patch(const Frame& frame, const SquarePatch& patch, const RetargetParams& params);

// Frame t of the result is crop_patch(seq[t], track[t]).
VideoSequence retarget_video(const VideoSequence& seq, const PatchTrack& track,
                             const RetargetParams& params);

}  // namespace actcrop
