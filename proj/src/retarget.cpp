#include "actcrop/retarget.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace actcrop {

namespace {

constexpr double kBoundsTolerance = 1e-6;

}  // namespace

Resample parse_resample(std::string_view name) {
  if (name == "bilinear") return Resample::Bilinear;
  if (name == "nearest") return Resample::Nearest;
  throw Error(ErrorCode::InvalidArgument, "unknown resampling '" + std::string(name) + "'");
}

const char* to_string(Resample r) { return r == Resample::Bilinear ? "bilinear" : "nearest"; }

Frame crop_patch(const Frame& frame, const SquarePatch& patch, const RetargetParams& params) {
  if (params.out_size < 8) throw Error(ErrorCode::InvalidArgument, "out_size must be >= 8");
  const double half = patch.d / 2.0;
  if (!(patch.d > 0.0) || patch.x - half < -kBoundsTolerance || patch.y - half < -kBoundsTolerance ||
      patch.x + half > frame.width + kBoundsTolerance ||
      patch.y + half > frame.height + kBoundsTolerance)
    throw Error(ErrorCode::PatchOutOfBounds, "patch at t=" + std::to_string(patch.t) +
                                                 " leaves the frame");

  const int n = params.out_size;
  const double step = patch.d / n;
  const double x0 = patch.x - half;
  const double y0 = patch.y - half;
  Frame out(n, n, frame.timestamp);

  for (int j = 0; j < n; ++j) {
    const double sy = y0 + (j + 0.5) * step;
    for (int i = 0; i < n; ++i) {
      const double sx = x0 + (i + 0.5) * step;
      if (params.resample == Resample::Nearest) {
        const int px = std::clamp(static_cast<int>(std::floor(sx)), 0, frame.width - 1);
        const int py = std::clamp(static_cast<int>(std::floor(sy)), 0, frame.height - 1);
        for (int c = 0; c < 3; ++c) out.at(i, j, c) = frame.at(px, py, c);
        continue;
      }
      // Pixel centres sit at integer + 0.5.
      const double fx = std::clamp(sx - 0.5, 0.0, frame.width - 1.0);
      const double fy = std::clamp(sy - 0.5, 0.0, frame.height - 1.0);
      const int ix = static_cast<int>(fx);
      const int iy = static_cast<int>(fy);
      const int ix1 = std::min(ix + 1, frame.width - 1);
      const int iy1 = std::min(iy + 1, frame.height - 1);
      const double ax = fx - ix;
      const double ay = fy - iy;
      for (int c = 0; c < 3; ++c) {
        const double v = (1 - ay) * ((1 - ax) * frame.at(ix, iy, c) + ax * frame.at(ix1, iy, c)) +
                         ay * ((1 - ax) * frame.at(ix, iy1, c) + ax * frame.at(ix1, iy1, c));
        out.at(i, j, c) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return out;
}

VideoSequence retarget_video(const VideoSequence& seq, const PatchTrack& track,
                             const RetargetParams& params) {
  if (track.size() != seq.frame_count())
    throw Error(ErrorCode::LengthMismatch, "track has " + std::to_string(track.size()) +
                                               " patches for " + std::to_string(seq.frame_count()) +
                                               " frames");
  VideoSequence out;
  out.frames.reserve(seq.frames.size());
  for (int t = 0; t < seq.frame_count(); ++t) out.frames.push_back(crop_patch(seq.frames[t], track[t], params));
  return out;
}

}  // namespace actcrop
