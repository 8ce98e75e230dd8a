#include "actcrop/localize.hpp"

#include <algorithm>
#include <cmath>

namespace actcrop {

namespace {

// Places an interval of length `len` around [lo, lo + old_len) with the slack
// split evenly (extra pixel after), then shifts it inside [0, extent).
std::pair<int, int> place(int lo, int old_len, int len, int extent) {
  int start = lo - (len - old_len) / 2;
  start = std::clamp(start, 0, extent - len);
  return {start, start + len - 1};
}

bool ranks_higher(const ClusterComponent& a, const ClusterComponent& b) {
  if (a.avg_saturation != b.avg_saturation) return a.avg_saturation > b.avg_saturation;
  if (a.pixel_count() != b.pixel_count()) return a.pixel_count() > b.pixel_count();
  return a.cluster_id < b.cluster_id;
}

}  // namespace

double LocalizeParams::effective_fraction() const { return std::clamp(a_min_fraction, 0.05, 0.9); }

Candidates select_candidates(std::span<const ClusterComponent> c3s) {
  Candidates out;
  for (const ClusterComponent& c : c3s) {
    if (c.touches_border) continue;
    if (!out.top || ranks_higher(c, *out.top)) {
      out.second = out.top;
      out.top = &c;
    } else if (!out.second || ranks_higher(c, *out.second)) {
      out.second = &c;
    }
  }
  if (!out.top) throw Error(ErrorCode::NoInteriorC3, "every component touches the frame border");
  return out;
}

Box grow_to_min_area(const Box& bbox, double a_min, const FrameSize& frame) {
  if (static_cast<double>(bbox.area()) >= a_min) return bbox;
  const long w = bbox.width();
  const long h = bbox.height();
  auto area_at = [&](long m) { return static_cast<double>((w + 2 * m) * (h + 2 * m)); };

  // Smallest m with 4m^2 + 2(w + h)m + wh - a_min >= 0.
  const double b = static_cast<double>(w + h);
  const double disc = b * b - 4.0 * (static_cast<double>(w * h) - a_min);
  long m = std::max(0L, static_cast<long>(std::ceil((-b + std::sqrt(disc)) / 4.0)));
  while (m > 0 && area_at(m - 1) >= a_min) --m;
  while (area_at(m) < a_min) ++m;

  long lw = std::min<long>(w + 2 * m, frame.width);
  long lh = std::min<long>(h + 2 * m, frame.height);
  if (static_cast<double>(lw * lh) < a_min) {
    if (lw == frame.width)
      lh = std::min<long>(frame.height, std::max(lh, static_cast<long>(std::ceil(a_min / lw))));
    if (lh == frame.height)
      lw = std::min<long>(frame.width, std::max(lw, static_cast<long>(std::ceil(a_min / lh))));
  }

  const auto [left, right] = place(bbox.left, static_cast<int>(w), static_cast<int>(lw), frame.width);
  const auto [top, bottom] = place(bbox.top, static_cast<int>(h), static_cast<int>(lh), frame.height);
  return {left, top, right, bottom};
}

SquarePatch square_patch(const Box& box, const FrameSize& frame, int t) {
  const double d = std::min(std::max(box.width(), box.height()), frame.min_side());
  const double half = d / 2.0;
  return {std::clamp(box.center_x(), half, frame.width - half),
          std::clamp(box.center_y(), half, frame.height - half), d, t};
}

LocalizedPatch localize_frame(std::span<const ClusterComponent> c3s, const LocalizeParams& params,
                              const FrameSize& frame, int t) {
  const double a_min = params.a_min(frame);
  Candidates cand;
  try {
    cand = select_candidates(c3s);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoInteriorC3) throw;
    const double d = std::min(std::sqrt(a_min), static_cast<double>(frame.min_side()));
    return {{frame.width / 2.0, frame.height / 2.0, d, t}, true};
  }

  Box chosen = cand.top->bbox;
  if (static_cast<double>(chosen.area()) < a_min) {
    chosen = grow_to_min_area(chosen, a_min, frame);
    // The grown box already meets A_min; taking its union with the second
    // component keeps the result monotone in a_min.
    if (cand.second && intersection_area(chosen, cand.second->bbox) > 0)
      chosen = box_union(chosen, cand.second->bbox);
  }
  SquarePatch patch = square_patch(chosen, frame, t);
  // A capped square may lose the top component's centre; slide back toward it.
  const double half = patch.d / 2.0;
  const double cx = cand.top->bbox.center_x(), cy = cand.top->bbox.center_y();
  patch.x = std::clamp(std::clamp(patch.x, cx - half, cx + half), half, frame.width - half);
  patch.y = std::clamp(std::clamp(patch.y, cy - half, cy + half), half, frame.height - half);
  return {patch, false};
}

}  // namespace actcrop
