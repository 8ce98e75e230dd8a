#include "actcrop/motionseg.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <string>

namespace actcrop {

namespace {

std::vector<Eigen::Vector2d> features_of(const MotionHsvImage& img) {
  std::vector<Eigen::Vector2d> f;
  f.reserve(static_cast<std::size_t>(img.h.size()));
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) f.push_back(motion_feature(img.h(y, x), img.s(y, x)));
  return f;
}

int count_distinct(const std::vector<Eigen::Vector2d>& f, int cap) {
  std::set<std::pair<double, double>> seen;
  for (const auto& p : f) {
    seen.emplace(p.x(), p.y());
    if (static_cast<int>(seen.size()) > cap) break;
  }
  return static_cast<int>(seen.size());
}

// Nearest centroid; ties go to the smaller index.
int nearest(const Eigen::Vector2d& p, const std::vector<Eigen::Vector2d>& centroids) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int c = 0; c < static_cast<int>(centroids.size()); ++c) {
    const double d = (p - centroids[c]).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

}  // namespace

int SegmentParams::min_component_px(const FrameSize& size) const {
  return std::max(1, static_cast<int>(std::lround(min_component_fraction * size.area())));
}

void SegmentParams::validate() const {
  if (k < 2 || open_radius < 0 || close_radius < 0 || min_component_fraction < 0.0)
    throw Error(ErrorCode::InvalidArgument, "invalid segmentation parameters");
}

ClusterLabelMap kmeanspp_cluster(const MotionHsvImage& img, int k, std::uint64_t seed) {
  if (k < 2) throw Error(ErrorCode::InvalidArgument, "K must be at least 2");
  const std::vector<Eigen::Vector2d> pts = features_of(img);
  const int n = static_cast<int>(pts.size());
  if (n < k) throw Error(ErrorCode::InvalidArgument, "fewer pixels than clusters");

  const int distinct = count_distinct(pts, k);
  if (distinct < 2) throw Error(ErrorCode::SingleClusterError, "motion image has one distinct feature");
  k = std::min(k, distinct);

  std::mt19937_64 rng(seed);
  std::vector<Eigen::Vector2d> centroids;
  centroids.reserve(k);
  centroids.push_back(pts[std::uniform_int_distribution<int>(0, n - 1)(rng)]);

  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  while (static_cast<int>(centroids.size()) < k) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], (pts[i] - centroids.back()).squaredNorm());
      total += d2[i];
    }
    const double r = std::uniform_real_distribution<double>(0.0, total)(rng);
    double acc = 0.0;
    int pick = -1;
    for (int i = 0; i < n; ++i) {
      if (d2[i] <= 0.0) continue;
      acc += d2[i];
      pick = i;
      if (acc > r) break;
    }
    centroids.push_back(pts[pick]);
  }

  ClusterLabelMap out;
  out.k = k;
  out.labels.resize(img.height(), img.width());
  int* labels = out.labels.data();
  for (int i = 0; i < n; ++i) labels[i] = nearest(pts[i], centroids);

  for (int iter = 0; iter < 100; ++iter) {
    std::vector<Eigen::Vector2d> sums(k, Eigen::Vector2d::Zero());
    std::vector<long> counts(k, 0);
    for (int i = 0; i < n; ++i) {
      sums[labels[i]] += pts[i];
      ++counts[labels[i]];
    }
    double moved = 0.0;
    for (int c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;  // empty cluster keeps its centroid
      const Eigen::Vector2d next = sums[c] / static_cast<double>(counts[c]);
      moved = std::max(moved, (next - centroids[c]).norm());
      centroids[c] = next;
    }
    for (int i = 0; i < n; ++i) labels[i] = nearest(pts[i], centroids);
    if (moved < 1e-4) break;
  }
  out.centroids = std::move(centroids);
  return out;
}

namespace detail {

namespace {

// Separable running extreme over a (2r+1) window; out-of-image samples are ignored.
template <bool IsMax>
Mask extreme_filter(const Mask& m, int r) {
  if (r <= 0) return m;
  const int h = static_cast<int>(m.rows());
  const int w = static_cast<int>(m.cols());
  Mask tmp(h, w), out(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      std::uint8_t v = m(y, x);
      for (int i = std::max(0, x - r); i <= std::min(w - 1, x + r); ++i)
        v = IsMax ? std::max(v, m(y, i)) : std::min(v, m(y, i));
      tmp(y, x) = v;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      std::uint8_t v = tmp(y, x);
      for (int j = std::max(0, y - r); j <= std::min(h - 1, y + r); ++j)
        v = IsMax ? std::max(v, tmp(j, x)) : std::min(v, tmp(j, x));
      out(y, x) = v;
    }
  return out;
}

}  // namespace

Mask dilate(const Mask& m, int r) { return extreme_filter<true>(m, r); }
Mask erode(const Mask& m, int r) { return extreme_filter<false>(m, r); }

int label_components(const Mask& m, LabelImage& labels) {
  const int h = static_cast<int>(m.rows());
  const int w = static_cast<int>(m.cols());
  labels = LabelImage::Constant(h, w, -1);
  int next = 0;
  std::vector<Eigen::Vector2i> stack;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!m(y, x) || labels(y, x) >= 0) continue;
      labels(y, x) = next;
      stack.assign(1, {x, y});
      while (!stack.empty()) {
        const Eigen::Vector2i p = stack.back();
        stack.pop_back();
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = p.x() + dx, ny = p.y() + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            if (m(ny, nx) && labels(ny, nx) < 0) {
              labels(ny, nx) = next;
              stack.emplace_back(nx, ny);
            }
          }
      }
      ++next;
    }
  return next;
}

double inertia(const MotionHsvImage& img, const ClusterLabelMap& map) {
  std::vector<Eigen::Vector2d> sums(map.k, Eigen::Vector2d::Zero());
  std::vector<long> counts(map.k, 0);
  const std::vector<Eigen::Vector2d> pts = features_of(img);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    sums[map.labels.data()[i]] += pts[i];
    ++counts[map.labels.data()[i]];
  }
  double total = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const int c = map.labels.data()[i];
    total += (pts[i] - sums[c] / static_cast<double>(counts[c])).squaredNorm();
  }
  return total;
}

}  // namespace detail

Mask clean_cluster_mask(const Mask& mask, int open_radius, int close_radius, int min_component_px) {
  Mask m = detail::erode(detail::dilate(mask, close_radius), close_radius);
  m = detail::dilate(detail::erode(m, open_radius), open_radius);

  LabelImage labels;
  const int n = detail::label_components(m, labels);
  std::vector<long> sizes(n, 0);
  for (Eigen::Index i = 0; i < labels.size(); ++i)
    if (labels.data()[i] >= 0) ++sizes[labels.data()[i]];
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    const int l = labels.data()[i];
    m.data()[i] = (l >= 0 && sizes[l] >= min_component_px) ? 1 : 0;
  }
  return m;
}

ClusterLabelMap stack_by_saturation(const std::vector<std::pair<int, Mask>>& cleaned_masks,
                                    const MotionHsvImage& hsv) {
  struct Layer {
    int id;
    double sat;
    const Mask* mask;
  };
  std::vector<Layer> layers;
  int max_id = -1;
  for (const auto& [id, mask] : cleaned_masks) {
    if (mask.rows() != hsv.height() || mask.cols() != hsv.width())
      throw Error(ErrorCode::DimensionMismatch, "mask size differs from motion image");
    max_id = std::max(max_id, id);
    double sum = 0.0;
    long count = 0;
    for (Eigen::Index i = 0; i < mask.size(); ++i)
      if (mask.data()[i]) {
        sum += hsv.s.data()[i];
        ++count;
      }
    if (count > 0) layers.push_back({id, sum / static_cast<double>(count), &mask});
  }
  if (layers.empty()) throw Error(ErrorCode::AllMasksEmpty, "no cluster survived cleaning");

  std::sort(layers.begin(), layers.end(), [](const Layer& a, const Layer& b) {
    return a.sat != b.sat ? a.sat < b.sat : a.id < b.id;
  });

  ClusterLabelMap out;
  out.k = max_id + 1;
  out.labels = LabelImage::Constant(hsv.height(), hsv.width(), kBackgroundLabel);
  for (const Layer& layer : layers)
    for (Eigen::Index i = 0; i < layer.mask->size(); ++i)
      if (layer.mask->data()[i]) out.labels.data()[i] = layer.id;
  return out;
}

std::vector<ClusterComponent> extract_c3s(const ClusterLabelMap& stacked, const MotionHsvImage& hsv) {
  const int h = stacked.height();
  const int w = stacked.width();
  Mask visited = Mask::Zero(h, w);
  std::vector<ClusterComponent> out;
  std::vector<Eigen::Vector2i> stack;

  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int label = stacked.labels(y, x);
      if (label == kBackgroundLabel || visited(y, x)) continue;

      ClusterComponent c;
      c.cluster_id = label;
      c.bbox = {x, y, x, y};
      double sat = 0.0;
      visited(y, x) = 1;
      stack.assign(1, {x, y});
      while (!stack.empty()) {
        const Eigen::Vector2i p = stack.back();
        stack.pop_back();
        c.pixels.push_back(p);
        sat += hsv.s(p.y(), p.x());
        c.bbox = {std::min(c.bbox.left, p.x()), std::min(c.bbox.top, p.y()),
                  std::max(c.bbox.right, p.x()), std::max(c.bbox.bottom, p.y())};
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = p.x() + dx, ny = p.y() + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            if (!visited(ny, nx) && stacked.labels(ny, nx) == label) {
              visited(ny, nx) = 1;
              stack.emplace_back(nx, ny);
            }
          }
      }
      c.avg_saturation = sat / static_cast<double>(c.pixels.size());
      c.touches_border = c.bbox.left == 0 || c.bbox.top == 0 || c.bbox.right == w - 1 ||
                         c.bbox.bottom == h - 1;
      out.push_back(std::move(c));
    }
  return out;
}

Segmentation segment_motion(const MotionHsvImage& hsv, const SegmentParams& params,
                            std::uint64_t seed) {
  params.validate();
  Segmentation seg;
  const LabelImage background =
      LabelImage::Constant(hsv.height(), hsv.width(), kBackgroundLabel);
  try {
    seg.clusters = kmeanspp_cluster(hsv, params.k, seed);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::SingleClusterError) throw;
    seg.clusters = {background, 1, {}};
    seg.stacked = {background, 0, {}};
    return seg;
  }

  const int min_px = params.min_component_px({hsv.width(), hsv.height()});
  std::vector<std::pair<int, Mask>> masks;
  for (int c = 0; c < seg.clusters.k; ++c) {
    const Mask raw = (seg.clusters.labels.array() == c).cast<std::uint8_t>().matrix();
    masks.emplace_back(c, clean_cluster_mask(raw, params.open_radius, params.close_radius, min_px));
  }
  try {
    seg.stacked = stack_by_saturation(masks, hsv);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::AllMasksEmpty) throw;
    seg.stacked = {background, seg.clusters.k, {}};
    return seg;
  }
  seg.c3s = extract_c3s(seg.stacked, hsv);
  return seg;
}

}  // namespace actcrop
