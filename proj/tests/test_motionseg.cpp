#include <algorithm>
#include <array>
#include <limits>
#include <map>
#include <random>

#include <gtest/gtest.h>

#include "actcrop/motionseg.hpp"

namespace actcrop {
namespace {

MotionHsvImage blank_hsv(int w, int h) {
  return {ImageF::Zero(h, w), ImageF::Zero(h, w), ImageF::Ones(h, w)};
}

void paint(MotionHsvImage& img, int x0, int y0, int w, int h, float hue, float sat) {
  img.h.block(y0, x0, h, w).setConstant(hue);
  img.s.block(y0, x0, h, w).setConstant(sat);
}

Mask rect_mask(int w, int h, int x0, int y0, int rw, int rh) {
  Mask m = Mask::Zero(h, w);
  m.block(y0, x0, rh, rw).setConstant(1);
  return m;
}

int count_components(const Mask& m) {
  LabelImage labels;
  return detail::label_components(m, labels);
}

// Smallest weighted inertia over every assignment of the distinct feature
// values to k groups.
double brute_force_inertia(const std::vector<std::pair<Eigen::Vector2d, long>>& pts, int k) {
  const int n = static_cast<int>(pts.size());
  long combos = 1;
  for (int i = 0; i < n; ++i) combos *= k;
  double best = std::numeric_limits<double>::infinity();
  for (long code = 0; code < combos; ++code) {
    std::vector<int> assign(n);
    long c = code;
    for (int i = 0; i < n; ++i, c /= k) assign[i] = static_cast<int>(c % k);
    std::vector<Eigen::Vector2d> sum(k, Eigen::Vector2d::Zero());
    std::vector<long> cnt(k, 0);
    for (int i = 0; i < n; ++i) {
      sum[assign[i]] += pts[i].first * pts[i].second;
      cnt[assign[i]] += pts[i].second;
    }
    double inertia = 0.0;
    for (int i = 0; i < n; ++i)
      inertia += pts[i].second * (pts[i].first - sum[assign[i]] / cnt[assign[i]]).squaredNorm();
    best = std::min(best, inertia);
  }
  return best;
}

std::vector<std::pair<Eigen::Vector2d, long>> distinct_features(const MotionHsvImage& img) {
  std::map<std::pair<double, double>, long> counts;
  for (int i = 0; i < img.h.size(); ++i) {
    const Eigen::Vector2d f = motion_feature(img.h.data()[i], img.s.data()[i]);
    ++counts[{f.x(), f.y()}];
  }
  std::vector<std::pair<Eigen::Vector2d, long>> out;
  for (const auto& [p, c] : counts) out.push_back({Eigen::Vector2d(p.first, p.second), c});
  return out;
}

TEST(KMeans, TwoOpposedBlobsReachBruteForceOptimum) {
  MotionHsvImage img = blank_hsv(48, 40);
  paint(img, 4, 4, 10, 10, 0.0f, 1.0f);
  paint(img, 30, 20, 12, 8, 180.0f, 1.0f);
  const ClusterLabelMap map = kmeanspp_cluster(img, 3, 17);
  const double opt = brute_force_inertia(distinct_features(img), 3);
  EXPECT_LT(detail::inertia(img, map), opt + 1e-6);
  // Each blob lands in its own cluster, distinct from the background.
  EXPECT_NE(map.labels(5, 5), map.labels(21, 31));
  EXPECT_NE(map.labels(5, 5), map.labels(0, 0));
  EXPECT_NE(map.labels(21, 31), map.labels(0, 0));
}

TEST(KMeans, ThreeLevelFeaturesMatchOracle) {
  MotionHsvImage img = blank_hsv(30, 30);
  paint(img, 0, 0, 10, 30, 45.0f, 0.3f);
  paint(img, 10, 0, 10, 30, 45.0f, 0.9f);
  paint(img, 20, 0, 10, 30, 300.0f, 0.6f);
  const ClusterLabelMap map = kmeanspp_cluster(img, 2, 3);
  const double opt = brute_force_inertia(distinct_features(img), 2);
  EXPECT_LE(detail::inertia(img, map), opt * (1 + 1e-6) + 1e-9);
}

TEST(KMeans, ConstantImageIsSingleCluster) {
  MotionHsvImage img = blank_hsv(20, 20);
  paint(img, 0, 0, 20, 20, 30.0f, 0.5f);
  try {
    kmeanspp_cluster(img, 2, 0);
    FAIL() << "expected SingleClusterError";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingleClusterError);
  }
}

TEST(KMeans, ReducesKToDistinctCount) {
  MotionHsvImage img = blank_hsv(20, 20);
  paint(img, 0, 0, 10, 20, 90.0f, 1.0f);
  const ClusterLabelMap map = kmeanspp_cluster(img, 5, 0);
  EXPECT_EQ(map.k, 2);
  EXPECT_NE(map.labels(0, 0), map.labels(0, 15));
}

TEST(KMeans, SameSeedSameLabels) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<float> U(0.0f, 1.0f);
  MotionHsvImage img = blank_hsv(40, 30);
  for (int i = 0; i < img.h.size(); ++i) {
    img.h.data()[i] = 359.0f * U(rng);
    img.s.data()[i] = U(rng);
  }
  const ClusterLabelMap a = kmeanspp_cluster(img, 4, 99);
  const ClusterLabelMap b = kmeanspp_cluster(img, 4, 99);
  EXPECT_EQ(a.labels, b.labels);
  for (int i = 0; i < a.labels.size(); ++i) {
    ASSERT_GE(a.labels.data()[i], 0);
    ASSERT_LT(a.labels.data()[i], a.k);
  }
}

TEST(CleanMask, BridgeBetweenBlobsIsSevered) {
  Mask m = Mask::Zero(60, 80);
  m.block(20, 5, 20, 20).setConstant(1);
  m.block(20, 55, 20, 20).setConstant(1);
  m.block(30, 25, 1, 30).setConstant(1);
  ASSERT_EQ(count_components(m), 1);
  const Mask out = clean_cluster_mask(m, 2, 2, 1);
  EXPECT_EQ(count_components(out), 2);
  EXPECT_EQ(out(30, 40), 0);
}

TEST(CleanMask, EmptyStaysEmpty) {
  const Mask out = clean_cluster_mask(Mask::Zero(30, 30), 2, 3, 5);
  EXPECT_EQ(out.cast<int>().sum(), 0);
}

TEST(CleanMask, LargeSquareIsUnchanged) {
  const Mask m = rect_mask(100, 90, 20, 15, 50, 50);
  EXPECT_EQ(clean_cluster_mask(m, 2, 2, 1), m);
}

TEST(CleanMask, SmallComponentsRemoved) {
  Mask m = rect_mask(60, 60, 5, 5, 20, 20);
  m.block(40, 40, 6, 6).setConstant(1);
  const Mask out = clean_cluster_mask(m, 1, 1, 50);
  EXPECT_EQ(out(10, 10), 1);
  EXPECT_EQ(out(42, 42), 0);
}

TEST(CleanMask, OutputStaysWithinDilatedInput) {
  std::mt19937 rng(8);
  std::bernoulli_distribution B(0.3);
  Mask m(40, 50);
  for (int i = 0; i < m.size(); ++i) m.data()[i] = B(rng);
  const Mask out = clean_cluster_mask(m, 1, 2, 3);
  const Mask env = detail::dilate(m, 2);
  for (int i = 0; i < m.size(); ++i)
    if (out.data()[i]) ASSERT_TRUE(env.data()[i]);
}

TEST(Stacking, DisjointMasksBothPresent) {
  MotionHsvImage hsv = blank_hsv(40, 40);
  paint(hsv, 0, 0, 40, 40, 0.0f, 0.5f);
  const Mask a = rect_mask(40, 40, 2, 2, 8, 8);
  const Mask b = rect_mask(40, 40, 20, 20, 8, 8);
  for (bool swap : {false, true}) {
    std::vector<std::pair<int, Mask>> masks{{0, a}, {1, b}};
    if (swap) std::swap(masks[0], masks[1]);
    const ClusterLabelMap st = stack_by_saturation(masks, hsv);
    EXPECT_EQ(st.labels(5, 5), 0);
    EXPECT_EQ(st.labels(24, 24), 1);
    EXPECT_EQ(st.labels(15, 15), kBackgroundLabel);
  }
}

TEST(Stacking, HigherSaturationWinsOverlap) {
  MotionHsvImage hsv = blank_hsv(40, 40);
  paint(hsv, 0, 0, 20, 40, 0.0f, 0.8f);
  paint(hsv, 20, 0, 20, 40, 0.0f, 0.2f);
  // Cluster 0 lies mostly in the 0.2 half, cluster 1 mostly in the 0.8 half.
  const Mask lo = rect_mask(40, 40, 15, 10, 20, 10);
  const Mask hi = rect_mask(40, 40, 5, 10, 20, 10);
  const ClusterLabelMap st = stack_by_saturation({{0, lo}, {1, hi}}, hsv);
  EXPECT_EQ(st.labels(15, 18), 1);
  const ClusterLabelMap st2 = stack_by_saturation({{1, hi}, {0, lo}}, hsv);
  EXPECT_EQ(st2.labels(15, 18), 1);
}

TEST(Stacking, EqualSaturationLargerIdPaintedLast) {
  MotionHsvImage hsv = blank_hsv(30, 30);
  paint(hsv, 0, 0, 30, 30, 0.0f, 0.4f);
  const Mask a = rect_mask(30, 30, 2, 2, 12, 12);
  const Mask b = rect_mask(30, 30, 8, 8, 12, 12);
  for (bool swap : {false, true}) {
    std::vector<std::pair<int, Mask>> masks{{3, a}, {7, b}};
    if (swap) std::swap(masks[0], masks[1]);
    EXPECT_EQ(stack_by_saturation(masks, hsv).labels(10, 10), 7);
  }
}

TEST(Stacking, AllEmptyThrows) {
  const MotionHsvImage hsv = blank_hsv(20, 20);
  try {
    stack_by_saturation({{0, Mask::Zero(20, 20)}}, hsv);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AllMasksEmpty);
  }
}

ClusterLabelMap label_map(int w, int h) {
  ClusterLabelMap m;
  m.labels = LabelImage::Constant(h, w, kBackgroundLabel);
  m.k = 3;
  return m;
}

TEST(ExtractC3, CentredBlob) {
  ClusterLabelMap st = label_map(40, 40);
  st.labels.block(15, 15, 10, 10).setConstant(1);
  MotionHsvImage hsv = blank_hsv(40, 40);
  paint(hsv, 15, 15, 10, 10, 0.0f, 0.6f);
  const auto c3s = extract_c3s(st, hsv);
  ASSERT_EQ(c3s.size(), 1u);
  EXPECT_EQ(c3s[0].cluster_id, 1);
  EXPECT_FALSE(c3s[0].touches_border);
  EXPECT_EQ(c3s[0].bbox, (Box{15, 15, 24, 24}));
  EXPECT_EQ(c3s[0].pixel_count(), 100);
  EXPECT_NEAR(c3s[0].avg_saturation, 0.6, 1e-6);
}

TEST(ExtractC3, BorderPixelFlagged) {
  ClusterLabelMap st = label_map(40, 40);
  st.labels.block(5, 0, 4, 4).setConstant(2);
  const auto c3s = extract_c3s(st, blank_hsv(40, 40));
  ASSERT_EQ(c3s.size(), 1u);
  EXPECT_TRUE(c3s[0].touches_border);
}

TEST(ExtractC3, LShapeAndDiagonalStepAreOneComponent) {
  ClusterLabelMap st = label_map(40, 40);
  std::vector<Eigen::Vector2i> px;
  for (int y = 5; y <= 20; ++y) px.push_back({8, y});
  for (int x = 9; x <= 18; ++x) px.push_back({x, 20});
  px.push_back({19, 21});  // diagonal neighbour only
  for (const auto& p : px) st.labels(p.y(), p.x()) = 0;
  Box expect{px[0].x(), px[0].y(), px[0].x(), px[0].y()};
  for (const auto& p : px)
    expect = box_union(expect, Box{p.x(), p.y(), p.x(), p.y()});
  const auto c3s = extract_c3s(st, blank_hsv(40, 40));
  ASSERT_EQ(c3s.size(), 1u);
  EXPECT_EQ(c3s[0].bbox, expect);
  EXPECT_EQ(c3s[0].pixel_count(), static_cast<long>(px.size()));
}

TEST(ExtractC3, SameLabelSeparateRegionsAreSeparate) {
  ClusterLabelMap st = label_map(40, 40);
  st.labels.block(2, 2, 5, 5).setConstant(1);
  st.labels.block(20, 20, 5, 5).setConstant(1);
  st.labels.block(2, 8, 5, 5).setConstant(0);  // adjacent but another label
  EXPECT_EQ(extract_c3s(st, blank_hsv(40, 40)).size(), 3u);
}

TEST(SegmentMotion, MovingBlobBecomesInteriorComponent) {
  MotionHsvImage hsv = blank_hsv(64, 48);
  paint(hsv, 20, 15, 16, 14, 30.0f, 1.0f);
  const Segmentation seg = segment_motion(hsv, SegmentParams{}, 1);
  const auto best = std::max_element(seg.c3s.begin(), seg.c3s.end(), [](const C3& a, const C3& b) {
    return a.avg_saturation < b.avg_saturation;
  });
  ASSERT_NE(best, seg.c3s.end());
  EXPECT_EQ(best->bbox, (Box{20, 15, 35, 28}));
  EXPECT_FALSE(best->touches_border);
}

TEST(SegmentMotion, NoMotionGivesNoComponents) {
  EXPECT_TRUE(segment_motion(blank_hsv(32, 32), SegmentParams{}, 0).c3s.empty());
}

}  // namespace
}  // namespace actcrop
