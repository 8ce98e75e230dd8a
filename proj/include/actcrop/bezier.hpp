#pragma once

#include <cassert>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace actcrop {

template <typename Scalar, int Dim>
using Point = Eigen::Matrix<Scalar, Dim, 1>;

// De Casteljau evaluation of the Bezier curve with the given control points.
// Every step is a convex combination, so B(0) and B(1) reproduce the first and
// last control points exactly and high degrees stay stable.
template <typename Scalar, int Dim>
Point<Scalar, Dim> bezier_eval(std::span<const Point<Scalar, Dim>> points, Scalar t) {
  assert(points.size() >= 1);
  std::vector<Point<Scalar, Dim>> work(points.begin(), points.end());
  const Scalar s = Scalar(1) - t;
  for (std::size_t level = work.size() - 1; level > 0; --level)
    for (std::size_t i = 0; i < level; ++i) work[i] = s * work[i] + t * work[i + 1];
  return work.front();
}

template <typename Scalar, int Dim>
Point<Scalar, Dim> bezier_eval(const std::vector<Point<Scalar, Dim>>& points, Scalar t) {
  return bezier_eval(std::span<const Point<Scalar, Dim>>(points), t);
}

}  // namespace actcrop
