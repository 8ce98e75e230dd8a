#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "actcrop/error.hpp"

namespace actcrop {

// Single-channel planes are stored row-major: rows are image rows (y), columns
// are image columns (x), so plane(y, x) addresses pixel (x, y).
template <typename Scalar>
using Plane = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using ImageF = Plane<float>;
using Mask = Plane<std::uint8_t>;
using LabelImage = Plane<int>;

struct FrameSize {
  int width = 0;
  int height = 0;

  long area() const { return static_cast<long>(width) * height; }
  int min_side() const { return width < height ? width : height; }
  bool operator==(const FrameSize&) const = default;
};

constexpr int kMinFrameSide = 16;

// 8-bit interleaved RGB frame.
struct Frame {
  int width = 0;
  int height = 0;
  int timestamp = 0;
  std::vector<std::uint8_t> data;

  Frame() = default;
  Frame(int w, int h, int t = 0)
      : width(w), height(h), timestamp(t), data(static_cast<std::size_t>(w) * h * 3, 0) {}

  FrameSize size() const { return {width, height}; }

  std::uint8_t& at(int x, int y, int c) {
    return data[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
  std::uint8_t at(int x, int y, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }

  bool valid() const {
    return width >= kMinFrameSide && height >= kMinFrameSide &&
           data.size() == static_cast<std::size_t>(width) * height * 3;
  }

  bool operator==(const Frame&) const = default;
};

struct VideoSequence {
  std::vector<Frame> frames;

  int frame_count() const { return static_cast<int>(frames.size()); }
  FrameSize size() const { return frames.empty() ? FrameSize{} : frames.front().size(); }

  bool operator==(const VideoSequence&) const = default;
};

// Throws if the sequence violates the shared-size, contiguous-timestamp or
// F >= 2 invariants.
void validate_sequence(const VideoSequence& seq);

// Luma plane (0.299 R + 0.587 G + 0.114 B) in [0, 255].
ImageF to_gray(const Frame& frame);

// Axis-aligned pixel box with inclusive bounds.
struct Box {
  int left = 0;
  int top = 0;
  int right = -1;
  int bottom = -1;

  int width() const { return right - left + 1; }
  int height() const { return bottom - top + 1; }
  long area() const { return empty() ? 0 : static_cast<long>(width()) * height(); }
  bool empty() const { return right < left || bottom < top; }
  double center_x() const { return (left + right + 1) * 0.5; }
  double center_y() const { return (top + bottom + 1) * 0.5; }

  bool operator==(const Box&) const = default;
};

inline Box box_union(const Box& a, const Box& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  return {std::min(a.left, b.left), std::min(a.top, b.top), std::max(a.right, b.right),
          std::max(a.bottom, b.bottom)};
}

inline long intersection_area(const Box& a, const Box& b) {
  const int w = std::min(a.right, b.right) - std::max(a.left, b.left) + 1;
  const int h = std::min(a.bottom, b.bottom) - std::max(a.top, b.top) + 1;
  return (w > 0 && h > 0) ? static_cast<long>(w) * h : 0;
}

}  // namespace actcrop
