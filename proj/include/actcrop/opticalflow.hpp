#pragma once

#include "actcrop/image.hpp"

namespace actcrop {

// Parameters of the coarse-to-fine polynomial-expansion flow.
struct FlowParams {
  int pyramid_levels = 3;
  double pyramid_scale = 0.5;
  int window_size = 15;   // odd, >= 5; side of the averaging window
  int iterations = 3;
  int poly_n = 5;         // half-width of the expansion neighbourhood
  double poly_sigma = 1.1;

  void validate() const;
};

// Dense motion field. The convention is prev(x, y) ~ next(x + u, y + v).
struct FlowField {
  ImageF u;
  ImageF v;
  int src_timestamp = 0;

  int width() const { return static_cast<int>(u.cols()); }
  int height() const { return static_cast<int>(u.rows()); }
};

struct MotionHsvImage {
  ImageF h;  // degrees, [0, 360)
  ImageF s;  // [0, 1]
  ImageF v;  // constant 1

  int width() const { return static_cast<int>(h.cols()); }
  int height() const { return static_cast<int>(h.rows()); }
};

FlowField dense_flow(const Frame& prev, const Frame& next, const FlowParams& params = {});
FlowField dense_flow(const ImageF& prev_gray, const ImageF& next_gray, const FlowParams& params = {});

MotionHsvImage flow_to_hsv(const FlowField& flow);

// RGB rendering of a motion image, for debug dumps.
Frame render_hsv(const MotionHsvImage& hsv);

namespace detail {

// Per-pixel quadratic fit f(p + q) ~ q'Aq + b'q + c with Gaussian applicability.
// Planes: bx, by, axx, ayy, axy, with A = [axx, axy/2; axy/2, ayy].
struct PolyExpansion {
  ImageF bx, by, axx, ayy, axy;
};

PolyExpansion polynomial_expansion(const ImageF& img, int n, double sigma);

// One displacement refinement step, updating (u, v) in place.
void refine_flow(const PolyExpansion& prev, const PolyExpansion& next, int window, ImageF& u,
                 ImageF& v);

ImageF gaussian_blur(const ImageF& img, double sigma);
ImageF box_blur(const ImageF& img, int window);
ImageF resize_bilinear(const ImageF& img, int width, int height);
float sample_bilinear(const ImageF& img, float x, float y);

}  // namespace detail

}  // namespace actcrop
