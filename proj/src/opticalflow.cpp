#include "actcrop/opticalflow.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace actcrop {

namespace detail {

namespace {

std::vector<double> gaussian_kernel(int radius, double sigma) {
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    sum += k[i + radius];
  }
  for (double& v : k) v /= sum;
  return k;
}

inline int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

// Correlates rows then columns with a symmetric 1D kernel, replicating edges.
ImageF separable(const ImageF& img, const std::vector<double>& k) {
  const int h = static_cast<int>(img.rows());
  const int w = static_cast<int>(img.cols());
  const int r = static_cast<int>(k.size() / 2);
  ImageF tmp(h, w), out(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k[i + r] * img(clampi(y + i, 0, h - 1), x);
      tmp(y, x) = static_cast<float>(acc);
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k[i + r] * tmp(y, clampi(x + i, 0, w - 1));
      out(y, x) = static_cast<float>(acc);
    }
  return out;
}

}  // namespace

ImageF gaussian_blur(const ImageF& img, double sigma) {
  if (sigma <= 0.0) return img;
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  return separable(img, gaussian_kernel(radius, sigma));
}

// Running-sum box filter with replicated edges; equals separable() with a
// flat kernel up to rounding.
ImageF box_blur(const ImageF& img, int window) {
  const int h = static_cast<int>(img.rows());
  const int w = static_cast<int>(img.cols());
  const int r = window / 2;
  const double norm = 1.0 / (2 * r + 1);
  ImageF tmp(h, w), out(h, w);
  std::vector<double> acc(w);
  for (int x = 0; x < w; ++x) {
    double a = 0.0;
    for (int i = -r; i <= r; ++i) a += img(clampi(i, 0, h - 1), x);
    acc[x] = a;
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      tmp(y, x) = static_cast<float>(acc[x] * norm);
      acc[x] += img(std::min(y + r + 1, h - 1), x) - img(std::max(y - r, 0), x);
    }
  }
  for (int y = 0; y < h; ++y) {
    double a = 0.0;
    for (int i = -r; i <= r; ++i) a += tmp(y, clampi(i, 0, w - 1));
    for (int x = 0; x < w; ++x) {
      out(y, x) = static_cast<float>(a * norm);
      a += tmp(y, std::min(x + r + 1, w - 1)) - tmp(y, std::max(x - r, 0));
    }
  }
  return out;
}

float sample_bilinear(const ImageF& img, float x, float y) {
  const int w = static_cast<int>(img.cols());
  const int h = static_cast<int>(img.rows());
  x = std::clamp(x, 0.0f, static_cast<float>(w - 1));
  y = std::clamp(y, 0.0f, static_cast<float>(h - 1));
  const int x0 = static_cast<int>(x);
  const int y0 = static_cast<int>(y);
  const int x1 = std::min(x0 + 1, w - 1);
  const int y1 = std::min(y0 + 1, h - 1);
  const float ax = x - x0;
  const float ay = y - y0;
  return (1 - ay) * ((1 - ax) * img(y0, x0) + ax * img(y0, x1)) +
         ay * ((1 - ax) * img(y1, x0) + ax * img(y1, x1));
}

ImageF resize_bilinear(const ImageF& img, int width, int height) {
  ImageF out(height, width);
  const float sx = static_cast<float>(img.cols()) / width;
  const float sy = static_cast<float>(img.rows()) / height;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      out(y, x) = sample_bilinear(img, (x + 0.5f) * sx - 0.5f, (y + 0.5f) * sy - 0.5f);
  return out;
}

PolyExpansion polynomial_expansion(const ImageF& img, int n, double sigma) {
  const std::vector<double> g = gaussian_kernel(n, sigma);

  // Normal matrix of the weighted fit over basis (1, x, y, x^2, y^2, xy).
  Eigen::Matrix<double, 6, 6> normal = Eigen::Matrix<double, 6, 6>::Zero();
  for (int y = -n; y <= n; ++y)
    for (int x = -n; x <= n; ++x) {
      const Eigen::Matrix<double, 6, 1> phi(1.0, x, y, x * x, y * y, x * y);
      normal += g[x + n] * g[y + n] * phi * phi.transpose();
    }
  const Eigen::Matrix<double, 6, 6> inv = normal.inverse();

  const int h = static_cast<int>(img.rows());
  const int w = static_cast<int>(img.cols());

  // Vertical pass: moments 0, 1, 2 in y.
  std::array<ImageF, 3> col{ImageF(h, w), ImageF(h, w), ImageF(h, w)};
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double m0 = 0, m1 = 0, m2 = 0;
      for (int k = -n; k <= n; ++k) {
        const double f = g[k + n] * img(clampi(y + k, 0, h - 1), x);
        m0 += f;
        m1 += k * f;
        m2 += k * k * f;
      }
      col[0](y, x) = static_cast<float>(m0);
      col[1](y, x) = static_cast<float>(m1);
      col[2](y, x) = static_cast<float>(m2);
    }

  PolyExpansion out{ImageF(h, w), ImageF(h, w), ImageF(h, w), ImageF(h, w), ImageF(h, w)};
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      // Projections onto (1, x, y, x^2, y^2, xy).
      Eigen::Matrix<double, 6, 1> m = Eigen::Matrix<double, 6, 1>::Zero();
      for (int k = -n; k <= n; ++k) {
        const int xx = clampi(x + k, 0, w - 1);
        const double gk = g[k + n];
        const double c0 = col[0](y, xx), c1 = col[1](y, xx), c2 = col[2](y, xx);
        m[0] += gk * c0;
        m[1] += gk * k * c0;
        m[2] += gk * c1;
        m[3] += gk * k * k * c0;
        m[4] += gk * c2;
        m[5] += gk * k * c1;
      }
      const Eigen::Matrix<double, 6, 1> r = inv * m;
      out.bx(y, x) = static_cast<float>(r[1]);
      out.by(y, x) = static_cast<float>(r[2]);
      out.axx(y, x) = static_cast<float>(r[3]);
      out.ayy(y, x) = static_cast<float>(r[4]);
      out.axy(y, x) = static_cast<float>(r[5]);
    }
  return out;
}

}  // namespace detail

namespace {

using detail::PolyExpansion;

constexpr int kBorder = 5;
constexpr std::array<float, kBorder> kBorderWeight{0.14f, 0.14f, 0.4472f, 0.4472f, 0.4472f};

float border_weight(int i, int n) {
  float w = 1.0f;
  if (i < kBorder) w *= kBorderWeight[i];
  if (i >= n - kBorder) w *= kBorderWeight[n - 1 - i];
  return w;
}

}  // namespace

// One refinement: builds the per-pixel normal equations of the displacement
// fit, averages them over the window and solves the 2x2 systems in place.
void detail::refine_flow(const PolyExpansion& r0, const PolyExpansion& r1, int window, ImageF& u,
                 ImageF& v) {
  const int h = static_cast<int>(u.rows());
  const int w = static_cast<int>(u.cols());
  std::array<ImageF, 5> m{ImageF(h, w), ImageF(h, w), ImageF(h, w), ImageF(h, w), ImageF(h, w)};

  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const float dx = u(y, x);
      const float dy = v(y, x);
      const float fx = x + dx;
      const float fy = y + dy;

      const float a11 = 0.5f * (r0.axx(y, x) + detail::sample_bilinear(r1.axx, fx, fy));
      const float a22 = 0.5f * (r0.ayy(y, x) + detail::sample_bilinear(r1.ayy, fx, fy));
      const float a12 = 0.25f * (r0.axy(y, x) + detail::sample_bilinear(r1.axy, fx, fy));
      float b1 = -0.5f * (detail::sample_bilinear(r1.bx, fx, fy) - r0.bx(y, x)) + a11 * dx + a12 * dy;
      float b2 = -0.5f * (detail::sample_bilinear(r1.by, fx, fy) - r0.by(y, x)) + a12 * dx + a22 * dy;

      float s = border_weight(x, w) * border_weight(y, h);
      if (fx < 0 || fy < 0 || fx > w - 1 || fy > h - 1) s *= 0.14f;
      const float p11 = a11 * s, p12 = a12 * s, p22 = a22 * s;
      b1 *= s;
      b2 *= s;

      m[0](y, x) = p11 * p11 + p12 * p12;
      m[1](y, x) = p12 * (p11 + p22);
      m[2](y, x) = p12 * p12 + p22 * p22;
      m[3](y, x) = p11 * b1 + p12 * b2;
      m[4](y, x) = p12 * b1 + p22 * b2;
    }

  for (ImageF& plane : m) plane = detail::box_blur(plane, window);

  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double g11 = m[0](y, x), g12 = m[1](y, x), g22 = m[2](y, x);
      const double h1 = m[3](y, x), h2 = m[4](y, x);
      // Tikhonov term proportional to the local structure strength keeps the
      // solve scale-invariant and pulls aperture-limited windows toward zero.
      const double lambda = 1e-3 * (g11 + g22) + 1e-12;
      const double a = g11 + lambda, c = g22 + lambda;
      const double idet = 1.0 / (a * c - g12 * g12);
      u(y, x) = static_cast<float>((c * h1 - g12 * h2) * idet);
      v(y, x) = static_cast<float>((a * h2 - g12 * h1) * idet);
    }
}

namespace {

std::vector<ImageF> build_pyramid(const ImageF& base, int levels, double scale) {
  std::vector<ImageF> pyr{base};
  const double sigma = 0.5 * (1.0 / scale - 1.0);
  for (int l = 1; l < levels; ++l) {
    const ImageF& prev = pyr.back();
    const int w = static_cast<int>(std::lround(prev.cols() * scale));
    const int h = static_cast<int>(std::lround(prev.rows() * scale));
    if (std::min(w, h) < kMinFrameSide) break;
    pyr.push_back(detail::resize_bilinear(detail::gaussian_blur(prev, sigma), w, h));
  }
  return pyr;
}

}  // namespace

void FlowParams::validate() const {
  if (pyramid_levels < 1 || iterations < 1 || window_size < 5 || window_size % 2 == 0 ||
      poly_n < 1 || poly_sigma <= 0.0 || pyramid_scale <= 0.0 || pyramid_scale >= 1.0)
    throw Error(ErrorCode::InvalidArgument, "invalid flow parameters");
}

FlowField dense_flow(const ImageF& prev_gray, const ImageF& next_gray, const FlowParams& params) {
  params.validate();
  if (prev_gray.rows() != next_gray.rows() || prev_gray.cols() != next_gray.cols())
    throw Error(ErrorCode::DimensionMismatch, "flow inputs differ in size");

  const std::vector<ImageF> pyr0 = build_pyramid(prev_gray, params.pyramid_levels, params.pyramid_scale);
  const std::vector<ImageF> pyr1 = build_pyramid(next_gray, params.pyramid_levels, params.pyramid_scale);

  ImageF u, v;
  for (int level = static_cast<int>(pyr0.size()) - 1; level >= 0; --level) {
    const int w = static_cast<int>(pyr0[level].cols());
    const int h = static_cast<int>(pyr0[level].rows());
    if (u.size() == 0) {
      u = ImageF::Zero(h, w);
      v = ImageF::Zero(h, w);
    } else {
      const float fx = static_cast<float>(w) / static_cast<float>(u.cols());
      const float fy = static_cast<float>(h) / static_cast<float>(u.rows());
      u = detail::resize_bilinear(u, w, h) * fx;
      v = detail::resize_bilinear(v, w, h) * fy;
    }
    const PolyExpansion r0 = detail::polynomial_expansion(pyr0[level], params.poly_n, params.poly_sigma);
    const PolyExpansion r1 = detail::polynomial_expansion(pyr1[level], params.poly_n, params.poly_sigma);
    for (int it = 0; it < params.iterations; ++it) detail::refine_flow(r0, r1, params.window_size, u, v);
  }

  // Degenerate windows can only produce huge values, never NaN, but guard the
  // finiteness invariant anyway.
  for (ImageF* plane : {&u, &v})
    *plane = plane->unaryExpr([](float x) { return std::isfinite(x) ? x : 0.0f; });
  return {std::move(u), std::move(v), 0};
}

FlowField dense_flow(const Frame& prev, const Frame& next, const FlowParams& params) {
  if (prev.size() != next.size())
    throw Error(ErrorCode::DimensionMismatch, "frames differ in size");
  FlowField flow = dense_flow(to_gray(prev), to_gray(next), params);
  flow.src_timestamp = prev.timestamp;
  return flow;
}

MotionHsvImage flow_to_hsv(const FlowField& flow) {
  const int h = flow.height();
  const int w = flow.width();
  MotionHsvImage out{ImageF(h, w), ImageF(h, w), ImageF::Ones(h, w)};

  const ImageF mag = (flow.u.array().square() + flow.v.array().square()).sqrt().matrix();
  const float denom = std::max(mag.size() ? mag.maxCoeff() : 0.0f, 1e-9f);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (mag(y, x) == 0.0f) {
        out.h(y, x) = 0.0f;
        out.s(y, x) = 0.0f;
        continue;
      }
      double deg = std::atan2(static_cast<double>(flow.v(y, x)), static_cast<double>(flow.u(y, x))) *
                   180.0 / std::numbers::pi;
      if (deg < 0.0) deg += 360.0;
      if (deg >= 360.0) deg -= 360.0;
      out.h(y, x) = static_cast<float>(deg);
      out.s(y, x) = std::min(1.0f, mag(y, x) / denom);
    }
  return out;
}

Frame render_hsv(const MotionHsvImage& hsv) {
  Frame frame(hsv.width(), hsv.height());
  for (int y = 0; y < hsv.height(); ++y)
    for (int x = 0; x < hsv.width(); ++x) {
      const float hh = hsv.h(y, x) / 60.0f;
      const float s = hsv.s(y, x);
      const float v = hsv.v(y, x);
      const int sector = static_cast<int>(hh) % 6;
      const float f = hh - std::floor(hh);
      const float p = v * (1 - s), q = v * (1 - s * f), t = v * (1 - s * (1 - f));
      float r = v, g = t, b = p;
      switch (sector) {
        case 1: r = q; g = v; b = p; break;
        case 2: r = p; g = v; b = t; break;
        case 3: r = p; g = q; b = v; break;
        case 4: r = t; g = p; b = v; break;
        case 5: r = v; g = p; b = q; break;
        default: break;
      }
      frame.at(x, y, 0) = static_cast<std::uint8_t>(std::lround(r * 255));
      frame.at(x, y, 1) = static_cast<std::uint8_t>(std::lround(g * 255));
      frame.at(x, y, 2) = static_cast<std::uint8_t>(std::lround(b * 255));
    }
  return frame;
}

}  // namespace actcrop
