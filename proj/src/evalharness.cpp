#include "actcrop/evalharness.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include <nlohmann/json.hpp>

#include "actcrop/pipeline.hpp"
#include "actcrop/temporal.hpp"

namespace actcrop {

namespace {

// Both cells have R - G > 100, as does any blend of them, while grey pixels
// have R == G. The luma contrast between the cells is ~128.
constexpr std::uint8_t kKeyA[3] = {255, 100, 255};
constexpr std::uint8_t kKeyB[3] = {120, 0, 0};
constexpr int kCheck = 6;

struct Wave {
  double fx, fy, phase, amp;
};

std::vector<Wave> background_waves(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<Wave> w;
  for (int i = 0; i < 6; ++i)
    w.push_back({0.1 + 0.4 * U(rng), 0.1 + 0.4 * U(rng), 2 * std::numbers::pi * U(rng), 14 + 14 * U(rng)});
  return w;
}

double background_at(const std::vector<Wave>& waves, double x, double y) {
  double v = 128.0;
  for (const Wave& w : waves) v += w.amp * std::sin(w.fx * x + w.fy * y + w.phase) * 0.5;
  return v;
}

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

// Sub-pixel top-left positions of the subject for every frame.
std::vector<Eigen::Vector2d> subject_path(const SyntheticSpec& spec, std::mt19937_64& rng) {
  const int s = spec.subject_size;
  const double lo = spec.border_margin;
  const double max_x = spec.frame_w - s - spec.border_margin;
  const double max_y = spec.frame_h - s - spec.border_margin;
  if (max_x < lo || max_y < lo)
    throw Error(ErrorCode::SubjectEscapesFrame, "subject and margin do not fit the frame");
  const int n = spec.frames;
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<Eigen::Vector2d> pos(n);

  switch (spec.trajectory) {
    case Trajectory::Linear: {
      const Eigen::Vector2d span = spec.velocity * (n - 1);
      const double lo_x = lo + std::max(0.0, -span.x()), hi_x = max_x - std::max(0.0, span.x());
      const double lo_y = lo + std::max(0.0, -span.y()), hi_y = max_y - std::max(0.0, span.y());
      if (lo_x > hi_x || lo_y > hi_y)
        throw Error(ErrorCode::SubjectEscapesFrame, "linear path does not fit the frame");
      const Eigen::Vector2d start(std::round(lo_x + (hi_x - lo_x) * U(rng)),
                                  std::round(lo_y + (hi_y - lo_y) * U(rng)));
      for (int t = 0; t < n; ++t) pos[t] = start + spec.velocity * t;
      break;
    }
    case Trajectory::Sinusoidal: {
      // Peak speed per axis equals the velocity component.
      const double period = std::max(8.0, n / 1.5);
      const double w = 2 * std::numbers::pi / period;
      const Eigen::Vector2d amp = spec.velocity.cwiseAbs() / w;
      if (2 * amp.x() > max_x - lo || 2 * amp.y() > max_y - lo)
        throw Error(ErrorCode::SubjectEscapesFrame, "sinusoid amplitude does not fit the frame");
      const Eigen::Vector2d centre(lo + amp.x() + (max_x - lo - 2 * amp.x()) * U(rng),
                                   lo + amp.y() + (max_y - lo - 2 * amp.y()) * U(rng));
      const double phase = 2 * std::numbers::pi * U(rng);
      for (int t = 0; t < n; ++t)
        pos[t] = centre + Eigen::Vector2d(amp.x() * std::sin(w * t + phase),
                                          amp.y() * std::sin(w * t + phase + std::numbers::pi / 2));
      break;
    }
    case Trajectory::RandomWalk: {
      // Velocity random walk with bounded speed, reflected at the frame edges.
      const double vmax = std::max(0.5, spec.velocity.norm());
      std::normal_distribution<double> N(0.0, 0.25 * vmax);
      Eigen::Vector2d p(lo + (max_x - lo) * (0.25 + 0.5 * U(rng)), lo + (max_y - lo) * (0.25 + 0.5 * U(rng)));
      Eigen::Vector2d v = spec.velocity;
      for (int t = 0; t < n; ++t) {
        pos[t] = p;
        v += Eigen::Vector2d(N(rng), N(rng));
        if (v.norm() > vmax) v *= vmax / v.norm();
        if (v.norm() < 0.5 * vmax) v = v.norm() > 1e-9 ? Eigen::Vector2d(v * (0.5 * vmax / v.norm())) : spec.velocity;
        p += v;
        if (p.x() < lo || p.x() > max_x) { v.x() = -v.x(); p.x() = std::clamp(p.x(), lo, max_x); }
        if (p.y() < lo || p.y() > max_y) { v.y() = -v.y(); p.y() = std::clamp(p.y(), lo, max_y); }
      }
      break;
    }
  }

  for (int t = 0; t < n; ++t)
    if (pos[t].x() < 0 || pos[t].y() < 0 || pos[t].x() + s > spec.frame_w || pos[t].y() + s > spec.frame_h)
      throw Error(ErrorCode::SubjectEscapesFrame, "subject leaves the frame at t=" + std::to_string(t));
  return pos;
}

double luma(double r, double g, double b) { return 0.299 * r + 0.587 * g + 0.114 * b; }

// Pixel column/row i is fully covered by the span [lo, lo + len).
bool fully_covered(int i, double lo, double len) { return i >= lo && i + 1 <= lo + len; }

// Inclusive pixel range fully covered by [lo, lo + len).
std::pair<int, int> covered_range(double lo, double len) {
  int a = static_cast<int>(std::floor(lo)), b = static_cast<int>(std::ceil(lo + len));
  while (!fully_covered(a, lo, len)) ++a;
  while (!fully_covered(b, lo, len)) --b;
  return {a, b};
}

// Paints the checker subject with its top-left corner at p. Each pixel averages
// a 4x4 grid of samples. Fully covered pixels keep the (blended) colour key;
// partially covered ones are reduced to their grey luma, so the key marks the
// fully covered pixels exactly while sub-pixel motion still shows in the
// intensity.
void paint_subject(Frame& f, const Eigen::Vector2d& p, int s) {
  constexpr int kSub = 4;
  const int x0 = std::max(0, static_cast<int>(std::floor(p.x())));
  const int y0 = std::max(0, static_cast<int>(std::floor(p.y())));
  const int x1 = std::min(f.width - 1, static_cast<int>(std::ceil(p.x() + s)));
  const int y1 = std::min(f.height - 1, static_cast<int>(std::ceil(p.y() + s)));
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      double acc[3] = {0, 0, 0};
      int hits = 0;
      for (int j = 0; j < kSub; ++j)
        for (int i = 0; i < kSub; ++i) {
          const double lx = x + (i + 0.5) / kSub - p.x(), ly = y + (j + 0.5) / kSub - p.y();
          const bool in = lx >= 0 && ly >= 0 && lx < s && ly < s;
          hits += in;
          const std::uint8_t* key =
              ((static_cast<int>(std::floor(lx)) / kCheck + static_cast<int>(std::floor(ly)) / kCheck) % 2) ? kKeyA
                                                                                                    : kKeyB;
          for (int c = 0; c < 3; ++c) acc[c] += in ? key[c] : f.at(x, y, c);
        }
      if (hits == 0) continue;
      for (double& a : acc) a /= kSub * kSub;
      if (fully_covered(x, p.x(), s) && fully_covered(y, p.y(), s)) {
        for (int c = 0; c < 3; ++c) f.at(x, y, c) = to_byte(acc[c]);
      } else {
        const std::uint8_t g = to_byte(luma(acc[0], acc[1], acc[2]));
        for (int c = 0; c < 3; ++c) f.at(x, y, c) = g;
      }
    }
}

}  // namespace

Trajectory parse_trajectory(std::string_view name) {
  if (name == "linear") return Trajectory::Linear;
  if (name == "sinusoidal") return Trajectory::Sinusoidal;
  if (name == "random-walk") return Trajectory::RandomWalk;
  throw Error(ErrorCode::InvalidArgument, "unknown trajectory '" + std::string(name) + "'");
}

const char* to_string(Trajectory t) {
  switch (t) {
    case Trajectory::Linear: return "linear";
    case Trajectory::Sinusoidal: return "sinusoidal";
    case Trajectory::RandomWalk: return "random-walk";
  }
  return "?";
}

BackgroundMotion parse_background(std::string_view name) {
  if (name == "static") return BackgroundMotion::Static;
  if (name == "drifting") return BackgroundMotion::Drifting;
  throw Error(ErrorCode::InvalidArgument, "unknown background '" + std::string(name) + "'");
}

const char* to_string(BackgroundMotion b) { return b == BackgroundMotion::Static ? "static" : "drifting"; }

bool is_subject_pixel(const Frame& frame, int x, int y) {
  return frame.at(x, y, 0) - frame.at(x, y, 1) > 100;
}

SyntheticVideo generate_synthetic(const SyntheticSpec& spec) {
  if (spec.frames < 2) throw Error(ErrorCode::TooFewFrames, "synthetic video needs >= 2 frames");
  if (spec.frame_w < kMinFrameSide || spec.frame_h < kMinFrameSide || spec.subject_size < 2 ||
      spec.subject_size > std::min(spec.frame_w, spec.frame_h))
    throw Error(ErrorCode::SubjectEscapesFrame, "subject does not fit the frame");

  std::mt19937_64 rng(spec.seed);
  const std::vector<Wave> waves = background_waves(rng);
  const std::vector<Eigen::Vector2d> path = subject_path(spec, rng);
  const int s = spec.subject_size;

  SyntheticVideo out;
  const int n_corrupt = static_cast<int>(std::lround(spec.jitter_fraction * spec.frames));
  if (n_corrupt > 0) {
    std::vector<int> idx(spec.frames);
    for (int t = 0; t < spec.frames; ++t) idx[t] = t;
    std::shuffle(idx.begin(), idx.end(), rng);
    out.corrupted.assign(idx.begin(), idx.begin() + std::min(n_corrupt, spec.frames));
    std::sort(out.corrupted.begin(), out.corrupted.end());
  }

  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  out.ground_truth.kind = TrackKind::Raw;
  for (int t = 0; t < spec.frames; ++t) {
    Frame f(spec.frame_w, spec.frame_h, t);
    const Eigen::Vector2d shift =
        spec.background == BackgroundMotion::Drifting ? Eigen::Vector2d(spec.drift * t) : Eigen::Vector2d::Zero();
    for (int y = 0; y < f.height; ++y)
      for (int x = 0; x < f.width; ++x) {
        const std::uint8_t v = to_byte(background_at(waves, x - shift.x(), y - shift.y()));
        for (int c = 0; c < 3; ++c) f.at(x, y, c) = v;
      }

    // Distractor: a grey high-contrast block visible in this frame only.
    if (std::binary_search(out.corrupted.begin(), out.corrupted.end(), t)) {
      const int ds = std::max(4, s * 3 / 4);
      const int dx = static_cast<int>(U(rng) * (f.width - ds));
      const int dy = static_cast<int>(U(rng) * (f.height - ds));
      const int cell = std::max(2, ds / 5);
      for (int y = 0; y < ds; ++y)
        for (int x = 0; x < ds; ++x) {
          const std::uint8_t v = ((x / cell + y / cell) % 2) ? 250 : 5;
          for (int c = 0; c < 3; ++c) f.at(dx + x, dy + y, c) = v;
        }
    }

    const Eigen::Vector2d& p = path[t];
    paint_subject(f, p, s);

    if (spec.noise_sigma > 0.0)
      for (auto& byte : f.data) byte = to_byte(byte + spec.noise_sigma * noise(rng));

    out.video.frames.push_back(std::move(f));
    const auto [l, r] = covered_range(p.x(), s);
    const auto [tp, b] = covered_range(p.y(), s);
    const Box key_box{l, tp, r, b};
    out.ground_truth.patches.push_back(
        {key_box.center_x(), key_box.center_y(), static_cast<double>(std::max(key_box.width(), key_box.height())), t});
  }
  return out;
}

nlohmann::json TrackMetrics::to_json() const {
  return {{"mean_iou_gt", mean_iou_gt},
          {"center_rmse", center_rmse},
          {"jitter_raw", jitter_raw},
          {"jitter_smoothed", jitter_smoothed},
          {"containment", containment}};
}

double track_jitter(const PatchTrack& track) {
  const int n = track.size();
  if (n < 3) return 0.0;
  double sum = 0.0;
  for (int t = 1; t + 1 < n; ++t)
    sum += (track[t + 1].point() - 2.0 * track[t].point() + track[t - 1].point()).norm();
  return sum / (n - 2);
}

TrackMetrics evaluate(const PatchTrack& pred, const PatchTrack& gt, const PatchTrack& raw) {
  if (pred.size() != gt.size() || raw.size() != gt.size())
    throw Error(ErrorCode::LengthMismatch, "tracks differ in length");
  if (gt.size() == 0) throw Error(ErrorCode::EmptyTrack, "cannot evaluate empty tracks");
  const int n = gt.size();
  TrackMetrics m;
  double iou_sum = 0.0, sq = 0.0;
  int inside = 0;
  for (int t = 0; t < n; ++t) {
    const SquarePatch& p = pred[t];
    const SquarePatch& g = gt[t];
    iou_sum += iou(p, g);
    sq += (p.x - g.x) * (p.x - g.x) + (p.y - g.y) * (p.y - g.y);
    if (std::abs(g.x - p.x) <= p.d / 2 && std::abs(g.y - p.y) <= p.d / 2) ++inside;
  }
  m.mean_iou_gt = iou_sum / n;
  m.center_rmse = std::sqrt(sq / n);
  m.containment = static_cast<double>(inside) / n;
  m.jitter_raw = track_jitter(raw);
  m.jitter_smoothed = track_jitter(pred);
  return m;
}

std::vector<CaseResult> run_suite(const std::vector<SyntheticSpec>& specs, const PipelineConfig& config) {
  std::vector<CaseResult> out;
  out.reserve(specs.size());
  for (const SyntheticSpec& spec : specs) {
    const SyntheticVideo synth = generate_synthetic(spec);
    const PipelineResult r = run_pipeline(synth.video, config);
    out.push_back({spec, evaluate(r.smoothed, synth.ground_truth, r.raw),
                   evaluate(r.raw, synth.ground_truth, r.raw)});
  }
  return out;
}

}  // namespace actcrop
