#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "actcrop/evalharness.hpp"
#include "actcrop/pipeline.hpp"
#include "actcrop/temporal.hpp"
#include "actcrop/videoio.hpp"

namespace fs = std::filesystem;
using namespace actcrop;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kInternal = 3 };

// Command-line overrides; every field left empty keeps the config-file value.
struct Overrides {
  std::optional<fs::path> config_file;
  std::optional<int> out_size, pivot_budget, k, workers, window_size, pyramid_levels;
  std::optional<double> pivot_fraction, a_min_fraction;
  std::optional<std::string> resample, format;
  std::optional<std::uint64_t> seed;
  std::optional<fs::path> debug_dir;
  bool dump_tracks = false;
};

void add_pipeline_options(CLI::App* app, Overrides& o) {
  app->add_option("-c,--config", o.config_file, "key = value configuration file")->check(CLI::ExistingFile);
  app->add_option("--out-size", o.out_size, "output side in pixels (e.g. 56 or 112)");
  app->add_option("--resample", o.resample, "bilinear or nearest");
  app->add_option("--format", o.format, "output frame format: png, ppm or raw");
  app->add_option("--pivot-budget", o.pivot_budget, "number of pivot frames (overrides --pivot-fraction)");
  app->add_option("--pivot-fraction", o.pivot_fraction, "pivot budget as a fraction of the frame count");
  app->add_option("--a-min", o.a_min_fraction, "minimum patch area as a fraction of the frame");
  app->add_option("--clusters", o.k, "k-means cluster count");
  app->add_option("--window", o.window_size, "optical flow averaging window (odd)");
  app->add_option("--levels", o.pyramid_levels, "optical flow pyramid levels");
  app->add_option("--seed", o.seed, "clustering seed");
  app->add_option("-j,--workers", o.workers, "worker threads");
  app->add_option("--debug-dir", o.debug_dir, "dump per-frame motion and label images here");
  app->add_flag("--dump-tracks", o.dump_tracks, "write track_raw.json and track_smoothed.json");
}

PipelineConfig resolve(const Overrides& o) {
  PipelineConfig c;
  if (o.config_file) apply_config_file(c, *o.config_file);
  if (o.out_size) c.retarget.out_size = *o.out_size;
  if (o.resample) c.retarget.resample = parse_resample(*o.resample);
  if (o.format) c.output_format = parse_frame_format(*o.format);
  if (o.pivot_fraction) {
    c.pivot_fraction = *o.pivot_fraction;
    c.pivot_budget.reset();
  }
  if (o.pivot_budget) c.pivot_budget = *o.pivot_budget;
  if (o.a_min_fraction) c.localize.a_min_fraction = *o.a_min_fraction;
  if (o.k) c.segment.k = *o.k;
  if (o.window_size) c.flow.window_size = *o.window_size;
  if (o.pyramid_levels) c.flow.pyramid_levels = *o.pyramid_levels;
  if (o.seed) c.seed = *o.seed;
  if (o.workers) c.workers = *o.workers;
  if (o.debug_dir) c.debug_dir = *o.debug_dir;
  if (o.dump_tracks) c.dump_tracks = true;
  c.validate();
  c.flow.validate();
  c.segment.validate();
  spdlog::info("config {}", config_to_json(c).dump());
  return c;
}

void write_json(const nlohmann::json& j, const std::optional<fs::path>& path) {
  if (!path) {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(*path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path->string());
  out << j.dump(2) << '\n';
}

void log_report(const PipelineReport& r) {
  for (const StageTiming& s : r.timings) spdlog::info("stage {:<16} {:8.3f} s", s.stage, s.seconds);
  if (!r.low_confidence_frames.empty())
    spdlog::warn("{} of {} frames fell back to the centred patch", r.low_confidence_frames.size(), r.frames);
}

// ---- eval ----------------------------------------------------------------

struct EvalOptions {
  std::optional<fs::path> pred, gt, raw, json_out, csv_out;
  bool sweep = false;
  int seeds = 10, frames = 64, width = 128, height = 96;
  std::vector<std::string> trajectories{"linear", "sinusoidal", "random-walk"};
  std::string background = "static";
  double jitter_fraction = 0.1, noise = 2.0;
};

int run_eval(const EvalOptions& e, const Overrides& o) {
  if (!e.sweep) {
    if (!e.pred || !e.gt) throw CLI::ValidationError("eval", "--pred and --gt are required without --sweep");
    const PatchTrack pred = read_track_sidecar(*e.pred, TrackKind::Smoothed);
    const PatchTrack gt = read_track_sidecar(*e.gt);
    const PatchTrack raw = e.raw ? read_track_sidecar(*e.raw) : pred;
    write_json(evaluate(pred, gt, raw).to_json(), e.json_out);
    return kOk;
  }

  const PipelineConfig config = resolve(o);
  std::vector<SyntheticSpec> specs;
  for (int seed = 0; seed < e.seeds; ++seed)
    for (const std::string& name : e.trajectories) {
      SyntheticSpec s;
      s.frames = e.frames;
      s.frame_w = e.width;
      s.frame_h = e.height;
      s.trajectory = parse_trajectory(name);
      s.background = parse_background(e.background);
      s.jitter_fraction = e.jitter_fraction;
      s.noise_sigma = e.noise;
      s.seed = static_cast<std::uint64_t>(seed);
      specs.push_back(s);
    }
  spdlog::info("evaluating {} synthetic videos", specs.size());
  const std::vector<CaseResult> results = run_suite(specs, config);

  nlohmann::json cases = nlohmann::json::array();
  TrackMetrics mean_raw, mean_sm;
  for (const CaseResult& r : results) {
    cases.push_back({{"trajectory", to_string(r.spec.trajectory)},
                     {"seed", r.spec.seed},
                     {"raw", r.raw.to_json()},
                     {"smoothed", r.smoothed.to_json()}});
    for (auto [acc, m] : {std::pair{&mean_raw, &r.raw}, std::pair{&mean_sm, &r.smoothed}}) {
      acc->mean_iou_gt += m->mean_iou_gt / results.size();
      acc->center_rmse += m->center_rmse / results.size();
      acc->jitter_raw += m->jitter_raw / results.size();
      acc->jitter_smoothed += m->jitter_smoothed / results.size();
      acc->containment += m->containment / results.size();
    }
  }
  write_json({{"cases", cases}, {"mean", {{"raw", mean_raw.to_json()}, {"smoothed", mean_sm.to_json()}}}},
             e.json_out);

  if (e.csv_out) {
    std::ofstream csv(*e.csv_out);
    if (!csv) throw Error(ErrorCode::IoError, "cannot write " + e.csv_out->string());
    csv << "trajectory,seed,track,mean_iou_gt,center_rmse,jitter_raw,jitter_smoothed,containment\n";
    for (const CaseResult& r : results)
      for (auto [name, m] : {std::pair{"raw", &r.raw}, std::pair{"smoothed", &r.smoothed}})
        csv << to_string(r.spec.trajectory) << ',' << r.spec.seed << ',' << name << ',' << m->mean_iou_gt << ','
            << m->center_rmse << ',' << m->jitter_raw << ',' << m->jitter_smoothed << ',' << m->containment
            << '\n';
  }
  spdlog::info("mean iou raw {:.3f} smoothed {:.3f}, jitter raw {:.3f} smoothed {:.3f}", mean_raw.mean_iou_gt,
               mean_sm.mean_iou_gt, mean_sm.jitter_raw, mean_sm.jitter_smoothed);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("actcrop"));
  spdlog::set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");

  CLI::App app{"Square action-focused video retargeting"};
  app.require_subcommand(1);
  app.fallthrough();
  bool verbose = false, quiet = false;
  app.add_flag("-v,--verbose", verbose, "debug logging");
  app.add_flag("-q,--quiet", quiet, "warnings and errors only");

  // crop
  Overrides crop_o;
  fs::path crop_in, crop_out;
  std::optional<fs::path> crop_track, crop_report;
  auto* crop = app.add_subcommand("crop", "localize, smooth and crop a frame sequence");
  crop->add_option("input", crop_in, "input frame directory")->required();
  crop->add_option("output", crop_out, "output directory")->required();
  crop->add_option("--track", crop_track, "crop along this track instead of localizing")->check(CLI::ExistingFile);
  crop->add_option("--report", crop_report, "write the run report JSON here (default stdout)");
  add_pipeline_options(crop, crop_o);

  // localize
  Overrides loc_o;
  fs::path loc_in, loc_out;
  auto* loc = app.add_subcommand("localize", "per-frame raw patch track only");
  loc->add_option("input", loc_in, "input frame directory")->required();
  loc->add_option("-o,--out", loc_out, "raw track JSON")->required();
  add_pipeline_options(loc, loc_o);

  // smooth
  fs::path sm_in, sm_out;
  int sm_w = 0, sm_h = 0;
  std::optional<int> sm_budget;
  double sm_fraction = 0.15;
  auto* smooth = app.add_subcommand("smooth", "pivot selection and polyBezier smoothing of a track");
  smooth->add_option("track", sm_in, "raw track JSON")->required()->check(CLI::ExistingFile);
  smooth->add_option("-o,--out", sm_out, "smoothed track JSON")->required();
  smooth->add_option("--width", sm_w, "frame width")->required()->check(CLI::PositiveNumber);
  smooth->add_option("--height", sm_h, "frame height")->required()->check(CLI::PositiveNumber);
  smooth->add_option("--pivot-budget", sm_budget, "number of pivots");
  smooth->add_option("--pivot-fraction", sm_fraction, "pivots as a fraction of the frame count");

  // eval
  EvalOptions ev;
  Overrides ev_o;
  auto* eval = app.add_subcommand("eval", "score tracks against ground truth, or sweep synthetic videos");
  eval->add_option("--pred", ev.pred, "predicted (smoothed) track")->check(CLI::ExistingFile);
  eval->add_option("--gt", ev.gt, "ground-truth track")->check(CLI::ExistingFile);
  eval->add_option("--raw", ev.raw, "raw track for the jitter_raw metric")->check(CLI::ExistingFile);
  eval->add_option("--json", ev.json_out, "write metrics here (default stdout)");
  eval->add_flag("--sweep", ev.sweep, "generate and score a synthetic suite");
  eval->add_option("--seeds", ev.seeds, "sweep: seeds per trajectory");
  eval->add_option("--frames", ev.frames, "sweep: frames per video");
  eval->add_option("--width", ev.width, "sweep: frame width");
  eval->add_option("--height", ev.height, "sweep: frame height");
  eval->add_option("--trajectories", ev.trajectories, "sweep: trajectory kinds");
  eval->add_option("--background", ev.background, "sweep: static or drifting");
  eval->add_option("--jitter-fraction", ev.jitter_fraction, "sweep: share of corrupted frames");
  eval->add_option("--noise", ev.noise, "sweep: pixel noise sigma");
  eval->add_option("--csv", ev.csv_out, "sweep: per-case CSV");
  add_pipeline_options(eval, ev_o);

  // synth
  SyntheticSpec sy;
  fs::path sy_out;
  std::string sy_traj = "linear", sy_bg = "static", sy_format = "png";
  std::vector<double> sy_vel;
  auto* synth = app.add_subcommand("synth", "render a synthetic video with ground truth");
  synth->add_option("output", sy_out, "output directory")->required();
  synth->add_option("--frames", sy.frames, "frame count");
  synth->add_option("--width", sy.frame_w, "frame width");
  synth->add_option("--height", sy.frame_h, "frame height");
  synth->add_option("--subject-size", sy.subject_size, "subject side in pixels");
  synth->add_option("--velocity", sy_vel, "subject velocity vx vy (px/frame)")->expected(2);
  synth->add_option("--trajectory", sy_traj, "linear, sinusoidal or random-walk");
  synth->add_option("--background", sy_bg, "static or drifting");
  synth->add_option("--noise", sy.noise_sigma, "pixel noise sigma");
  synth->add_option("--jitter-fraction", sy.jitter_fraction, "share of frames with a distractor");
  synth->add_option("--seed", sy.seed, "generator seed");
  synth->add_option("--format", sy_format, "png, ppm or raw");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }
  spdlog::set_level(quiet ? spdlog::level::warn : verbose ? spdlog::level::debug : spdlog::level::info);

  try {
    if (*crop) {
      const PipelineConfig c = resolve(crop_o);
      const PipelineReport r = run_pipeline(c, crop_in, crop_out, crop_track);
      log_report(r);
      write_json(r.to_json(), crop_report);
      spdlog::info("wrote {} frames to {}", r.frames, crop_out.string());
    } else if (*loc) {
      const PipelineConfig c = resolve(loc_o);
      const VideoSequence seq = read_sequence(loc_in);
      PipelineReport r;
      r.frames = seq.frame_count();
      const LocalizationResult lr = localize_sequence(seq, c, &r);
      write_track_sidecar(lr.raw, loc_out);
      log_report(r);
      spdlog::info("wrote raw track of {} frames to {}", lr.raw.size(), loc_out.string());
    } else if (*smooth) {
      const PatchTrack raw = read_track_sidecar(sm_in);
      const int budget = sm_budget ? *sm_budget : pivot_budget(raw.size(), sm_fraction);
      const SmoothingResult s = stabilize_track(raw, {sm_w, sm_h}, budget);
      write_track_sidecar(s.smoothed, sm_out);
      spdlog::info("budget {} -> {} pivots, wrote {}", budget, s.pivots.pt.size(), sm_out.string());
    } else if (*eval) {
      return run_eval(ev, ev_o);
    } else if (*synth) {
      sy.trajectory = parse_trajectory(sy_traj);
      sy.background = parse_background(sy_bg);
      if (!sy_vel.empty()) sy.velocity = {sy_vel[0], sy_vel[1]};
      const SyntheticVideo v = generate_synthetic(sy);
      write_sequence(v.video, sy_out, parse_frame_format(sy_format));
      write_track_sidecar(v.ground_truth, sy_out / "track_gt.json");
      spdlog::info("wrote {} frames and track_gt.json to {}", v.video.frame_count(), sy_out.string());
    }
  } catch (const CLI::ValidationError& e) {
    spdlog::error("{}", e.what());
    return kUsage;
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return e.code() == ErrorCode::InvalidArgument ? kUsage : kData;
  } catch (const std::exception& e) {
    spdlog::critical("internal error: {}", e.what());
    return kInternal;
  }
  return kOk;
}
