#include "actcrop/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "actcrop/parallel.hpp"

namespace actcrop {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
    return s.substr(1, s.size() - 2);
  return s;
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  T out{};
  in >> out;
  if (in.fail() || !in.eof())
    throw Error(ErrorCode::InvalidArgument, "bad value '" + value + "' for " + key);
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw Error(ErrorCode::InvalidArgument, "bad boolean '" + value + "' for " + key);
}

// Runs `fn`, re-labelling library errors with the stage and frame they came from.
template <typename Fn>
void in_stage(const char* stage, int t, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    std::string where = std::string("stage ") + stage;
    if (t >= 0) where += ", frame " + std::to_string(t);
    throw Error(e.code(), where + ": " + e.message());
  }
}

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

Frame render_labels(const ClusterLabelMap& map) {
  static constexpr std::uint8_t palette[8][3] = {{230, 25, 75},  {60, 180, 75},  {255, 225, 25},
                                                 {0, 130, 200},  {245, 130, 48}, {145, 30, 180},
                                                 {70, 240, 240}, {240, 50, 230}};
  Frame f(map.width(), map.height());
  for (int y = 0; y < map.height(); ++y)
    for (int x = 0; x < map.width(); ++x) {
      const int l = map.labels(y, x);
      for (int c = 0; c < 3; ++c) f.at(x, y, c) = l < 0 ? 0 : palette[l % 8][c];
    }
  return f;
}

}  // namespace

int PipelineConfig::budget_for(int frame_count) const {
  return pivot_budget ? std::max(1, *pivot_budget) : actcrop::pivot_budget(frame_count, pivot_fraction);
}

void PipelineConfig::validate() const {
  flow.validate();
  segment.validate();
  if (retarget.out_size < 8) throw Error(ErrorCode::InvalidArgument, "out_size must be >= 8");
  if (workers < 1) throw Error(ErrorCode::InvalidArgument, "workers must be >= 1");
  if (pivot_fraction <= 0.0) throw Error(ErrorCode::InvalidArgument, "pivot_fraction must be > 0");
}

void apply_config_value(PipelineConfig& c, const std::string& key, const std::string& raw) {
  const std::string v = unquote(trim(raw));
  static const std::map<std::string, std::function<void(PipelineConfig&, const std::string&)>> setters = {
      {"pyramid_levels", [](PipelineConfig& c, const std::string& v) { c.flow.pyramid_levels = parse_number<int>("pyramid_levels", v); }},
      {"pyramid_scale", [](PipelineConfig& c, const std::string& v) { c.flow.pyramid_scale = parse_number<double>("pyramid_scale", v); }},
      {"window_size", [](PipelineConfig& c, const std::string& v) { c.flow.window_size = parse_number<int>("window_size", v); }},
      {"iterations", [](PipelineConfig& c, const std::string& v) { c.flow.iterations = parse_number<int>("iterations", v); }},
      {"poly_n", [](PipelineConfig& c, const std::string& v) { c.flow.poly_n = parse_number<int>("poly_n", v); }},
      {"poly_sigma", [](PipelineConfig& c, const std::string& v) { c.flow.poly_sigma = parse_number<double>("poly_sigma", v); }},
      {"k", [](PipelineConfig& c, const std::string& v) { c.segment.k = parse_number<int>("k", v); }},
      {"open_radius", [](PipelineConfig& c, const std::string& v) { c.segment.open_radius = parse_number<int>("open_radius", v); }},
      {"close_radius", [](PipelineConfig& c, const std::string& v) { c.segment.close_radius = parse_number<int>("close_radius", v); }},
      {"min_component_fraction", [](PipelineConfig& c, const std::string& v) { c.segment.min_component_fraction = parse_number<double>("min_component_fraction", v); }},
      {"a_min_fraction", [](PipelineConfig& c, const std::string& v) { c.localize.a_min_fraction = parse_number<double>("a_min_fraction", v); }},
      {"pivot_fraction", [](PipelineConfig& c, const std::string& v) { c.pivot_fraction = parse_number<double>("pivot_fraction", v); }},
      {"pivot_budget", [](PipelineConfig& c, const std::string& v) { c.pivot_budget = parse_number<int>("pivot_budget", v); }},
      {"out_size", [](PipelineConfig& c, const std::string& v) { c.retarget.out_size = parse_number<int>("out_size", v); }},
      {"resample", [](PipelineConfig& c, const std::string& v) { c.retarget.resample = parse_resample(v); }},
      {"format", [](PipelineConfig& c, const std::string& v) { c.output_format = parse_frame_format(v); }},
      {"seed", [](PipelineConfig& c, const std::string& v) { c.seed = parse_number<std::uint64_t>("seed", v); }},
      {"workers", [](PipelineConfig& c, const std::string& v) { c.workers = parse_number<int>("workers", v); }},
      {"debug_dir", [](PipelineConfig& c, const std::string& v) { c.debug_dir = fs::path(v); }},
      {"dump_tracks", [](PipelineConfig& c, const std::string& v) { c.dump_tracks = parse_bool("dump_tracks", v); }},
  };
  const auto it = setters.find(key);
  if (it == setters.end()) throw Error(ErrorCode::InvalidArgument, "unknown config key '" + key + "'");
  it->second(c, v);
}

void apply_config_file(PipelineConfig& config, const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config " + path.string());
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty() || line.front() == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::InvalidArgument,
                  path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    apply_config_value(config, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

json config_to_json(const PipelineConfig& c) {
  return {{"pyramid_levels", c.flow.pyramid_levels},
          {"pyramid_scale", c.flow.pyramid_scale},
          {"window_size", c.flow.window_size},
          {"iterations", c.flow.iterations},
          {"poly_n", c.flow.poly_n},
          {"poly_sigma", c.flow.poly_sigma},
          {"k", c.segment.k},
          {"open_radius", c.segment.open_radius},
          {"close_radius", c.segment.close_radius},
          {"min_component_fraction", c.segment.min_component_fraction},
          {"a_min_fraction", c.localize.effective_fraction()},
          {"pivot_fraction", c.pivot_fraction},
          {"pivot_budget", c.pivot_budget ? json(*c.pivot_budget) : json(nullptr)},
          {"out_size", c.retarget.out_size},
          {"resample", to_string(c.retarget.resample)},
          {"format", to_string(c.output_format)},
          {"seed", c.seed},
          {"workers", c.workers},
          {"debug_dir", c.debug_dir ? json(c.debug_dir->string()) : json(nullptr)},
          {"dump_tracks", c.dump_tracks}};
}

std::uint64_t frame_seed(std::uint64_t seed, int t) {
  // splitmix64 finaliser
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(t) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

json PipelineReport::to_json() const {
  json t = json::object();
  for (const StageTiming& s : timings) t[s.stage] = s.seconds;
  return {{"frames", frames},
          {"timings_s", t},
          {"low_confidence_frames", low_confidence_frames},
          {"pivots", pivots}};
}

LocalizationResult localize_sequence(const VideoSequence& seq, const PipelineConfig& config,
                                     PipelineReport* report) {
  validate_sequence(seq);
  config.validate();
  const int n = seq.frame_count();
  const FrameSize size = seq.size();
  Stopwatch watch;

  std::vector<ImageF> gray(n);
  parallel_for(n, config.workers, [&](int t) { gray[t] = to_gray(seq.frames[t]); });

  std::vector<FlowField> flows(n - 1);
  parallel_for(n - 1, config.workers, [&](int t) {
    in_stage("flow", t, [&] {
      flows[t] = dense_flow(gray[t], gray[t + 1], config.flow);
      flows[t].src_timestamp = t;
    });
  });
  if (report) report->timings.push_back({"flow", watch.lap()});

  if (config.debug_dir) fs::create_directories(*config.debug_dir);

  LocalizationResult out;
  out.raw.kind = TrackKind::Raw;
  out.raw.patches.resize(n);
  std::vector<char> low(n, 0);
  parallel_for(n, config.workers, [&](int t) {
    in_stage("localize", t, [&] {
      const MotionHsvImage hsv = flow_to_hsv(flows[std::min(t, n - 2)]);
      const Segmentation seg = segment_motion(hsv, config.segment, frame_seed(config.seed, t));
      const LocalizedPatch lp = localize_frame(seg.c3s, config.localize, size, t);
      out.raw[t] = lp.patch;
      low[t] = lp.low_confidence;
      if (config.debug_dir) {
        char name[48];
        std::snprintf(name, sizeof(name), "hsv_%06d.png", t);
        write_png(render_hsv(hsv), *config.debug_dir / name);
        std::snprintf(name, sizeof(name), "labels_%06d.png", t);
        write_png(render_labels(seg.stacked), *config.debug_dir / name);
      }
    });
  });
  if (report) report->timings.push_back({"segment_localize", watch.lap()});

  out.low_confidence.assign(low.begin(), low.end());
  if (report) {
    report->frames = n;
    for (int t = 0; t < n; ++t)
      if (low[t]) report->low_confidence_frames.push_back(t);
  }
  return out;
}

PipelineResult run_pipeline(const VideoSequence& seq, const PipelineConfig& config,
                            const std::optional<PatchTrack>& track) {
  validate_sequence(seq);
  config.validate();
  PipelineResult r;
  r.report.frames = seq.frame_count();

  if (track) {
    r.smoothed = *track;
  } else {
    r.raw = localize_sequence(seq, config, &r.report).raw;
    Stopwatch watch;
    in_stage("temporal", -1, [&] {
      const SmoothingResult s = stabilize_track(r.raw, seq.size(), config.budget_for(seq.frame_count()));
      r.smoothed = s.smoothed;
      r.report.pivots = s.pivots.pt;
    });
    r.report.timings.push_back({"temporal", watch.lap()});
  }
  if (r.smoothed.size() != seq.frame_count())
    throw Error(ErrorCode::LengthMismatch, "track length differs from frame count");

  Stopwatch watch;
  r.output.frames.resize(seq.frames.size());
  parallel_for(seq.frame_count(), config.workers, [&](int t) {
    in_stage("retarget", t,
             [&] { r.output.frames[t] = crop_patch(seq.frames[t], r.smoothed[t], config.retarget); });
  });
  r.report.timings.push_back({"retarget", watch.lap()});
  return r;
}

PipelineReport run_pipeline(const PipelineConfig& config, const fs::path& input, const fs::path& output,
                            const std::optional<fs::path>& track_path) {
  Stopwatch watch;
  VideoSequence seq;
  in_stage("ingest", -1, [&] { seq = read_sequence(input); });
  const double ingest = watch.lap();

  std::optional<PatchTrack> track;
  if (track_path) track = read_track_sidecar(*track_path, TrackKind::Smoothed);

  PipelineResult r = run_pipeline(seq, config, track);
  r.report.timings.insert(r.report.timings.begin(), {"ingest", ingest});

  watch.lap();
  in_stage("write", -1, [&] {
    write_sequence(r.output, output, config.output_format);
    if (config.dump_tracks) {
      if (!track) write_track_sidecar(r.raw, output / "track_raw.json");
      write_track_sidecar(r.smoothed, output / "track_smoothed.json");
    }
  });
  r.report.timings.push_back({"write", watch.lap()});
  return r.report;
}

}  // namespace actcrop
