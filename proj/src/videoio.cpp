#include "actcrop/videoio.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <limits>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

namespace actcrop {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

bool has_image_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png" || ext == ".ppm";
}

Frame read_image(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png" ? read_png(p) : read_ppm(p);
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw Error(ErrorCode::DecodeError, "cannot open " + p.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::DecodeError, p.string() + ": " + e.what());
  }
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + p.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + p.string());
}

VideoSequence read_raw(const fs::path& raw_path, const json& manifest) {
  int w = 0, h = 0, f = 0;
  try {
    w = manifest.at("width").get<int>();
    h = manifest.at("height").get<int>();
    f = manifest.at("frames").get<int>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::DecodeError, std::string("bad manifest: ") + e.what());
  }
  if (f < 2) throw Error(ErrorCode::TooFewFrames, "manifest declares " + std::to_string(f));
  if (w < kMinFrameSide || h < kMinFrameSide)
    throw Error(ErrorCode::DecodeError, "frame size below pipeline minimum");

  std::ifstream in(raw_path, std::ios::binary);
  if (!in) throw Error(ErrorCode::DecodeError, "cannot open " + raw_path.string());
  const std::size_t plane = static_cast<std::size_t>(w) * h;
  std::vector<std::uint8_t> buf(plane * 3);

  VideoSequence seq;
  seq.frames.reserve(f);
  for (int t = 0; t < f; ++t) {
    if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size())))
      throw Error(ErrorCode::DecodeError, "raw file truncated at frame " + std::to_string(t));
    Frame frame(w, h, t);
    for (std::size_t i = 0; i < plane; ++i)
      for (int c = 0; c < 3; ++c) frame.data[i * 3 + c] = buf[c * plane + i];
    seq.frames.push_back(std::move(frame));
  }
  return seq;
}

}  // namespace

FrameFormat parse_frame_format(std::string_view name) {
  if (name == "png") return FrameFormat::Png;
  if (name == "ppm") return FrameFormat::Ppm;
  if (name == "raw") return FrameFormat::Raw;
  throw Error(ErrorCode::InvalidArgument, "unknown frame format '" + std::string(name) + "'");
}

const char* to_string(FrameFormat format) {
  switch (format) {
    case FrameFormat::Png: return "png";
    case FrameFormat::Ppm: return "ppm";
    case FrameFormat::Raw: return "raw";
  }
  return "?";
}

void validate_sequence(const VideoSequence& seq) {
  if (seq.frame_count() < 2)
    throw Error(ErrorCode::TooFewFrames, "need at least 2 frames, got " +
                                             std::to_string(seq.frame_count()));
  const FrameSize size = seq.size();
  for (int t = 0; t < seq.frame_count(); ++t) {
    const Frame& f = seq.frames[t];
    if (f.size() != size) throw Error(ErrorCode::MixedDimensions, "frame " + std::to_string(t));
    if (!f.valid()) throw Error(ErrorCode::DecodeError, "invalid frame " + std::to_string(t));
    if (f.timestamp != t)
      throw Error(ErrorCode::InvalidArgument, "non-contiguous timestamp at " + std::to_string(t));
  }
}

ImageF to_gray(const Frame& frame) {
  ImageF gray(frame.height, frame.width);
  for (int y = 0; y < frame.height; ++y)
    for (int x = 0; x < frame.width; ++x)
      gray(y, x) = 0.299f * frame.at(x, y, 0) + 0.587f * frame.at(x, y, 1) +
                   0.114f * frame.at(x, y, 2);
  return gray;
}

VideoSequence read_sequence(const fs::path& dir, const std::optional<fs::path>& manifest) {
  if (manifest) {
    const json m = read_json(*manifest);
    const fs::path raw = m.contains("file") ? manifest->parent_path() / m["file"].get<std::string>()
                                            : dir / "video.raw";
    return read_raw(raw, m);
  }
  if (fs::exists(dir / "video.raw") && fs::exists(dir / "manifest.json"))
    return read_raw(dir / "video.raw", read_json(dir / "manifest.json"));

  std::error_code ec;
  if (!fs::is_directory(dir, ec))
    throw Error(ErrorCode::DecodeError, "not a directory: " + dir.string());

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && has_image_extension(entry.path())) files.push_back(entry.path());
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });

  if (files.size() < 2)
    throw Error(ErrorCode::TooFewFrames, "found " + std::to_string(files.size()) + " frames in " +
                                             dir.string());

  VideoSequence seq;
  seq.frames.reserve(files.size());
  for (std::size_t i = 0; i < files.size(); ++i) {
    Frame f = read_image(files[i]);
    f.timestamp = static_cast<int>(i);
    if (!seq.frames.empty() && f.size() != seq.frames.front().size())
      throw Error(ErrorCode::MixedDimensions, files[i].filename().string());
    seq.frames.push_back(std::move(f));
  }
  validate_sequence(seq);
  return seq;
}

void write_sequence(const VideoSequence& seq, const fs::path& dir, FrameFormat format) {
  validate_sequence(seq);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());

  const FrameSize size = seq.size();
  json manifest = {{"width", size.width},
                   {"height", size.height},
                   {"frames", seq.frame_count()},
                   {"format", to_string(format)}};

  if (format == FrameFormat::Raw) {
    const std::size_t plane = static_cast<std::size_t>(size.area());
    std::vector<std::uint8_t> buf(plane * 3);
    std::ofstream out(dir / "video.raw", std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + (dir / "video.raw").string());
    for (const Frame& f : seq.frames) {
      for (std::size_t i = 0; i < plane; ++i)
        for (int c = 0; c < 3; ++c) buf[c * plane + i] = f.data[i * 3 + c];
      out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    }
    if (!out) throw Error(ErrorCode::IoError, "write failed for video.raw");
    manifest["file"] = "video.raw";
  } else {
    char name[32];
    for (const Frame& f : seq.frames) {
      std::snprintf(name, sizeof(name), "frame_%06d.%s", f.timestamp, to_string(format));
      if (format == FrameFormat::Png)
        write_png(f, dir / name);
      else
        write_ppm(f, dir / name);
    }
  }
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

Frame read_png(const fs::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str()))
    throw Error(ErrorCode::DecodeError, path.string() + ": " + image.message);
  image.format = PNG_FORMAT_RGB;
  Frame frame(static_cast<int>(image.width), static_cast<int>(image.height));
  if (!png_image_finish_read(&image, nullptr, frame.data.data(), 0, nullptr)) {
    png_image_free(&image);
    throw Error(ErrorCode::DecodeError, path.string() + ": " + image.message);
  }
  return frame;
}

void write_png(const Frame& frame, const fs::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(frame.width);
  image.height = static_cast<png_uint_32>(frame.height);
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.c_str(), 0, frame.data.data(), 0, nullptr))
    throw Error(ErrorCode::IoError, path.string() + ": " + image.message);
}

Frame read_ppm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::DecodeError, "cannot open " + path.string());

  // Header tokens may be separated by whitespace and '#' comments.
  auto next_token = [&in]() {
    std::string tok;
    char c;
    while (in.get(c)) {
      if (c == '#') {
        in.ignore(std::numeric_limits<std::streamsize>::max(), '\n');
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        if (!tok.empty()) break;
      } else {
        tok.push_back(c);
      }
    }
    return tok;
  };

  int w = 0, h = 0, maxval = 0;
  try {
    if (next_token() != "P6") throw Error(ErrorCode::DecodeError, path.string() + ": not a P6 PPM");
    w = std::stoi(next_token());
    h = std::stoi(next_token());
    maxval = std::stoi(next_token());
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::DecodeError, path.string() + ": malformed PPM header");
  }
  if (w <= 0 || h <= 0 || maxval != 255)
    throw Error(ErrorCode::DecodeError, path.string() + ": unsupported PPM geometry or depth");

  Frame frame(w, h);
  if (!in.read(reinterpret_cast<char*>(frame.data.data()),
               static_cast<std::streamsize>(frame.data.size())))
    throw Error(ErrorCode::DecodeError, path.string() + ": truncated pixel data");
  return frame;
}

void write_ppm(const Frame& frame, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << "P6\n" << frame.width << ' ' << frame.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(frame.data.data()),
            static_cast<std::streamsize>(frame.data.size()));
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

void write_track_sidecar(const PatchTrack& track, const fs::path& path) {
  json arr = json::array();
  for (const SquarePatch& p : track.patches)
    arr.push_back({{"t", p.t}, {"x", p.x}, {"y", p.y}, {"d", p.d}});
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_text(path, arr.dump(1) + "\n");
}

PatchTrack read_track_sidecar(const fs::path& path, TrackKind kind) {
  const json arr = read_json(path);
  if (!arr.is_array()) throw Error(ErrorCode::DecodeError, path.string() + ": expected array");
  PatchTrack track;
  track.kind = kind;
  try {
    for (const json& rec : arr)
      track.patches.push_back({rec.at("x").get<double>(), rec.at("y").get<double>(),
                               rec.at("d").get<double>(), rec.at("t").get<int>()});
  } catch (const json::exception& e) {
    throw Error(ErrorCode::DecodeError, path.string() + ": " + e.what());
  }
  for (int i = 0; i < track.size(); ++i)
    if (track[i].t != i) throw Error(ErrorCode::DecodeError, "track timestamps must be 0..F-1");
  return track;
}

}  // namespace actcrop
