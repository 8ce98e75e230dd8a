#pragma once

#include <filesystem>
#include <optional>
#include <string_view>

#include "actcrop/image.hpp"
#include "actcrop/track.hpp"

namespace actcrop {

enum class FrameFormat { Png, Ppm, Raw };

FrameFormat parse_frame_format(std::string_view name);
const char* to_string(FrameFormat format);

// Reads a frame sequence from `dir`. When `manifest` is given (or the
// directory holds `video.raw` next to `manifest.json`) the raw-planar layout is
// used: per frame an R plane, then G, then B, each row-major. Otherwise every
// .png/.ppm file in the directory is read in lexicographic filename order.
VideoSequence read_sequence(const std::filesystem::path& dir,
                            const std::optional<std::filesystem::path>& manifest = std::nullopt);

// Writes `frame_%06d.<ext>` files (or `video.raw`) plus `manifest.json`.
// The directory is created if absent.
void write_sequence(const VideoSequence& seq, const std::filesystem::path& dir,
                    FrameFormat format);

Frame read_png(const std::filesystem::path& path);
void write_png(const Frame& frame, const std::filesystem::path& path);
Frame read_ppm(const std::filesystem::path& path);
void write_ppm(const Frame& frame, const std::filesystem::path& path);

// Track sidecar: JSON array of {"t","x","y","d"} records.
void write_track_sidecar(const PatchTrack& track, const std::filesystem::path& path);
PatchTrack read_track_sidecar(const std::filesystem::path& path,
                              TrackKind kind = TrackKind::Raw);

}  // namespace actcrop
