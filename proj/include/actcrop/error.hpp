#pragma once

#include <stdexcept>
#include <string>

namespace actcrop {

enum class ErrorCode {
  MixedDimensions,
  TooFewFrames,
  DecodeError,
  IoError,
  DimensionMismatch,
  SingleClusterError,
  AllMasksEmpty,
  NoInteriorC3,
  EmptyTrack,
  PatchOutOfBounds,
  SubjectEscapesFrame,
  LengthMismatch,
  InvalidArgument,
};

const char* to_string(ErrorCode code);

// Every library failure is reported as an Error carrying its code, so callers
// (the CLI in particular) can map failures onto exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), message_(what) {}

  ErrorCode code() const noexcept { return code_; }
  // The text without the code prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MixedDimensions: return "MixedDimensions";
    case ErrorCode::TooFewFrames: return "TooFewFrames";
    case ErrorCode::DecodeError: return "DecodeError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SingleClusterError: return "SingleClusterError";
    case ErrorCode::AllMasksEmpty: return "AllMasksEmpty";
    case ErrorCode::NoInteriorC3: return "NoInteriorC3";
    case ErrorCode::EmptyTrack: return "EmptyTrack";
    case ErrorCode::PatchOutOfBounds: return "PatchOutOfBounds";
    case ErrorCode::SubjectEscapesFrame: return "SubjectEscapesFrame";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace actcrop
