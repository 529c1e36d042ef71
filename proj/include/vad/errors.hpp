// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0

#ifndef VAD_ERRORS_HPP
#define VAD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace vad {

// Exit-code categories used by the CLI: 2 invalid config, 3 I/O,
// 4 data-contract violation.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& m) : std::runtime_error(m) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& m) : std::runtime_error(m) {}
};

struct DataError : std::runtime_error {
  explicit DataError(const std::string& m) : std::runtime_error(m) {}
};

// audio-io
struct FileNotFoundError : IoError {
  explicit FileNotFoundError(const std::string& m) : IoError(m) {}
};
struct UnsupportedFormatError : DataError {
  explicit UnsupportedFormatError(const std::string& m) : DataError(m) {}
};
struct SampleRateMismatchError : DataError {
  explicit SampleRateMismatchError(const std::string& m) : DataError(m) {}
};
struct EmptyAudioError : DataError {
  explicit EmptyAudioError(const std::string& m) : DataError(m) {}
};

// dsp / labels
struct TooShortError : DataError {
  explicit TooShortError(const std::string& m) : DataError(m) {}
};
struct InvalidRangeError : ConfigError {
  explicit InvalidRangeError(const std::string& m) : ConfigError(m) {}
};
struct DimensionMismatchError : DataError {
  explicit DimensionMismatchError(const std::string& m) : DataError(m) {}
};
struct AllZeroAirError : DataError {
  explicit AllZeroAirError(const std::string& m) : DataError(m) {}
};
struct IndexOutOfRangeError : DataError {
  explicit IndexOutOfRangeError(const std::string& m) : DataError(m) {}
};
struct EmptySpectrogramError : DataError {
  explicit EmptySpectrogramError(const std::string& m) : DataError(m) {}
};
struct FrameCountMismatchError : DataError {
  explicit FrameCountMismatchError(const std::string& m) : DataError(m) {}
};
struct OutOfRangeError : DataError {
  explicit OutOfRangeError(const std::string& m) : DataError(m) {}
};

// synth
struct InvalidRt60Error : ConfigError {
  explicit InvalidRt60Error(const std::string& m) : ConfigError(m) {}
};
struct NoActiveSpeechError : DataError {
  explicit NoActiveSpeechError(const std::string& m) : DataError(m) {}
};
struct SilentNoiseError : DataError {
  explicit SilentNoiseError(const std::string& m) : DataError(m) {}
};
struct SilentClipError : DataError {
  explicit SilentClipError(const std::string& m) : DataError(m) {}
};

// nn / train
struct ShapeMismatchError : DataError {
  explicit ShapeMismatchError(const std::string& m) : DataError(m) {}
};
struct BadMagicError : DataError {
  explicit BadMagicError(const std::string& m) : DataError(m) {}
};
struct VersionMismatchError : DataError {
  explicit VersionMismatchError(const std::string& m) : DataError(m) {}
};
struct ChecksumMismatchError : DataError {
  explicit ChecksumMismatchError(const std::string& m) : DataError(m) {}
};
struct LengthMismatchError : DataError {
  explicit LengthMismatchError(const std::string& m) : DataError(m) {}
};
struct WrongOutputArityError : ConfigError {
  explicit WrongOutputArityError(const std::string& m) : ConfigError(m) {}
};
struct NonFiniteLossError : DataError {
  explicit NonFiniteLossError(const std::string& m) : DataError(m) {}
};

// eval
struct SingleClassError : DataError {
  explicit SingleClassError(const std::string& m) : DataError(m) {}
};

}  // namespace vad

#endif  // VAD_ERRORS_HPP
