// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0

#ifndef VAD_AUDIO_IO_HPP
#define VAD_AUDIO_IO_HPP

#include <string>
#include <vector>

namespace vad {

constexpr int kSampleRate = 16000;

// Mono 16 kHz clip; samples in [-1, 1]. Immutable after creation by
// convention: all pipeline stages take clips by const reference.
struct AudioClip {
  std::vector<double> samples;
  int sample_rate = kSampleRate;
  std::string source_id;

  std::size_t size() const { return samples.size(); }
  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

// Reads a RIFF/WAVE file. Accepts mono 16 kHz PCM16 (format code 1)
// or float32 (format code 3) only; no resampling, no downmixing.
AudioClip read_wav(const std::string& path);

// Writes 16-bit PCM; samples outside [-1, 1] are clamped.
void write_wav(const AudioClip& clip, const std::string& path);

}  // namespace vad

#endif  // VAD_AUDIO_IO_HPP
