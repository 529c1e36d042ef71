// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0

#ifndef VAD_SYNTH_HPP
#define VAD_SYNTH_HPP

#include <optional>
#include <string>
#include <vector>

#include "vad/audio_io.hpp"
#include "vad/labels.hpp"

namespace vad {

// Per-example mixing recipe; fully determined by the seed.
struct MixSpec {
  double snr_db = 5.0;      // drawn from N(5, 10)
  double level_dbfs = -28;  // drawn from N(-28, 10), clamped to <= 0
  bool reverb = true;       // true with probability 0.8
  double air_rt60_s = 0.3;
  uint64_t seed = 0;
};

struct TrainingExample {
  AudioClip mixture;
  LabelTrack labels;
  MixSpec spec;
};

struct SynthConfig {
  double clip_len_s = 10.0;
  double snr_mean_db = 5.0;
  double snr_std_db = 10.0;
  double level_mean_dbfs = -28.0;
  double level_std_dbfs = 10.0;
  double reverb_prob = 0.8;
  double rt60_lo_s = 0.2;
  double rt60_hi_s = 1.0;
  LabelConfig label;
};

// Synthetic room impulse response: unit impulse at a small random
// offset followed by exponentially decaying noise (60 dB over rt60),
// peak-normalized.
AudioClip gen_air(double rt60_s, double length_s, uint64_t seed);

// Desk-scale speech stand-in: amplitude-modulated harmonic complexes
// alternating with silent pauses.
AudioClip gen_pseudo_speech(double duration_s, uint64_t seed);

// Colored stationary-ish noise source (tilted spectrum white noise
// with slow level modulation).
AudioClip gen_pseudo_noise(double duration_s, uint64_t seed);

struct MixResult {
  AudioClip mixture;
  AudioClip scaled_noise;
  double gain = 1.0;
};

// Scales noise so the active-frame SNR (speech-active frames of the
// reference target, bandpass-weighted energies) equals snr_db, then
// sums. `reference` defaults to speech_rev and is the windowed-AIR
// target x(t) in the dataset pipeline.
MixResult mix_at_snr(const AudioClip& speech_rev, const AudioClip& noise,
                     double snr_db,
                     const AudioClip* reference = nullptr,
                     const LabelConfig& config = {});

// Measures the same active-frame SNR definition on a pair of
// components; used by tests and synthesis statistics.
double measure_snr_db(const AudioClip& target, const AudioClip& noise,
                      const LabelConfig& config = {});

// Scales to the requested RMS level (dBFS re 1.0 RMS); falls back to
// peak 0.99 if the gain would clip.
AudioClip level_augment(const AudioClip& clip, double target_dbfs);

double rms_dbfs(const AudioClip& clip);

// Deterministically generates example `index` of the dataset keyed by
// split_seed.
TrainingExample make_example(uint64_t split_seed, uint64_t index,
                             const SynthConfig& config = {});

std::vector<TrainingExample> build_dataset(int n_examples, uint64_t split_seed,
                                           const SynthConfig& config = {});

struct ManifestRow {
  uint64_t index = 0;
  uint64_t seed = 0;
  double snr_db = 0.0;
  double level_dbfs = 0.0;
  bool reverb = false;
  double rt60 = 0.0;
  std::string mix_path;
  std::string label_path;
};

void write_manifest(const std::vector<ManifestRow>& rows,
                    const std::string& path);
std::vector<ManifestRow> read_manifest(const std::string& path);

}  // namespace vad

#endif  // VAD_SYNTH_HPP
