// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0

#ifndef VAD_LABELS_HPP
#define VAD_LABELS_HPP

#include <string>
#include <vector>

#include "vad/audio_io.hpp"
#include "vad/dsp.hpp"

namespace vad {

constexpr double kVnrMinDb = -15.0;
constexpr double kVnrMaxDb = 40.0;
constexpr double kVnrEnergyFloor = 1e-12;
constexpr double kVadRelThreshold = 0.01;
constexpr double kSmoothWindowS = 0.2;

inline double vnr_db_to_unit(double db) { return (db + 15.0) / 55.0; }
inline double vnr_unit_to_db(double u) { return 55.0 * u - 15.0; }

// Per-frame training targets: soft VAD in [0,1], VNR in dB and
// unit-mapped form.
struct LabelTrack {
  std::vector<double> vad;
  std::vector<double> vnr_db;
  std::vector<double> vnr_unit;
  double frame_hop_s = 0.016;

  int num_frames() const { return static_cast<int>(vad.size()); }
};

// Exponential window on the impulse response tail: unity through the
// direct path, then a 60 dB / 0.3 s decay.
struct AirWindowSpec {
  double decay_db = 60.0;
  double decay_time_s = 0.3;
  std::size_t direct_path_index = 0;
};

std::size_t find_direct_path(const AudioClip& air);

AudioClip window_air(const AudioClip& air, const AirWindowSpec& spec);

// Binary VAD per frame: 1 iff bandpassed frame energy exceeds
// rel_threshold * max frame energy (strict; equality maps to 0).
std::vector<double> compute_vad(const Spectrogram& target_spec,
                                const FreqWeighting& w_vad,
                                double rel_threshold = kVadRelThreshold);

// Mel-weighted segmental voice-to-noise ratio in dB, clipped to
// [-15, 40]; numerator and denominator floored before the ratio.
std::vector<double> compute_vnr(const Spectrogram& target_spec,
                                const Spectrogram& noise_spec,
                                const FreqWeighting& w_vnr);

std::vector<double> map_vnr_unit(const std::vector<double>& vnr_db);

// Centered moving average with truncated (shrinking) windows at the
// edges; window length rounded to the nearest odd frame count.
std::vector<double> smooth_track(const std::vector<double>& seq,
                                 double window_s, double hop_s);

struct LabelConfig {
  StftConfig stft;
  double vad_band_lo_hz = 150.0;
  double vad_band_hi_hz = 5000.0;
  double rel_threshold = kVadRelThreshold;
  int vnr_mel_bands = 32;
  double smooth_window_s = kSmoothWindowS;
};

// Full label pipeline: x = window_air(air) * speech (convolution,
// truncated to the speech length), Eq-style VAD and VNR targets,
// both smoothed.
LabelTrack make_labels(const AudioClip& speech, const AudioClip& air,
                       const AudioClip& noise, const LabelConfig& config = {});

// Variant for callers that already hold the aligned target speech
// x(t) and scaled noise.
LabelTrack make_labels_from_components(const AudioClip& target,
                                       const AudioClip& noise,
                                       const LabelConfig& config = {});

// Full (linear) convolution truncated to the length of `signal`.
AudioClip convolve_truncated(const AudioClip& signal, const AudioClip& air);

// CSV with header frame,vad,vnr_db,vnr_unit.
void write_label_csv(const LabelTrack& labels, const std::string& path);
LabelTrack read_label_csv(const std::string& path);

}  // namespace vad

#endif  // VAD_LABELS_HPP
