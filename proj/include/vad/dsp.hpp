// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0

#ifndef VAD_DSP_HPP
#define VAD_DSP_HPP

#include <complex>
#include <vector>

#include "vad/audio_io.hpp"

namespace vad {

struct StftConfig {
  int frame_len = 512;  // 32 ms at 16 kHz
  int hop = 256;        // 16 ms
};

constexpr int kNumBins = 257;  // 512/2 + 1

// One-sided complex STFT, frames stored row-major (T x K).
struct Spectrogram {
  std::vector<std::complex<double>> data;
  int num_frames = 0;
  int num_bins = 0;
  StftConfig config;

  std::complex<double>& at(int t, int k) { return data[t * num_bins + k]; }
  const std::complex<double>& at(int t, int k) const {
    return data[t * num_bins + k];
  }
};

enum class WeightingKind { kBandpassMask, kMel };

// B x K non-negative weighting matrix applied to spectral magnitudes.
struct FreqWeighting {
  std::vector<double> matrix;  // row-major B x K
  int num_bands = 0;
  int num_bins = 0;
  WeightingKind kind = WeightingKind::kBandpassMask;

  double at(int b, int k) const { return matrix[b * num_bins + k]; }
};

struct MelFeatures {
  std::vector<double> data;  // row-major T x n_bands
  int num_frames = 0;
  int num_bands = 0;

  double at(int t, int b) const { return data[t * num_bands + b]; }
};

// In-place radix-2 FFT; size must be a power of two.
void fft(std::vector<std::complex<double>>& x, bool inverse = false);

int stft_frame_count(std::size_t num_samples, const StftConfig& config);

// Hann-windowed one-sided STFT; frame n covers samples
// [n*hop, n*hop + frame_len).
Spectrogram stft(const AudioClip& clip, const StftConfig& config = {});

// HTK-mel triangular filterbank with unit-peak filters.
FreqWeighting mel_filterbank(int n_mels, double fmin, double fmax, int sr,
                             int n_fft);

// 1 x K binary mask selecting bins whose center frequency lies in
// [flo, fhi].
FreqWeighting bandpass_weighting(double flo, double fhi, int n_fft,
                                 int sr = kSampleRate);

// Entry (n,b) = sum_k (w[b,k] * |X[n,k]|)^2, row-major T x B.
std::vector<double> band_energy(const Spectrogram& spec,
                                const FreqWeighting& w);

// log10 of 64-band mel energies, floored at 1e-10.
MelFeatures log_mel_features(const Spectrogram& spec, const FreqWeighting& fb);

constexpr double kLogMelFloor = 1e-10;

}  // namespace vad

#endif  // VAD_DSP_HPP
