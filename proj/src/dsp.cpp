// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0

#include "vad/dsp.hpp"

#include <cmath>
#include <numbers>

#include "vad/errors.hpp"

namespace vad {

void fft(std::vector<std::complex<double>>& x, bool inverse) {
  const std::size_t n = x.size();
  if (n == 0 || (n & (n - 1)) != 0)
    throw DimensionMismatchError("fft size must be a power of two");

  // bit-reversal permutation
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang =
        2.0 * std::numbers::pi / static_cast<double>(len) * (inverse ? 1 : -1);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = x[i + k];
        std::complex<double> v = x[i + k + len / 2] * w;
        x[i + k] = u + v;
        x[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse) {
    for (auto& v : x) v /= static_cast<double>(n);
  }
}

int stft_frame_count(std::size_t num_samples, const StftConfig& config) {
  if (num_samples < static_cast<std::size_t>(config.frame_len)) return 0;
  return static_cast<int>((num_samples - config.frame_len) / config.hop) + 1;
}

Spectrogram stft(const AudioClip& clip, const StftConfig& config) {
  if (clip.samples.size() < static_cast<std::size_t>(config.frame_len))
    throw TooShortError("clip shorter than one frame");

  const int frame_len = config.frame_len;
  const int num_bins = frame_len / 2 + 1;
  const int num_frames = stft_frame_count(clip.samples.size(), config);

  // periodic Hann
  std::vector<double> window(frame_len);
  for (int i = 0; i < frame_len; ++i) {
    window[i] =
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / frame_len);
  }

  Spectrogram spec;
  spec.config = config;
  spec.num_frames = num_frames;
  spec.num_bins = num_bins;
  spec.data.resize(static_cast<std::size_t>(num_frames) * num_bins);

  std::vector<std::complex<double>> buf(frame_len);
  for (int n = 0; n < num_frames; ++n) {
    const std::size_t start = static_cast<std::size_t>(n) * config.hop;
    for (int i = 0; i < frame_len; ++i)
      buf[i] = {clip.samples[start + i] * window[i], 0.0};
    fft(buf);
    for (int k = 0; k < num_bins; ++k) spec.at(n, k) = buf[k];
  }
  return spec;
}

namespace {

double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
double mel_to_hz(double m) {
  return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0);
}

}  // namespace

FreqWeighting mel_filterbank(int n_mels, double fmin, double fmax, int sr,
                             int n_fft) {
  if (!(fmin >= 0.0 && fmin < fmax && fmax <= sr / 2.0) || n_mels < 1)
    throw InvalidRangeError("mel_filterbank: invalid frequency range");

  const int num_bins = n_fft / 2 + 1;
  FreqWeighting fb;
  fb.kind = WeightingKind::kMel;
  fb.num_bands = n_mels;
  fb.num_bins = num_bins;
  fb.matrix.assign(static_cast<std::size_t>(n_mels) * num_bins, 0.0);

  const double mel_lo = hz_to_mel(fmin);
  const double mel_hi = hz_to_mel(fmax);
  std::vector<double> edges(n_mels + 2);
  for (int i = 0; i < n_mels + 2; ++i)
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (n_mels + 1));

  const double bin_hz = static_cast<double>(sr) / n_fft;
  for (int b = 0; b < n_mels; ++b) {
    const double lo = edges[b], center = edges[b + 1], hi = edges[b + 2];
    for (int k = 0; k < num_bins; ++k) {
      const double f = k * bin_hz;
      double w = 0.0;
      if (f > lo && f < center) {
        w = (f - lo) / (center - lo);
      } else if (f >= center && f < hi) {
        w = (hi - f) / (hi - center);
      }
      fb.matrix[static_cast<std::size_t>(b) * num_bins + k] = w;
    }
    // unit peak: renormalize so the best-aligned bin hits exactly 1
    double peak = 0.0;
    for (int k = 0; k < num_bins; ++k)
      peak = std::max(peak, fb.matrix[static_cast<std::size_t>(b) * num_bins + k]);
    if (peak > 0.0) {
      for (int k = 0; k < num_bins; ++k)
        fb.matrix[static_cast<std::size_t>(b) * num_bins + k] /= peak;
    }
  }
  return fb;
}

FreqWeighting bandpass_weighting(double flo, double fhi, int n_fft, int sr) {
  if (!(flo >= 0.0 && flo < fhi && fhi <= sr / 2.0))
    throw InvalidRangeError("bandpass_weighting: invalid band edges");

  const int num_bins = n_fft / 2 + 1;
  FreqWeighting w;
  w.kind = WeightingKind::kBandpassMask;
  w.num_bands = 1;
  w.num_bins = num_bins;
  w.matrix.assign(num_bins, 0.0);
  const double bin_hz = static_cast<double>(sr) / n_fft;
  for (int k = 0; k < num_bins; ++k) {
    const double f = k * bin_hz;
    if (f >= flo && f <= fhi) w.matrix[k] = 1.0;
  }
  return w;
}

std::vector<double> band_energy(const Spectrogram& spec,
                                const FreqWeighting& w) {
  if (spec.num_bins != w.num_bins)
    throw DimensionMismatchError("band_energy: bin count mismatch");

  std::vector<double> out(static_cast<std::size_t>(spec.num_frames) *
                          w.num_bands);
  for (int n = 0; n < spec.num_frames; ++n) {
    for (int b = 0; b < w.num_bands; ++b) {
      double acc = 0.0;
      for (int k = 0; k < spec.num_bins; ++k) {
        const double m = w.at(b, k) * std::abs(spec.at(n, k));
        acc += m * m;
      }
      out[static_cast<std::size_t>(n) * w.num_bands + b] = acc;
    }
  }
  return out;
}

MelFeatures log_mel_features(const Spectrogram& spec,
                             const FreqWeighting& fb) {
  if (fb.num_bands != 64)
    throw DimensionMismatchError("log_mel_features: expected 64 mel bands");
  const std::vector<double> energies = band_energy(spec, fb);

  MelFeatures feats;
  feats.num_frames = spec.num_frames;
  feats.num_bands = fb.num_bands;
  feats.data.resize(energies.size());
  for (std::size_t i = 0; i < energies.size(); ++i)
    feats.data[i] = std::log10(std::max(energies[i], kLogMelFloor));
  return feats;
}

}  // namespace vad
