// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0

#include "vad/labels.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "vad/errors.hpp"

namespace vad {

std::size_t find_direct_path(const AudioClip& air) {
  if (air.samples.empty()) throw AllZeroAirError("empty impulse response");
  std::size_t best = 0;
  double best_abs = 0.0;
  for (std::size_t i = 0; i < air.samples.size(); ++i) {
    const double a = std::fabs(air.samples[i]);
    if (a > best_abs) {
      best_abs = a;
      best = i;
    }
  }
  if (best_abs == 0.0) throw AllZeroAirError("all-zero impulse response");
  return best;
}

AudioClip window_air(const AudioClip& air, const AirWindowSpec& spec) {
  if (spec.direct_path_index >= air.samples.size())
    throw IndexOutOfRangeError("direct path index beyond impulse response");

  AudioClip out = air;
  const double rate =
      spec.decay_db / 20.0 / (spec.decay_time_s * air.sample_rate);
  for (std::size_t t = spec.direct_path_index + 1; t < out.samples.size();
       ++t) {
    const double gain =
        std::pow(10.0, -rate * static_cast<double>(t - spec.direct_path_index));
    out.samples[t] *= gain;
  }
  return out;
}

std::vector<double> compute_vad(const Spectrogram& target_spec,
                                const FreqWeighting& w_vad,
                                double rel_threshold) {
  if (target_spec.num_frames == 0)
    throw EmptySpectrogramError("empty spectrogram");

  const std::vector<double> energy = band_energy(target_spec, w_vad);
  // per-frame total across bands (w_vad is typically a single mask row)
  std::vector<double> frame_energy(target_spec.num_frames, 0.0);
  for (int n = 0; n < target_spec.num_frames; ++n)
    for (int b = 0; b < w_vad.num_bands; ++b)
      frame_energy[n] += energy[static_cast<std::size_t>(n) * w_vad.num_bands + b];

  const double peak = *std::max_element(frame_energy.begin(), frame_energy.end());
  const double threshold = rel_threshold * peak;
  std::vector<double> vad(target_spec.num_frames, 0.0);
  for (int n = 0; n < target_spec.num_frames; ++n)
    vad[n] = frame_energy[n] > threshold ? 1.0 : 0.0;
  return vad;
}

namespace {

std::vector<double> vnr_db_raw(const Spectrogram& target_spec,
                               const Spectrogram& noise_spec,
                               const FreqWeighting& w_vnr) {
  if (target_spec.num_frames != noise_spec.num_frames)
    throw FrameCountMismatchError("target/noise frame counts differ");

  const std::vector<double> ex = band_energy(target_spec, w_vnr);
  const std::vector<double> ev = band_energy(noise_spec, w_vnr);
  const int bands = w_vnr.num_bands;

  std::vector<double> out(target_spec.num_frames);
  for (int n = 0; n < target_spec.num_frames; ++n) {
    double num = 0.0, den = 0.0;
    for (int b = 0; b < bands; ++b) {
      num += ex[static_cast<std::size_t>(n) * bands + b];
      den += ev[static_cast<std::size_t>(n) * bands + b];
    }
    num = std::max(num, kVnrEnergyFloor);
    den = std::max(den, kVnrEnergyFloor);
    out[n] = 10.0 * std::log10(num / den);
  }
  return out;
}

}  // namespace

std::vector<double> compute_vnr(const Spectrogram& target_spec,
                                const Spectrogram& noise_spec,
                                const FreqWeighting& w_vnr) {
  std::vector<double> out = vnr_db_raw(target_spec, noise_spec, w_vnr);
  for (double& v : out) v = std::clamp(v, kVnrMinDb, kVnrMaxDb);
  return out;
}

std::vector<double> map_vnr_unit(const std::vector<double>& vnr_db) {
  std::vector<double> out(vnr_db.size());
  for (std::size_t i = 0; i < vnr_db.size(); ++i) {
    if (vnr_db[i] < kVnrMinDb - 1e-9 || vnr_db[i] > kVnrMaxDb + 1e-9)
      throw OutOfRangeError("vnr value outside [-15,40] dB");
    out[i] = vnr_db_to_unit(vnr_db[i]);
  }
  return out;
}

std::vector<double> smooth_track(const std::vector<double>& seq,
                                 double window_s, double hop_s) {
  if (seq.empty()) return {};
  int win = static_cast<int>(std::lround(window_s / hop_s));
  if (win % 2 == 0) win += 1;  // nearest odd count
  if (win < 1) win = 1;
  const int half = win / 2;
  const int n = static_cast<int>(seq.size());

  std::vector<double> out(seq.size());
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - half);
    const int hi = std::min(n - 1, i + half);
    double acc = 0.0;
    for (int j = lo; j <= hi; ++j) acc += seq[j];
    out[i] = acc / (hi - lo + 1);
  }
  return out;
}

AudioClip convolve_truncated(const AudioClip& signal, const AudioClip& air) {
  const std::size_t n = signal.samples.size();
  const std::size_t m = air.samples.size();
  AudioClip out;
  out.sample_rate = signal.sample_rate;
  out.source_id = signal.source_id;
  out.samples.assign(n, 0.0);

  if (n == 0 || m == 0) return out;

  if (n * m <= 4u * 1000u * 1000u) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t kmax = std::min(m - 1, i);
      double acc = 0.0;
      for (std::size_t k = 0; k <= kmax; ++k)
        acc += air.samples[k] * signal.samples[i - k];
      out.samples[i] = acc;
    }
    return out;
  }

  // FFT convolution for long impulse responses
  std::size_t size = 1;
  while (size < n + m - 1) size <<= 1;
  std::vector<std::complex<double>> a(size), b(size);
  for (std::size_t i = 0; i < n; ++i) a[i] = signal.samples[i];
  for (std::size_t i = 0; i < m; ++i) b[i] = air.samples[i];
  fft(a);
  fft(b);
  for (std::size_t i = 0; i < size; ++i) a[i] *= b[i];
  fft(a, /*inverse=*/true);
  for (std::size_t i = 0; i < n; ++i) out.samples[i] = a[i].real();
  return out;
}

LabelTrack make_labels_from_components(const AudioClip& target,
                                       const AudioClip& noise,
                                       const LabelConfig& config) {
  if (target.samples.size() != noise.samples.size())
    throw FrameCountMismatchError("target/noise length mismatch");

  const Spectrogram xs = stft(target, config.stft);
  const Spectrogram vs = stft(noise, config.stft);
  const FreqWeighting w_vad = bandpass_weighting(
      config.vad_band_lo_hz, config.vad_band_hi_hz, config.stft.frame_len);
  const FreqWeighting w_vnr =
      mel_filterbank(config.vnr_mel_bands, 0.0, kSampleRate / 2.0, kSampleRate,
                     config.stft.frame_len);

  const double hop_s =
      static_cast<double>(config.stft.hop) / target.sample_rate;

  LabelTrack labels;
  labels.frame_hop_s = hop_s;
  labels.vad = smooth_track(compute_vad(xs, w_vad, config.rel_threshold),
                            config.smooth_window_s, hop_s);
  std::vector<double> db =
      smooth_track(compute_vnr(xs, vs, w_vnr), config.smooth_window_s, hop_s);
  for (double& v : db) v = std::clamp(v, kVnrMinDb, kVnrMaxDb);
  labels.vnr_db = db;
  labels.vnr_unit = map_vnr_unit(db);
  return labels;
}

LabelTrack make_labels(const AudioClip& speech, const AudioClip& air,
                       const AudioClip& noise, const LabelConfig& config) {
  AirWindowSpec win;
  win.direct_path_index = find_direct_path(air);
  const AudioClip h_win = window_air(air, win);
  const AudioClip target = convolve_truncated(speech, h_win);
  return make_labels_from_components(target, noise, config);
}

void write_label_csv(const LabelTrack& labels, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw IoError("cannot open " + tmp);
    out << "frame,vad,vnr_db,vnr_unit\n";
    out.precision(9);
    for (int n = 0; n < labels.num_frames(); ++n) {
      out << n << ',' << labels.vad[n] << ',' << labels.vnr_db[n] << ','
          << labels.vnr_unit[n] << '\n';
    }
    if (!out) throw IoError("short write to " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw IoError("rename " + tmp + " -> " + path);
}

LabelTrack read_label_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileNotFoundError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("frame,", 0) != 0)
    throw DataError(path + ": bad label CSV header");

  LabelTrack labels;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    double vals[4];
    for (int i = 0; i < 4; ++i) {
      if (!std::getline(ss, field, ',')) throw DataError(path + ": short row");
      vals[i] = std::stod(field);
    }
    labels.vad.push_back(vals[1]);
    labels.vnr_db.push_back(vals[2]);
    labels.vnr_unit.push_back(vals[3]);
  }
  return labels;
}

}  // namespace vad
