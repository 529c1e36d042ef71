// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0

#include "vad/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "vad/errors.hpp"
#include "vad/rng.hpp"

namespace vad {

AudioClip gen_air(double rt60_s, double length_s, uint64_t seed) {
  if (rt60_s < 0.1 || rt60_s > 1.0)
    throw InvalidRt60Error("rt60 must be in [0.1, 1.0] s");

  Rng rng(seed);
  const std::size_t len =
      std::max<std::size_t>(1, static_cast<std::size_t>(length_s * kSampleRate));
  const std::size_t offset = std::min<std::size_t>(rng.below(64), len - 1);

  AudioClip air;
  air.source_id = "air";
  air.samples.assign(len, 0.0);
  air.samples[offset] = 1.0;
  const double rate = 3.0 / (rt60_s * kSampleRate);  // 60 dB decay
  for (std::size_t t = offset + 1; t < len; ++t) {
    const double env =
        std::pow(10.0, -rate * static_cast<double>(t - offset));
    air.samples[t] = rng.uniform(-1.0, 1.0) * env;
  }
  // peak-normalize (the direct path is already the peak)
  double peak = 0.0;
  for (double s : air.samples) peak = std::max(peak, std::fabs(s));
  for (double& s : air.samples) s /= peak;
  return air;
}

namespace {

void render_voiced_segment(std::vector<double>& out, std::size_t start,
                           std::size_t len, Rng& rng) {
  const double f0 = rng.uniform(80.0, 300.0);
  const int n_harm = 3 + static_cast<int>(rng.below(8));  // 3..10
  const double syl_rate = rng.uniform(2.0, 8.0);
  const double syl_phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  std::vector<double> phase(n_harm), amp(n_harm);
  for (int h = 0; h < n_harm; ++h) {
    phase[h] = rng.uniform(0.0, 2.0 * std::numbers::pi);
    amp[h] = 1.0 / (h + 1);
  }
  const std::size_t ramp = kSampleRate / 100;  // 10 ms fade
  for (std::size_t i = 0; i < len && start + i < out.size(); ++i) {
    const double t = static_cast<double>(i) / kSampleRate;
    double s = 0.0;
    for (int h = 0; h < n_harm; ++h) {
      const double f = f0 * (h + 1);
      if (f >= kSampleRate / 2.0) break;
      s += amp[h] * std::sin(2.0 * std::numbers::pi * f * t + phase[h]);
    }
    // syllabic amplitude modulation, never fully closing
    const double am =
        0.6 + 0.4 * std::sin(2.0 * std::numbers::pi * syl_rate * t + syl_phase);
    double fade = 1.0;
    if (i < ramp) fade = static_cast<double>(i) / ramp;
    if (len - i <= ramp) fade = std::min(fade, static_cast<double>(len - i) / ramp);
    out[start + i] = s * am * fade;
  }
}

double active_fraction(const AudioClip& clip) {
  const Spectrogram spec = stft(clip);
  const FreqWeighting w = bandpass_weighting(150.0, 5000.0, 512);
  const std::vector<double> vad = compute_vad(spec, w);
  double acc = 0.0;
  for (double v : vad) acc += v;
  return acc / static_cast<double>(vad.size());
}

AudioClip gen_pseudo_speech_once(double duration_s, uint64_t seed) {
  Rng rng(seed);
  const std::size_t len = static_cast<std::size_t>(duration_s * kSampleRate);
  AudioClip clip;
  clip.source_id = "pseudo_speech";
  clip.samples.assign(len, 0.0);

  std::size_t pos = 0;
  bool voiced = rng.bernoulli(0.7);
  while (pos < len) {
    if (voiced) {
      const std::size_t seg =
          static_cast<std::size_t>(rng.uniform(0.5, 1.5) * kSampleRate);
      render_voiced_segment(clip.samples, pos, std::min(seg, len - pos), rng);
      pos += seg;
    } else {
      pos += static_cast<std::size_t>(rng.uniform(0.2, 1.5) * kSampleRate);
    }
    voiced = !voiced;
  }

  double peak = 0.0;
  for (double s : clip.samples) peak = std::max(peak, std::fabs(s));
  if (peak > 0.0) {
    const double g = 0.7 / peak;
    for (double& s : clip.samples) s *= g;
  }
  return clip;
}

}  // namespace

AudioClip gen_pseudo_speech(double duration_s, uint64_t seed) {
  // Retry with derived seeds until the self-measured activity lands
  // well inside the contract range [0.3, 0.8].
  uint64_t s = seed;
  for (int attempt = 0; attempt < 16; ++attempt) {
    AudioClip clip = gen_pseudo_speech_once(duration_s, s);
    if (duration_s * kSampleRate < 512) return clip;
    const double frac = active_fraction(clip);
    if (frac >= 0.35 && frac <= 0.75) return clip;
    splitmix64(s);
  }
  throw DataError("pseudo-speech generator failed to hit activity range");
}

AudioClip gen_pseudo_noise(double duration_s, uint64_t seed) {
  Rng rng(seed);
  const std::size_t len =
      std::max<std::size_t>(1, static_cast<std::size_t>(duration_s * kSampleRate));
  AudioClip clip;
  clip.source_id = "pseudo_noise";
  clip.samples.assign(len, 0.0);

  const double pole = rng.uniform(0.0, 0.9);  // spectral tilt
  const double am_rate = rng.uniform(0.1, 1.0);
  const double am_phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  double prev = 0.0;
  for (std::size_t t = 0; t < len; ++t) {
    prev = pole * prev + rng.uniform(-1.0, 1.0);
    const double am =
        1.0 + 0.3 * std::sin(2.0 * std::numbers::pi * am_rate * t / kSampleRate +
                             am_phase);
    clip.samples[t] = prev * am;
  }
  double rms = 0.0;
  for (double s : clip.samples) rms += s * s;
  rms = std::sqrt(rms / static_cast<double>(len));
  for (double& s : clip.samples) s *= 0.1 / rms;
  return clip;
}

namespace {

// Active-frame weighted energies of target and noise under the VAD
// bandpass weighting; the single SNR definition used everywhere.
void active_frame_energies(const AudioClip& target, const AudioClip& noise,
                           const LabelConfig& config, double* e_target,
                           double* e_noise) {
  if (target.samples.size() != noise.samples.size())
    throw FrameCountMismatchError("snr measurement: length mismatch");

  const FreqWeighting w = bandpass_weighting(
      config.vad_band_lo_hz, config.vad_band_hi_hz, config.stft.frame_len);
  const Spectrogram xs = stft(target, config.stft);
  const Spectrogram vs = stft(noise, config.stft);
  const std::vector<double> ex = band_energy(xs, w);
  const std::vector<double> ev = band_energy(vs, w);
  const std::vector<double> vad = compute_vad(xs, w, config.rel_threshold);

  double sx = 0.0, sv = 0.0;
  bool any = false;
  for (std::size_t n = 0; n < vad.size(); ++n) {
    if (vad[n] > 0.5) {
      sx += ex[n];
      sv += ev[n];
      any = true;
    }
  }
  if (!any || sx <= 0.0) throw NoActiveSpeechError("no speech-active frames");
  if (sv <= 0.0) throw SilentNoiseError("noise silent over active frames");
  *e_target = sx;
  *e_noise = sv;
}

}  // namespace

double measure_snr_db(const AudioClip& target, const AudioClip& noise,
                      const LabelConfig& config) {
  double ex, ev;
  active_frame_energies(target, noise, config, &ex, &ev);
  return 10.0 * std::log10(ex / ev);
}

MixResult mix_at_snr(const AudioClip& speech_rev, const AudioClip& noise,
                     double snr_db, const AudioClip* reference,
                     const LabelConfig& config) {
  const AudioClip& ref = reference ? *reference : speech_rev;
  double ex, ev;
  active_frame_energies(ref, noise, config, &ex, &ev);
  const double gain = std::sqrt(ex / (ev * std::pow(10.0, snr_db / 10.0)));

  MixResult result;
  result.gain = gain;
  result.scaled_noise = noise;
  for (double& s : result.scaled_noise.samples) s *= gain;
  result.mixture = speech_rev;
  result.mixture.source_id = "mixture";
  for (std::size_t i = 0; i < result.mixture.samples.size(); ++i)
    result.mixture.samples[i] += result.scaled_noise.samples[i];
  return result;
}

double rms_dbfs(const AudioClip& clip) {
  double acc = 0.0;
  for (double s : clip.samples) acc += s * s;
  const double rms = std::sqrt(acc / static_cast<double>(clip.samples.size()));
  return 20.0 * std::log10(std::max(rms, 1e-12));
}

AudioClip level_augment(const AudioClip& clip, double target_dbfs) {
  double acc = 0.0, peak = 0.0;
  for (double s : clip.samples) {
    acc += s * s;
    peak = std::max(peak, std::fabs(s));
  }
  const double rms = std::sqrt(acc / static_cast<double>(clip.samples.size()));
  if (rms == 0.0) throw SilentClipError("cannot level an all-zero clip");

  double gain = std::pow(10.0, target_dbfs / 20.0) / rms;
  if (peak * gain > 1.0) gain = 0.99 / peak;

  AudioClip out = clip;
  for (double& s : out.samples) s *= gain;
  return out;
}

TrainingExample make_example(uint64_t split_seed, uint64_t index,
                             const SynthConfig& config) {
  Rng rng = Rng::stream(split_seed, index);

  MixSpec spec;
  spec.seed = rng.next_u64();
  spec.snr_db = rng.normal(config.snr_mean_db, config.snr_std_db);
  spec.level_dbfs =
      std::min(rng.normal(config.level_mean_dbfs, config.level_std_dbfs), 0.0);
  spec.reverb = rng.bernoulli(config.reverb_prob);
  spec.air_rt60_s = rng.uniform(config.rt60_lo_s, config.rt60_hi_s);

  uint64_t s = spec.seed;
  const uint64_t speech_seed = splitmix64(s);
  const uint64_t noise_seed = splitmix64(s);
  const uint64_t air_seed = splitmix64(s);

  const AudioClip speech = gen_pseudo_speech(config.clip_len_s, speech_seed);
  AudioClip noise = gen_pseudo_noise(config.clip_len_s, noise_seed);

  // random circular time shift on the noise
  const std::size_t shift = rng.below(noise.samples.size());
  std::rotate(noise.samples.begin(), noise.samples.begin() + shift,
              noise.samples.end());

  AudioClip target;      // x(t), windowed-AIR speech; always the label basis
  AudioClip speech_rev;  // what actually enters the mixture
  if (spec.reverb) {
    const AudioClip air = gen_air(spec.air_rt60_s, spec.air_rt60_s, air_seed);
    AirWindowSpec win;
    win.direct_path_index = find_direct_path(air);
    const AudioClip h_win = window_air(air, win);
    target = convolve_truncated(speech, h_win);
    speech_rev = convolve_truncated(speech, air);
  } else {
    target = speech;
    speech_rev = speech;
  }

  const MixResult mixed =
      mix_at_snr(speech_rev, noise, spec.snr_db, &target, config.label);

  TrainingExample example;
  example.spec = spec;
  example.mixture = level_augment(mixed.mixture, spec.level_dbfs);
  example.labels =
      make_labels_from_components(target, mixed.scaled_noise, config.label);
  return example;
}

std::vector<TrainingExample> build_dataset(int n_examples, uint64_t split_seed,
                                           const SynthConfig& config) {
  if (n_examples < 1) throw ConfigError("n_examples must be >= 1");
  std::vector<TrainingExample> out;
  out.reserve(n_examples);
  for (int i = 0; i < n_examples; ++i)
    out.push_back(make_example(split_seed, static_cast<uint64_t>(i), config));
  return out;
}

void write_manifest(const std::vector<ManifestRow>& rows,
                    const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw IoError("cannot open " + tmp);
    out << "index,seed,snr_db,level_dbfs,reverb,rt60,mix_path,label_path\n";
    out.precision(9);
    for (const ManifestRow& r : rows) {
      out << r.index << ',' << r.seed << ',' << r.snr_db << ',' << r.level_dbfs
          << ',' << (r.reverb ? 1 : 0) << ',' << r.rt60 << ',' << r.mix_path
          << ',' << r.label_path << '\n';
    }
    if (!out) throw IoError("short write to " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw IoError("rename " + tmp + " -> " + path);
}

std::vector<ManifestRow> read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileNotFoundError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("index,", 0) != 0)
    throw DataError(path + ": bad manifest header");

  std::vector<ManifestRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string f[8];
    for (int i = 0; i < 8; ++i) {
      if (!std::getline(ss, f[i], ',')) throw DataError(path + ": short row");
    }
    ManifestRow r;
    r.index = std::stoull(f[0]);
    r.seed = std::stoull(f[1]);
    r.snr_db = std::stod(f[2]);
    r.level_dbfs = std::stod(f[3]);
    r.reverb = f[4] == "1";
    r.rt60 = std::stod(f[5]);
    r.mix_path = f[6];
    r.label_path = f[7];
    rows.push_back(r);
  }
  return rows;
}

}  // namespace vad
