#include <cmath>
#include <complex>
#include <numbers>

#include "doctest.h"
#include "vad/dsp.hpp"
#include "vad/errors.hpp"
#include "vad/rng.hpp"

using namespace vad;

namespace {

AudioClip make_clip(std::vector<double> samples) {
  AudioClip c;
  c.samples = std::move(samples);
  return c;
}

AudioClip sine_clip(double freq, std::size_t n, double amp = 1.0) {
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i)
    s[i] = amp * std::sin(2.0 * std::numbers::pi * freq * i / 16000.0);
  return make_clip(std::move(s));
}

// O(n^2) reference DFT
std::vector<std::complex<double>> naive_dft(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t t = 0; t < n; ++t)
      acc += x[t] * std::exp(std::complex<double>(
                        0.0, -2.0 * std::numbers::pi * k * t / n));
    out[k] = acc;
  }
  return out;
}

}  // namespace

TEST_CASE("fft matches a naive dft") {
  Rng rng(11);
  std::vector<double> x(128);
  for (auto& v : x) v = rng.uniform(-1.0, 1.0);
  auto ref = naive_dft(x);
  std::vector<std::complex<double>> buf(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) buf[i] = x[i];
  fft(buf);
  for (std::size_t k = 0; k < x.size(); ++k)
    CHECK(std::abs(buf[k] - ref[k]) < 1e-9);
}

TEST_CASE("stft: frame count and shape") {
  const AudioClip clip = make_clip(std::vector<double>(512, 0.1));
  const Spectrogram spec = stft(clip);
  CHECK(spec.num_frames == 1);
  CHECK(spec.num_bins == 257);

  CHECK_THROWS_AS(stft(make_clip(std::vector<double>(100, 0.0))),
                  TooShortError);
}

TEST_CASE("stft: frame count formula matches direct enumeration") {
  StftConfig config;
  Rng rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t len = 512 + rng.below(5000);
    // enumerate frame starts directly
    int count = 0;
    for (std::size_t start = 0; start + 512 <= len; start += 256) ++count;
    CHECK(stft_frame_count(len, config) == count);
  }
}

TEST_CASE("stft: windowed Parseval on a constant signal") {
  const double c = 0.25;
  const AudioClip clip = make_clip(std::vector<double>(512, c));
  const Spectrogram spec = stft(clip);

  // time-domain sum of the windowed signal
  double time_energy = 0.0;
  for (int i = 0; i < 512; ++i) {
    const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / 512.0);
    time_energy += (w * c) * (w * c);
  }
  // one-sided Parseval: sum_k w_os |X|^2 = N * sum_t x^2
  double freq_energy = 0.0;
  for (int k = 0; k < 257; ++k) {
    const double w_os = (k == 0 || k == 256) ? 1.0 : 2.0;
    freq_energy += w_os * std::norm(spec.at(0, k));
  }
  CHECK(freq_energy / 512.0 == doctest::Approx(time_energy).epsilon(1e-9));
}

TEST_CASE("stft: 1 kHz sine peaks at bin 32") {
  const Spectrogram spec = stft(sine_clip(1000.0, 512));
  int peak_bin = 0;
  double peak = 0.0;
  for (int k = 0; k < 257; ++k) {
    if (std::abs(spec.at(0, k)) > peak) {
      peak = std::abs(spec.at(0, k));
      peak_bin = k;
    }
  }
  CHECK(peak_bin == 32);
}

TEST_CASE("stft is linear") {
  Rng rng(17);
  std::vector<double> a(1024), b(1024);
  for (auto& v : a) v = rng.uniform(-1.0, 1.0);
  for (auto& v : b) v = rng.uniform(-1.0, 1.0);
  std::vector<double> sum(1024);
  for (std::size_t i = 0; i < sum.size(); ++i) sum[i] = a[i] + b[i];

  const Spectrogram sa = stft(make_clip(a));
  const Spectrogram sb = stft(make_clip(b));
  const Spectrogram ss = stft(make_clip(sum));
  for (std::size_t i = 0; i < ss.data.size(); ++i)
    CHECK(std::abs(ss.data[i] - (sa.data[i] + sb.data[i])) < 1e-9);
}

TEST_CASE("mel_filterbank: shape, unit peaks, coverage") {
  const FreqWeighting fb = mel_filterbank(32, 0.0, 8000.0, 16000, 512);
  CHECK(fb.num_bands == 32);
  CHECK(fb.num_bins == 257);
  for (int b = 0; b < 32; ++b) {
    double peak = 0.0;
    for (int k = 0; k < 257; ++k) {
      CHECK(fb.at(b, k) >= 0.0);
      peak = std::max(peak, fb.at(b, k));
    }
    CHECK(peak == doctest::Approx(1.0));
  }

  // every interior bin between the first and last filter centers gets
  // positive total weight
  auto center_bin = [&](int b) {
    int best = 0;
    for (int k = 0; k < 257; ++k)
      if (fb.at(b, k) > fb.at(b, best)) best = k;
    return best;
  };
  const int first_center = center_bin(0);
  const int last_center = center_bin(31);
  for (int k = first_center; k <= last_center; ++k) {
    double total = 0.0;
    for (int b = 0; b < 32; ++b) total += fb.at(b, k);
    CHECK(total > 0.0);
  }

  CHECK_THROWS_AS(mel_filterbank(32, 8000.0, 4000.0, 16000, 512),
                  InvalidRangeError);
}

TEST_CASE("bandpass_weighting: bin-center arithmetic") {
  const FreqWeighting w = bandpass_weighting(150.0, 5000.0, 512);
  CHECK(w.num_bands == 1);
  for (int k = 0; k < 257; ++k) {
    const bool expect = k >= 5 && k <= 160;
    CHECK(w.at(0, k) == (expect ? 1.0 : 0.0));
  }

  const FreqWeighting all = bandpass_weighting(0.0, 8000.0, 512);
  for (int k = 0; k < 257; ++k) CHECK(all.at(0, k) == 1.0);

  // idempotent 0/1 mask
  for (int k = 0; k < 257; ++k)
    CHECK(w.at(0, k) * w.at(0, k) == w.at(0, k));

  CHECK_THROWS_AS(bandpass_weighting(5000.0, 150.0, 512), InvalidRangeError);
}

TEST_CASE("band_energy: brute-force oracle and edge cases") {
  Rng rng(23);
  Spectrogram spec;
  spec.num_frames = 3;
  spec.num_bins = 257;
  spec.data.resize(3 * 257);
  for (auto& v : spec.data)
    v = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};

  const FreqWeighting fb = mel_filterbank(32, 0.0, 8000.0, 16000, 512);
  const std::vector<double> fast = band_energy(spec, fb);
  for (int n = 0; n < 3; ++n) {
    for (int b = 0; b < 32; ++b) {
      double acc = 0.0;
      for (int k = 0; k < 257; ++k) {
        const double m = fb.at(b, k) * std::abs(spec.at(n, k));
        acc += m * m;
      }
      const double got = fast[n * 32 + b];
      CHECK(std::fabs(got - acc) <= 1e-12 * std::max(1.0, std::fabs(acc)));
    }
  }

  // zero spectrogram -> zero energies
  Spectrogram zero = spec;
  for (auto& v : zero.data) v = 0.0;
  for (double e : band_energy(zero, fb)) CHECK(e == 0.0);

  // all-ones single band equals total spectral energy
  FreqWeighting ones;
  ones.num_bands = 1;
  ones.num_bins = 257;
  ones.matrix.assign(257, 1.0);
  const std::vector<double> total = band_energy(spec, ones);
  for (int n = 0; n < 3; ++n) {
    double acc = 0.0;
    for (int k = 0; k < 257; ++k) acc += std::norm(spec.at(n, k));
    CHECK(total[n] == doctest::Approx(acc).epsilon(1e-12));
  }

  FreqWeighting bad = ones;
  bad.num_bins = 100;
  bad.matrix.resize(100);
  CHECK_THROWS_AS(band_energy(spec, bad), DimensionMismatchError);
}

TEST_CASE("band_energy is 2-homogeneous in the time signal") {
  Rng rng(29);
  std::vector<double> x(2048);
  for (auto& v : x) v = rng.uniform(-0.5, 0.5);
  std::vector<double> x10 = x;
  for (auto& v : x10) v *= 10.0;

  const FreqWeighting fb = mel_filterbank(32, 0.0, 8000.0, 16000, 512);
  const std::vector<double> e1 = band_energy(stft(make_clip(x)), fb);
  const std::vector<double> e100 = band_energy(stft(make_clip(x10)), fb);
  for (std::size_t i = 0; i < e1.size(); ++i)
    CHECK(e100[i] == doctest::Approx(100.0 * e1[i]).epsilon(1e-9));
}

TEST_CASE("log_mel_features: floor, homogeneity, pipeline") {
  const FreqWeighting fb = mel_filterbank(64, 0.0, 8000.0, 16000, 512);

  // digital silence hits the -10 floor everywhere
  const MelFeatures silent = log_mel_features(
      stft(make_clip(std::vector<double>(1024, 0.0))), fb);
  for (double v : silent.data) CHECK(v == -10.0);

  // scaling the signal by 10 scales band energies by 100, so the
  // log10-energy features rise by exactly 2 wherever above the floor
  const AudioClip a = sine_clip(700.0, 2048, 0.05);
  AudioClip b = a;
  for (auto& v : b.samples) v *= 10.0;
  const MelFeatures fa = log_mel_features(stft(a), fb);
  const MelFeatures fb2 = log_mel_features(stft(b), fb);
  int checked = 0;
  for (std::size_t i = 0; i < fa.data.size(); ++i) {
    if (fa.data[i] > -8.0) {
      CHECK(fb2.data[i] == doctest::Approx(fa.data[i] + 2.0).epsilon(1e-9));
      ++checked;
    }
  }
  CHECK(checked > 0);

  const Spectrogram spec = stft(a);
  const MelFeatures feats = log_mel_features(spec, fb);
  CHECK(feats.num_frames == spec.num_frames);
  CHECK(feats.num_bands == 64);
  for (double v : feats.data) CHECK(std::isfinite(v));

  const FreqWeighting fb32 = mel_filterbank(32, 0.0, 8000.0, 16000, 512);
  CHECK_THROWS_AS(log_mel_features(spec, fb32), DimensionMismatchError);
}
