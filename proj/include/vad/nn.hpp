// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0

#ifndef VAD_NN_HPP
#define VAD_NN_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "vad/errors.hpp"
#include "vad/kernels.hpp"
#include "vad/rng.hpp"

namespace vad {

// Conv encoder: channels 1->16->32->64->128, frequency 64->32->16->8->4,
// kernel (2,3), stride (1,2), padding (1,0,1,1) as
// (timeLeft,timeRight,freqLow,freqHigh). Time kernel 2 makes every
// layer causal with one frame of history.
constexpr int kNumConvLayers = 4;
constexpr std::array<int, 5> kConvChannels = {1, 16, 32, 64, 128};
constexpr std::array<int, 5> kConvFreqDims = {64, 32, 16, 8, 4};
constexpr int kFeatDim = 64;
constexpr int kGruDim = 512;  // 128 channels x 4 freq bins
constexpr int kFc1Dim = 256;

template <typename T>
struct Tensor {
  std::vector<int> shape;
  std::vector<T> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
    std::size_t n = 1;
    for (int d : shape) n *= static_cast<std::size_t>(d);
    data.assign(n, T(0));
  }
  std::size_t size() const { return data.size(); }
};

template <typename T>
struct ConvLayer {
  Tensor<T> w;      // [c_out, c_in, 2, 3]
  Tensor<T> b;      // [c_out]
  Tensor<T> slope;  // [c_out] PReLU
};

template <typename T>
struct GruLayer {
  Tensor<T> wz, uz, bz;
  Tensor<T> wr, ur, br;
  Tensor<T> wh, uh, bh;
};

template <typename T>
struct Crn {
  std::array<ConvLayer<T>, kNumConvLayers> conv;
  GruLayer<T> gru;
  Tensor<T> fc1_w, fc1_b, fc1_slope;  // 512 -> 256, PReLU
  Tensor<T> fc2_w, fc2_b;             // 256 -> n_out, sigmoid
  int n_out = 1;

  std::vector<std::pair<std::string, Tensor<T>*>> params() {
    std::vector<std::pair<std::string, Tensor<T>*>> out;
    for (int l = 0; l < kNumConvLayers; ++l) {
      const std::string p = "conv" + std::to_string(l) + ".";
      out.emplace_back(p + "w", &conv[l].w);
      out.emplace_back(p + "b", &conv[l].b);
      out.emplace_back(p + "slope", &conv[l].slope);
    }
    out.emplace_back("gru.wz", &gru.wz);
    out.emplace_back("gru.uz", &gru.uz);
    out.emplace_back("gru.bz", &gru.bz);
    out.emplace_back("gru.wr", &gru.wr);
    out.emplace_back("gru.ur", &gru.ur);
    out.emplace_back("gru.br", &gru.br);
    out.emplace_back("gru.wh", &gru.wh);
    out.emplace_back("gru.uh", &gru.uh);
    out.emplace_back("gru.bh", &gru.bh);
    out.emplace_back("fc1.w", &fc1_w);
    out.emplace_back("fc1.b", &fc1_b);
    out.emplace_back("fc1.slope", &fc1_slope);
    out.emplace_back("fc2.w", &fc2_w);
    out.emplace_back("fc2.b", &fc2_b);
    return out;
  }

  std::size_t num_params() {
    std::size_t n = 0;
    for (auto& [name, t] : params()) n += t->size();
    return n;
  }
};

template <typename T>
void allocate_model(Crn<T>& model, int n_out) {
  if (n_out != 1 && n_out != 2)
    throw WrongOutputArityError("n_out must be 1 or 2");
  model.n_out = n_out;
  for (int l = 0; l < kNumConvLayers; ++l) {
    model.conv[l].w = Tensor<T>({kConvChannels[l + 1], kConvChannels[l], 2, 3});
    model.conv[l].b = Tensor<T>({kConvChannels[l + 1]});
    model.conv[l].slope = Tensor<T>({kConvChannels[l + 1]});
  }
  model.gru.wz = Tensor<T>({kGruDim, kGruDim});
  model.gru.uz = Tensor<T>({kGruDim, kGruDim});
  model.gru.bz = Tensor<T>({kGruDim});
  model.gru.wr = Tensor<T>({kGruDim, kGruDim});
  model.gru.ur = Tensor<T>({kGruDim, kGruDim});
  model.gru.br = Tensor<T>({kGruDim});
  model.gru.wh = Tensor<T>({kGruDim, kGruDim});
  model.gru.uh = Tensor<T>({kGruDim, kGruDim});
  model.gru.bh = Tensor<T>({kGruDim});
  model.fc1_w = Tensor<T>({kFc1Dim, kGruDim});
  model.fc1_b = Tensor<T>({kFc1Dim});
  model.fc1_slope = Tensor<T>({kFc1Dim});
  model.fc2_w = Tensor<T>({n_out, kFc1Dim});
  model.fc2_b = Tensor<T>({n_out});
}

// Uniform +-1/sqrt(fan_in) weights, zero biases, PReLU slopes 0.25.
template <typename T>
Crn<T> init_model(int n_out, uint64_t seed) {
  Crn<T> model;
  allocate_model(model, n_out);
  Rng rng(seed);
  auto fill = [&rng](Tensor<T>& t, int fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (T& v : t.data) v = static_cast<T>(rng.uniform(-bound, bound));
  };
  for (int l = 0; l < kNumConvLayers; ++l) {
    fill(model.conv[l].w, kConvChannels[l] * 6);
    for (T& v : model.conv[l].slope.data) v = T(0.25);
  }
  fill(model.gru.wz, kGruDim);
  fill(model.gru.uz, kGruDim);
  fill(model.gru.wr, kGruDim);
  fill(model.gru.ur, kGruDim);
  fill(model.gru.wh, kGruDim);
  fill(model.gru.uh, kGruDim);
  fill(model.fc1_w, kGruDim);
  for (T& v : model.fc1_slope.data) v = T(0.25);
  fill(model.fc2_w, kFc1Dim);
  return model;
}

template <typename T>
inline T sigmoid(T x) {
  return T(1) / (T(1) + std::exp(-x));
}

template <typename T>
inline T prelu_scalar(T x, T slope) {
  return x >= T(0) ? x : slope * x;
}

// Causal conv for one output frame. `prev` is the t-1 input frame (or
// nullptr for zeros at t=0), `cur` the current one; both C_in x F_in.
// Identical arithmetic order is used by the batch and streaming paths
// so they agree bit-for-bit.
template <typename T>
void conv_frame_forward(const T* prev, const T* cur, int c_in, int f_in,
                        const ConvLayer<T>& layer, int c_out, int f_out,
                        T* pre) {
  const T* w = layer.w.data.data();
  for (int co = 0; co < c_out; ++co) {
    for (int f = 0; f < f_out; ++f) {
      T acc = layer.b.data[co];
      for (int kt = 0; kt < 2; ++kt) {
        const T* frame = kt == 0 ? prev : cur;
        if (frame == nullptr) continue;
        for (int ci = 0; ci < c_in; ++ci) {
          const T* in_row = frame + static_cast<std::size_t>(ci) * f_in;
          const T* w_row =
              w + ((static_cast<std::size_t>(co) * c_in + ci) * 2 + kt) * 3;
          for (int kf = 0; kf < 3; ++kf) {
            const int fi = 2 * f - 1 + kf;
            if (fi < 0 || fi >= f_in) continue;
            acc += w_row[kf] * in_row[fi];
          }
        }
      }
      pre[static_cast<std::size_t>(co) * f_out + f] = acc;
    }
  }
}

// One GRU step: z/r gates sigmoid, candidate tanh, reset applied to
// h_prev before the recurrent matmul.
template <typename T>
void gru_step(const GruLayer<T>& g, const T* h_prev, const T* x, T* z, T* r,
              T* hc, T* h) {
  const int n = kGruDim;
  std::vector<T> tmp(n), rh(n);
  kern::matvec(g.wz.data.data(), n, n, x, z);
  kern::matvec(g.uz.data.data(), n, n, h_prev, tmp.data());
  for (int i = 0; i < n; ++i) z[i] = sigmoid(z[i] + tmp[i] + g.bz.data[i]);
  kern::matvec(g.wr.data.data(), n, n, x, r);
  kern::matvec(g.ur.data.data(), n, n, h_prev, tmp.data());
  for (int i = 0; i < n; ++i) r[i] = sigmoid(r[i] + tmp[i] + g.br.data[i]);
  for (int i = 0; i < n; ++i) rh[i] = r[i] * h_prev[i];
  kern::matvec(g.wh.data.data(), n, n, x, hc);
  kern::matvec(g.uh.data.data(), n, n, rh.data(), tmp.data());
  for (int i = 0; i < n; ++i) hc[i] = std::tanh(hc[i] + tmp[i] + g.bh.data[i]);
  for (int i = 0; i < n; ++i)
    h[i] = (T(1) - z[i]) * h_prev[i] + z[i] * hc[i];
}

// Everything backward needs from a forward pass.
template <typename T>
struct ForwardCache {
  int num_frames = 0;
  std::vector<T> input;                                // T x 64
  std::array<std::vector<T>, kNumConvLayers> conv_pre;  // T x C x F
  std::array<std::vector<T>, kNumConvLayers> conv_post;
  std::vector<T> z, r, hc, h;  // each T x 512
  std::vector<T> fc1_pre, fc1_post;
  std::vector<T> logits, probs;  // T x n_out
};

// Batch forward over T frames of 64 log-mel features; returns per-frame
// sigmoid outputs (T x n_out, row-major) and optionally fills `cache`.
template <typename T>
std::vector<T> crn_forward(const std::vector<T>& features, int num_frames,
                           const Crn<T>& model,
                           ForwardCache<T>* cache = nullptr) {
  if (features.size() != static_cast<std::size_t>(num_frames) * kFeatDim)
    throw ShapeMismatchError("crn_forward: features must be T x 64");

  ForwardCache<T> local;
  ForwardCache<T>& c = cache ? *cache : local;
  c.num_frames = num_frames;
  c.input = features;

  // conv stack
  const std::vector<T>* in = &c.input;
  for (int l = 0; l < kNumConvLayers; ++l) {
    const int c_in = kConvChannels[l], c_out = kConvChannels[l + 1];
    const int f_in = kConvFreqDims[l], f_out = kConvFreqDims[l + 1];
    const std::size_t frame_in = static_cast<std::size_t>(c_in) * f_in;
    const std::size_t frame_out = static_cast<std::size_t>(c_out) * f_out;
    c.conv_pre[l].assign(static_cast<std::size_t>(num_frames) * frame_out, T(0));
    c.conv_post[l].resize(c.conv_pre[l].size());
    for (int t = 0; t < num_frames; ++t) {
      const T* prev = t > 0 ? in->data() + (t - 1) * frame_in : nullptr;
      conv_frame_forward(prev, in->data() + t * frame_in, c_in, f_in,
                         model.conv[l], c_out, f_out,
                         c.conv_pre[l].data() + t * frame_out);
      const T* pre = c.conv_pre[l].data() + t * frame_out;
      T* post = c.conv_post[l].data() + t * frame_out;
      for (int co = 0; co < c_out; ++co) {
        const T slope = model.conv[l].slope.data[co];
        for (int f = 0; f < f_out; ++f)
          post[static_cast<std::size_t>(co) * f_out + f] = prelu_scalar(
              pre[static_cast<std::size_t>(co) * f_out + f], slope);
      }
    }
    in = &c.conv_post[l];
  }

  // reshape contract: (128 channels x 4 freq) per frame is already the
  // flat 512-vector in channel-major order.
  const std::vector<T>& gru_x = c.conv_post[kNumConvLayers - 1];

  c.z.assign(static_cast<std::size_t>(num_frames) * kGruDim, T(0));
  c.r.assign(c.z.size(), T(0));
  c.hc.assign(c.z.size(), T(0));
  c.h.assign(c.z.size(), T(0));
  std::vector<T> h_zero(kGruDim, T(0));
  for (int t = 0; t < num_frames; ++t) {
    const T* h_prev = t > 0 ? c.h.data() + (t - 1) * kGruDim : h_zero.data();
    gru_step(model.gru, h_prev, gru_x.data() + t * kGruDim,
             c.z.data() + t * kGruDim, c.r.data() + t * kGruDim,
             c.hc.data() + t * kGruDim, c.h.data() + t * kGruDim);
  }

  const int n_out = model.n_out;
  c.fc1_pre.assign(static_cast<std::size_t>(num_frames) * kFc1Dim, T(0));
  c.fc1_post.resize(c.fc1_pre.size());
  c.logits.assign(static_cast<std::size_t>(num_frames) * n_out, T(0));
  c.probs.resize(c.logits.size());
  for (int t = 0; t < num_frames; ++t) {
    T* pre = c.fc1_pre.data() + t * kFc1Dim;
    kern::matvec(model.fc1_w.data.data(), kFc1Dim, kGruDim,
                 c.h.data() + t * kGruDim, pre);
    for (int i = 0; i < kFc1Dim; ++i) {
      pre[i] += model.fc1_b.data[i];
      c.fc1_post[t * kFc1Dim + i] =
          prelu_scalar(pre[i], model.fc1_slope.data[i]);
    }
    T* logit = c.logits.data() + t * n_out;
    kern::matvec(model.fc2_w.data.data(), n_out, kFc1Dim,
                 c.fc1_post.data() + t * kFc1Dim, logit);
    for (int o = 0; o < n_out; ++o) {
      logit[o] += model.fc2_b.data[o];
      c.probs[t * n_out + o] = sigmoid(logit[o]);
    }
  }
  return c.probs;
}

// Per-stream causal state: one frame of conv history per layer plus
// the GRU hidden vector.
template <typename T>
struct StreamState {
  std::array<std::vector<T>, kNumConvLayers> prev_in;
  std::vector<T> h;
  bool first_frame = true;

  void reset() {
    for (auto& v : prev_in) std::fill(v.begin(), v.end(), T(0));
    std::fill(h.begin(), h.end(), T(0));
    first_frame = true;
  }
};

template <typename T>
StreamState<T> make_stream_state() {
  StreamState<T> s;
  for (int l = 0; l < kNumConvLayers; ++l)
    s.prev_in[l].assign(
        static_cast<std::size_t>(kConvChannels[l]) * kConvFreqDims[l], T(0));
  s.h.assign(kGruDim, T(0));
  return s;
}

// Single-frame streaming inference; matches the corresponding row of
// crn_forward exactly.
template <typename T>
std::vector<T> crn_step(StreamState<T>& state, const std::vector<T>& frame,
                        const Crn<T>& model) {
  if (frame.size() != kFeatDim)
    throw ShapeMismatchError("crn_step: expected a 64-vector");

  std::vector<T> cur = frame;
  for (int l = 0; l < kNumConvLayers; ++l) {
    const int c_in = kConvChannels[l], c_out = kConvChannels[l + 1];
    const int f_in = kConvFreqDims[l], f_out = kConvFreqDims[l + 1];
    std::vector<T> pre(static_cast<std::size_t>(c_out) * f_out);
    const T* prev = state.first_frame ? nullptr : state.prev_in[l].data();
    conv_frame_forward(prev, cur.data(), c_in, f_in, model.conv[l], c_out,
                       f_out, pre.data());
    state.prev_in[l] = cur;
    cur.resize(pre.size());
    for (int co = 0; co < c_out; ++co) {
      const T slope = model.conv[l].slope.data[co];
      for (int f = 0; f < f_out; ++f)
        cur[static_cast<std::size_t>(co) * f_out + f] =
            prelu_scalar(pre[static_cast<std::size_t>(co) * f_out + f], slope);
    }
  }
  state.first_frame = false;

  std::vector<T> z(kGruDim), r(kGruDim), hc(kGruDim), h(kGruDim);
  gru_step(model.gru, state.h.data(), cur.data(), z.data(), r.data(),
           hc.data(), h.data());
  state.h = h;

  std::vector<T> fc1(kFc1Dim);
  kern::matvec(model.fc1_w.data.data(), kFc1Dim, kGruDim, h.data(),
               fc1.data());
  for (int i = 0; i < kFc1Dim; ++i)
    fc1[i] = prelu_scalar(fc1[i] + model.fc1_b.data[i],
                          model.fc1_slope.data[i]);

  std::vector<T> out(model.n_out);
  kern::matvec(model.fc2_w.data.data(), model.n_out, kFc1Dim, fc1.data(),
               out.data());
  for (int o = 0; o < model.n_out; ++o)
    out[o] = sigmoid(out[o] + model.fc2_b.data[o]);
  return out;
}

// Model container I/O: magic CRNV, version, n_out, named float32
// tensors, trailing CRC32.
void save_model(Crn<float>& model, const std::string& path);
Crn<float> load_model(const std::string& path);

uint32_t crc32(const unsigned char* data, std::size_t n, uint32_t seed = 0);

template <typename To, typename From>
Crn<To> convert_model(Crn<From>& src) {
  Crn<To> dst;
  allocate_model(dst, src.n_out);
  auto sp = src.params();
  auto dp = dst.params();
  for (std::size_t i = 0; i < sp.size(); ++i)
    for (std::size_t j = 0; j < sp[i].second->size(); ++j)
      dp[i].second->data[j] = static_cast<To>(sp[i].second->data[j]);
  return dst;
}

}  // namespace vad

#endif  // VAD_NN_HPP
