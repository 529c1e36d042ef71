// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0

#ifndef VAD_TRAIN_HPP
#define VAD_TRAIN_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "vad/nn.hpp"

namespace vad {

enum class LossKind { kVadBce, kVnrMae, kMultiBceMae, kMultiBceBce };

inline int loss_n_out(LossKind kind) {
  return (kind == LossKind::kVadBce || kind == LossKind::kVnrMae) ? 1 : 2;
}

LossKind loss_kind_from_string(const std::string& name);
std::string loss_kind_to_string(LossKind kind);

constexpr double kBceClamp = 1e-7;

// -(1/N) sum [ z log(p) + (1-z) log(1-p) ], predictions clamped to
// [1e-7, 1-1e-7].
template <typename T>
T bce_loss(const std::vector<T>& pred, const std::vector<T>& target) {
  if (pred.size() != target.size())
    throw LengthMismatchError("bce_loss: length mismatch");
  T acc = T(0);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const T p = std::clamp(pred[i], T(kBceClamp), T(1.0 - kBceClamp));
    acc -= target[i] * std::log(p) + (T(1) - target[i]) * std::log(T(1) - p);
  }
  return acc / static_cast<T>(pred.size());
}

template <typename T>
T mae_loss(const std::vector<T>& pred, const std::vector<T>& target) {
  if (pred.size() != target.size())
    throw LengthMismatchError("mae_loss: length mismatch");
  T acc = T(0);
  for (std::size_t i = 0; i < pred.size(); ++i)
    acc += std::abs(pred[i] - target[i]);
  return acc / static_cast<T>(pred.size());
}

// kind 1: (1-alpha) BCE(vad) + alpha MAE(vnr); kind 2: BCE(vad) + BCE(vnr).
template <typename T>
T multi_loss(const std::vector<T>& pred_vad, const std::vector<T>& pred_vnr,
             const std::vector<T>& tgt_vad, const std::vector<T>& tgt_vnr,
             LossKind kind, T alpha) {
  if (kind == LossKind::kMultiBceMae)
    return (T(1) - alpha) * bce_loss(pred_vad, tgt_vad) +
           alpha * mae_loss(pred_vnr, tgt_vnr);
  if (kind == LossKind::kMultiBceBce)
    return bce_loss(pred_vad, tgt_vad) + bce_loss(pred_vnr, tgt_vnr);
  throw WrongOutputArityError("multi_loss requires a multi-target kind");
}

// One clip's supervision: features plus the two label tracks.
template <typename T>
struct ClipBatchItem {
  std::vector<T> features;  // T x 64
  int num_frames = 0;
  std::vector<T> vad;       // soft targets
  std::vector<T> vnr_unit;  // unit-mapped VNR targets
  double snr_db = 0.0;
};

// Gradient tensors mirroring the model.
template <typename T>
struct GradTape {
  Crn<T> grads;

  explicit GradTape(int n_out) { allocate_model(grads, n_out); }
  void zero() {
    for (auto& [name, t] : grads.params())
      std::fill(t->data.begin(), t->data.end(), T(0));
  }
  double global_norm() {
    double acc = 0.0;
    for (auto& [name, t] : grads.params())
      for (T v : t->data) acc += static_cast<double>(v) * v;
    return std::sqrt(acc);
  }
  void scale(double factor) {
    for (auto& [name, t] : grads.params())
      kern::scale(static_cast<T>(factor), t->data.data(), t->size());
  }
};

// Loss value and per-frame logit gradients for the configured loss.
template <typename T>
T loss_and_logit_grad(const std::vector<T>& probs, int num_frames, int n_out,
                      const std::vector<T>& tgt_vad,
                      const std::vector<T>& tgt_vnr, LossKind kind, T alpha,
                      std::vector<T>* dlogits) {
  const T invn = T(1) / static_cast<T>(num_frames);
  if (dlogits) dlogits->assign(probs.size(), T(0));

  auto bce_term = [&](int head, const std::vector<T>& tgt, T weight) {
    T acc = T(0);
    for (int t = 0; t < num_frames; ++t) {
      const T p_raw = probs[t * n_out + head];
      const T p = std::clamp(p_raw, T(kBceClamp), T(1.0 - kBceClamp));
      acc -= tgt[t] * std::log(p) + (T(1) - tgt[t]) * std::log(T(1) - p);
      if (dlogits && p_raw > T(kBceClamp) && p_raw < T(1.0 - kBceClamp))
        (*dlogits)[t * n_out + head] += weight * (p_raw - tgt[t]) * invn;
    }
    return weight * acc * invn;
  };
  auto mae_term = [&](int head, const std::vector<T>& tgt, T weight) {
    T acc = T(0);
    for (int t = 0; t < num_frames; ++t) {
      const T p = probs[t * n_out + head];
      const T d = p - tgt[t];
      acc += std::abs(d);
      if (dlogits) {
        const T sgn = d > T(0) ? T(1) : (d < T(0) ? T(-1) : T(0));
        (*dlogits)[t * n_out + head] +=
            weight * sgn * p * (T(1) - p) * invn;
      }
    }
    return weight * acc * invn;
  };

  switch (kind) {
    case LossKind::kVadBce:
      return bce_term(0, tgt_vad, T(1));
    case LossKind::kVnrMae:
      return mae_term(0, tgt_vnr, T(1));
    case LossKind::kMultiBceMae:
      return bce_term(0, tgt_vad, T(1) - alpha) + mae_term(1, tgt_vnr, alpha);
    case LossKind::kMultiBceBce:
      return bce_term(0, tgt_vad, T(1)) + bce_term(1, tgt_vnr, T(1));
  }
  throw ConfigError("unknown loss kind");
}

// Reverse-mode pass for one clip; accumulates parameter gradients into
// `tape` and returns the clip loss.
template <typename T>
T backward_clip(const Crn<T>& model, const ClipBatchItem<T>& clip,
                LossKind kind, T alpha, GradTape<T>& tape) {
  if (loss_n_out(kind) != model.n_out)
    throw WrongOutputArityError("loss kind does not match model n_out");
  if (clip.num_frames <= 0 ||
      clip.features.size() !=
          static_cast<std::size_t>(clip.num_frames) * kFeatDim)
    throw ShapeMismatchError("backward: bad feature shape");

  ForwardCache<T> cache;
  crn_forward(clip.features, clip.num_frames, model, &cache);

  const int num_frames = clip.num_frames;
  const int n_out = model.n_out;
  std::vector<T> dlogits;
  const T loss = loss_and_logit_grad(cache.probs, num_frames, n_out, clip.vad,
                                     clip.vnr_unit, kind, alpha, &dlogits);
  if (!std::isfinite(static_cast<double>(loss)))
    throw NonFiniteLossError("non-finite loss");

  Crn<T>& g = tape.grads;

  // FC head backward
  std::vector<T> dh_fc(static_cast<std::size_t>(num_frames) * kGruDim, T(0));
  std::vector<T> da1(kFc1Dim), dpre1(kFc1Dim);
  for (int t = 0; t < num_frames; ++t) {
    const T* dlogit = dlogits.data() + t * n_out;
    const T* a1 = cache.fc1_post.data() + t * kFc1Dim;
    kern::ger_acc(g.fc2_w.data.data(), n_out, kFc1Dim, dlogit, a1);
    for (int o = 0; o < n_out; ++o) g.fc2_b.data[o] += dlogit[o];
    std::fill(da1.begin(), da1.end(), T(0));
    kern::matvec_t_acc(model.fc2_w.data.data(), n_out, kFc1Dim, dlogit,
                       da1.data());
    const T* pre1 = cache.fc1_pre.data() + t * kFc1Dim;
    for (int i = 0; i < kFc1Dim; ++i) {
      if (pre1[i] >= T(0)) {
        dpre1[i] = da1[i];
      } else {
        dpre1[i] = da1[i] * model.fc1_slope.data[i];
        g.fc1_slope.data[i] += da1[i] * pre1[i];
      }
      g.fc1_b.data[i] += dpre1[i];
    }
    const T* h_t = cache.h.data() + t * kGruDim;
    kern::ger_acc(g.fc1_w.data.data(), kFc1Dim, kGruDim, dpre1.data(), h_t);
    kern::matvec_t_acc(model.fc1_w.data.data(), kFc1Dim, kGruDim,
                       dpre1.data(), dh_fc.data() + t * kGruDim);
  }

  // GRU backward through time
  const std::vector<T>& gru_x = cache.conv_post[kNumConvLayers - 1];
  std::vector<T> dx(static_cast<std::size_t>(num_frames) * kGruDim, T(0));
  std::vector<T> dh_carry(kGruDim, T(0));
  std::vector<T> h_zero(kGruDim, T(0));
  std::vector<T> dh(kGruDim), dhc(kGruDim), dz(kGruDim), dr(kGruDim),
      dh_prev(kGruDim), dah(kGruDim), daz(kGruDim), dar(kGruDim),
      drh(kGruDim), rh(kGruDim);
  for (int t = num_frames - 1; t >= 0; --t) {
    const T* z = cache.z.data() + t * kGruDim;
    const T* r = cache.r.data() + t * kGruDim;
    const T* hc = cache.hc.data() + t * kGruDim;
    const T* h_prev = t > 0 ? cache.h.data() + (t - 1) * kGruDim : h_zero.data();
    const T* x = gru_x.data() + t * kGruDim;

    for (int i = 0; i < kGruDim; ++i)
      dh[i] = dh_fc[t * kGruDim + i] + dh_carry[i];
    for (int i = 0; i < kGruDim; ++i) {
      dhc[i] = dh[i] * z[i];
      dz[i] = dh[i] * (hc[i] - h_prev[i]);
      dh_prev[i] = dh[i] * (T(1) - z[i]);
      rh[i] = r[i] * h_prev[i];
    }
    // candidate gate
    for (int i = 0; i < kGruDim; ++i)
      dah[i] = dhc[i] * (T(1) - hc[i] * hc[i]);
    kern::ger_acc(g.gru.wh.data.data(), kGruDim, kGruDim, dah.data(), x);
    kern::ger_acc(g.gru.uh.data.data(), kGruDim, kGruDim, dah.data(),
                  rh.data());
    for (int i = 0; i < kGruDim; ++i) g.gru.bh.data[i] += dah[i];
    kern::matvec_t_acc(model.gru.wh.data.data(), kGruDim, kGruDim, dah.data(),
                       dx.data() + t * kGruDim);
    std::fill(drh.begin(), drh.end(), T(0));
    kern::matvec_t_acc(model.gru.uh.data.data(), kGruDim, kGruDim, dah.data(),
                       drh.data());
    for (int i = 0; i < kGruDim; ++i) {
      dr[i] = drh[i] * h_prev[i];
      dh_prev[i] += drh[i] * r[i];
    }
    // update gate
    for (int i = 0; i < kGruDim; ++i)
      daz[i] = dz[i] * z[i] * (T(1) - z[i]);
    kern::ger_acc(g.gru.wz.data.data(), kGruDim, kGruDim, daz.data(), x);
    kern::ger_acc(g.gru.uz.data.data(), kGruDim, kGruDim, daz.data(), h_prev);
    for (int i = 0; i < kGruDim; ++i) g.gru.bz.data[i] += daz[i];
    kern::matvec_t_acc(model.gru.wz.data.data(), kGruDim, kGruDim, daz.data(),
                       dx.data() + t * kGruDim);
    kern::matvec_t_acc(model.gru.uz.data.data(), kGruDim, kGruDim, daz.data(),
                       dh_prev.data());
    // reset gate
    for (int i = 0; i < kGruDim; ++i)
      dar[i] = dr[i] * r[i] * (T(1) - r[i]);
    kern::ger_acc(g.gru.wr.data.data(), kGruDim, kGruDim, dar.data(), x);
    kern::ger_acc(g.gru.ur.data.data(), kGruDim, kGruDim, dar.data(), h_prev);
    for (int i = 0; i < kGruDim; ++i) g.gru.br.data[i] += dar[i];
    kern::matvec_t_acc(model.gru.wr.data.data(), kGruDim, kGruDim, dar.data(),
                       dx.data() + t * kGruDim);
    kern::matvec_t_acc(model.gru.ur.data.data(), kGruDim, kGruDim, dar.data(),
                       dh_prev.data());

    dh_carry = dh_prev;
  }

  // conv stack backward; dx is the gradient at conv_post[3]
  std::vector<T> dpost = std::move(dx);
  for (int l = kNumConvLayers - 1; l >= 0; --l) {
    const int c_in = kConvChannels[l], c_out = kConvChannels[l + 1];
    const int f_in = kConvFreqDims[l], f_out = kConvFreqDims[l + 1];
    const std::size_t frame_in = static_cast<std::size_t>(c_in) * f_in;
    const std::size_t frame_out = static_cast<std::size_t>(c_out) * f_out;
    const std::vector<T>& in =
        l > 0 ? cache.conv_post[l - 1] : cache.input;

    // PReLU backward
    std::vector<T> dpre(dpost.size());
    for (int t = 0; t < num_frames; ++t) {
      const T* pre = cache.conv_pre[l].data() + t * frame_out;
      const T* dpo = dpost.data() + t * frame_out;
      T* dpr = dpre.data() + t * frame_out;
      for (int co = 0; co < c_out; ++co) {
        const T slope = model.conv[l].slope.data[co];
        T dslope_acc = T(0);
        for (int f = 0; f < f_out; ++f) {
          const std::size_t idx = static_cast<std::size_t>(co) * f_out + f;
          if (pre[idx] >= T(0)) {
            dpr[idx] = dpo[idx];
          } else {
            dpr[idx] = dpo[idx] * slope;
            dslope_acc += dpo[idx] * pre[idx];
          }
        }
        g.conv[l].slope.data[co] += dslope_acc;
      }
    }

    std::vector<T> din(static_cast<std::size_t>(num_frames) * frame_in, T(0));
    T* gw = g.conv[l].w.data.data();
    const T* w = model.conv[l].w.data.data();
    for (int t = 0; t < num_frames; ++t) {
      const T* dpr = dpre.data() + t * frame_out;
      for (int co = 0; co < c_out; ++co) {
        for (int f = 0; f < f_out; ++f) {
          const T grad = dpr[static_cast<std::size_t>(co) * f_out + f];
          if (grad == T(0)) continue;
          g.conv[l].b.data[co] += grad;
          for (int kt = 0; kt < 2; ++kt) {
            const int it = t - 1 + kt;
            if (it < 0) continue;
            const T* in_frame = in.data() + static_cast<std::size_t>(it) * frame_in;
            T* din_frame = din.data() + static_cast<std::size_t>(it) * frame_in;
            for (int ci = 0; ci < c_in; ++ci) {
              const std::size_t wbase =
                  ((static_cast<std::size_t>(co) * c_in + ci) * 2 + kt) * 3;
              for (int kf = 0; kf < 3; ++kf) {
                const int fi = 2 * f - 1 + kf;
                if (fi < 0 || fi >= f_in) continue;
                const std::size_t ii = static_cast<std::size_t>(ci) * f_in + fi;
                gw[wbase + kf] += grad * in_frame[ii];
                din_frame[ii] += grad * w[wbase + kf];
              }
            }
          }
        }
      }
    }
    dpost = std::move(din);
  }

  return loss;
}

// Loss-only evaluation (used by the finite-difference checker).
template <typename T>
T loss_only(const Crn<T>& model, const ClipBatchItem<T>& clip, LossKind kind,
            T alpha) {
  ForwardCache<T> cache;
  crn_forward(clip.features, clip.num_frames, model, &cache);
  return loss_and_logit_grad(cache.probs, clip.num_frames, model.n_out,
                             clip.vad, clip.vnr_unit, kind, alpha,
                             static_cast<std::vector<T>*>(nullptr));
}

// Nearest-rank percentile of the observed gradient-norm history; the
// current norm is part of the history, so the first step is never
// clipped.
class AutoClip {
 public:
  explicit AutoClip(double percentile = 10.0) : percentile_(percentile) {}

  // Returns the clip threshold after recording `norm`.
  double observe(double norm) {
    history_.push_back(norm);
    std::vector<double> sorted = history_;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    std::size_t k = static_cast<std::size_t>(
        std::ceil(percentile_ / 100.0 * static_cast<double>(n)));
    if (k < 1) k = 1;
    return sorted[k - 1];
  }

  template <typename T>
  double apply(GradTape<T>& tape) {
    const double norm = tape.global_norm();
    const double threshold = observe(norm);
    if (norm > threshold && norm > 0.0) tape.scale(threshold / norm);
    return threshold;
  }

  const std::vector<double>& history() const { return history_; }

 private:
  double percentile_;
  std::vector<double> history_;
};

// AdamW with decoupled weight decay.
template <typename T>
struct AdamW {
  double lr = 5e-5;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int64_t step_count = 0;
  std::vector<std::vector<double>> m, v;

  void init(Crn<T>& model) {
    m.clear();
    v.clear();
    for (auto& [name, t] : model.params()) {
      m.emplace_back(t->size(), 0.0);
      v.emplace_back(t->size(), 0.0);
    }
  }

  void step(Crn<T>& model, GradTape<T>& tape) {
    auto params = model.params();
    auto grads = tape.grads.params();
    if (m.empty()) init(model);
    ++step_count;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step_count));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step_count));
    for (std::size_t p = 0; p < params.size(); ++p) {
      Tensor<T>& theta = *params[p].second;
      const Tensor<T>& grad = *grads[p].second;
      if (theta.size() != grad.size())
        throw ShapeMismatchError("adamw: gradient shape mismatch");
      for (std::size_t i = 0; i < theta.size(); ++i) {
        double w = static_cast<double>(theta.data[i]);
        const double gv = static_cast<double>(grad.data[i]);
        w -= lr * weight_decay * w;  // decoupled decay
        m[p][i] = beta1 * m[p][i] + (1.0 - beta1) * gv;
        v[p][i] = beta2 * v[p][i] + (1.0 - beta2) * gv * gv;
        const double mhat = m[p][i] / bc1;
        const double vhat = v[p][i] / bc2;
        w -= lr * mhat / (std::sqrt(vhat) + eps);
        theta.data[i] = static_cast<T>(w);
      }
    }
  }
};

struct TrainConfig {
  LossKind loss_kind = LossKind::kVadBce;
  double alpha = 0.2;
  double lr = 5e-5;
  double weight_decay = 0.01;
  int batch_clips = 50;
  double clip_percentile = 10.0;
  int patience = 10;
  int max_epochs = 100;
  uint64_t seed = 1;
  // Worker threads for per-clip backward passes. Results are
  // deterministic for a fixed job count; the cross-clip summation
  // order differs between job counts.
  int jobs = 1;
};

struct TrainLogRow {
  int epoch = 0;
  int step = 0;
  double loss = 0.0;
  double grad_norm = 0.0;
  double clip_threshold = 0.0;
  double val_auc = 0.0;  // NaN except on the evaluation row per epoch
};

struct TrainResult {
  Crn<float> best_model;
  double best_auc = 0.0;
  int best_epoch = 0;
  std::vector<TrainLogRow> history;
};

using TrainSet = std::vector<ClipBatchItem<float>>;

// Validation score head: VNR for n_out=2 and the VNR single-target
// loss, VAD otherwise. Ground truth is the smoothed VAD label
// thresholded at 0.5.
double pooled_val_auc(const Crn<float>& model, const TrainSet& val_set);

TrainResult train_loop(const TrainConfig& config, const TrainSet& train_set,
                       const TrainSet& val_set);

void write_train_log(const std::vector<TrainLogRow>& history,
                     const std::string& path);

}  // namespace vad

#endif  // VAD_TRAIN_HPP
