// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0

#include "vad/train.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "vad/eval.hpp"
#include "vad/parallel.hpp"
#include "vad/rng.hpp"

namespace vad {

LossKind loss_kind_from_string(const std::string& name) {
  if (name == "vad_bce") return LossKind::kVadBce;
  if (name == "vnr_mae") return LossKind::kVnrMae;
  if (name == "multi_bce_mae") return LossKind::kMultiBceMae;
  if (name == "multi_bce_bce") return LossKind::kMultiBceBce;
  throw ConfigError("unknown loss kind: " + name);
}

std::string loss_kind_to_string(LossKind kind) {
  switch (kind) {
    case LossKind::kVadBce: return "vad_bce";
    case LossKind::kVnrMae: return "vnr_mae";
    case LossKind::kMultiBceMae: return "multi_bce_mae";
    case LossKind::kMultiBceBce: return "multi_bce_bce";
  }
  return "?";
}

double pooled_val_auc(const Crn<float>& model, const TrainSet& val_set) {
  std::vector<double> scores;
  std::vector<int> labels;
  const int head = model.n_out == 2 ? 1 : 0;
  for (const auto& clip : val_set) {
    const std::vector<float> probs =
        crn_forward(clip.features, clip.num_frames, model);
    for (int t = 0; t < clip.num_frames; ++t) {
      scores.push_back(probs[t * model.n_out + head]);
      labels.push_back(clip.vad[t] > 0.5f ? 1 : 0);
    }
  }
  return roc_auc(scores, labels).auc;
}

TrainResult train_loop(const TrainConfig& config, const TrainSet& train_set,
                       const TrainSet& val_set) {
  if (train_set.empty() || val_set.empty())
    throw ConfigError("train/val sets must be nonempty");

  const int n_out = loss_n_out(config.loss_kind);
  Crn<float> model = init_model<float>(n_out, config.seed);
  GradTape<float> tape(n_out);
  AdamW<float> opt;
  opt.lr = config.lr;
  opt.weight_decay = config.weight_decay;
  AutoClip clipper(config.clip_percentile);

  TrainResult result;
  result.best_auc = -1.0;
  int evals_without_improvement = 0;
  int step = 0;

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    // deterministic per-epoch shuffle
    Rng shuffle_rng = Rng::stream(config.seed, 0x5u * 1000 + epoch);
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[shuffle_rng.below(i)]);

    for (std::size_t start = 0; start < order.size();
         start += config.batch_clips) {
      const std::size_t end =
          std::min(order.size(), start + config.batch_clips);
      tape.zero();
      double batch_loss = 0.0;
      if (config.jobs <= 1) {
        for (std::size_t i = start; i < end; ++i)
          batch_loss += backward_clip(model, train_set[order[i]],
                                      config.loss_kind,
                                      static_cast<float>(config.alpha), tape);
      } else {
        const int workers = std::min<int>(
            config.jobs, static_cast<int>(end - start));
        std::vector<GradTape<float>> tapes(workers, GradTape<float>(n_out));
        std::vector<double> losses(workers, 0.0);
        std::vector<std::exception_ptr> errors(workers);
        parallel_for(static_cast<std::size_t>(workers), workers,
                     [&](std::size_t w) {
                       try {
                         for (std::size_t i = start + w; i < end;
                              i += static_cast<std::size_t>(workers))
                           losses[w] += backward_clip(
                               model, train_set[order[i]], config.loss_kind,
                               static_cast<float>(config.alpha), tapes[w]);
                       } catch (...) {
                         errors[w] = std::current_exception();
                       }
                     });
        for (int w = 0; w < workers; ++w) {
          if (errors[w]) std::rethrow_exception(errors[w]);
          batch_loss += losses[w];
          auto dst = tape.grads.params();
          auto src = tapes[w].grads.params();
          for (std::size_t p = 0; p < dst.size(); ++p)
            for (std::size_t i = 0; i < dst[p].second->size(); ++i)
              dst[p].second->data[i] += src[p].second->data[i];
        }
      }
      const double inv = 1.0 / static_cast<double>(end - start);
      batch_loss *= inv;
      tape.scale(inv);

      const double raw_norm = tape.global_norm();
      const double threshold = clipper.apply(tape);
      opt.step(model, tape);
      ++step;

      TrainLogRow row;
      row.epoch = epoch;
      row.step = step;
      row.loss = batch_loss;
      row.grad_norm = raw_norm;
      row.clip_threshold = threshold;
      row.val_auc = std::numeric_limits<double>::quiet_NaN();
      result.history.push_back(row);
    }

    const double auc = pooled_val_auc(model, val_set);
    result.history.back().val_auc = auc;
    if (auc > result.best_auc) {
      result.best_auc = auc;
      result.best_epoch = epoch;
      result.best_model = model;
      evals_without_improvement = 0;
    } else {
      ++evals_without_improvement;
      if (evals_without_improvement >= config.patience) break;
    }
  }
  if (result.best_auc < 0.0) {
    result.best_model = model;
    result.best_auc = 0.0;
  }
  return result;
}

void write_train_log(const std::vector<TrainLogRow>& history,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path);
  out.precision(9);
  out << "epoch,step,loss,grad_norm,clip_threshold,val_auc\n";
  for (const TrainLogRow& row : history) {
    out << row.epoch << ',' << row.step << ',' << row.loss << ','
        << row.grad_norm << ',' << row.clip_threshold << ',';
    if (std::isnan(row.val_auc)) {
      out << "";
    } else {
      out << row.val_auc;
    }
    out << '\n';
  }
}

}  // namespace vad
