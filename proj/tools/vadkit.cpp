// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0

// vadkit: data generation, training, streaming inference, and
// evaluation in one binary.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>

#include "CLI11.hpp"
#include "vad/config.hpp"
#include "vad/errors.hpp"
#include "vad/eval.hpp"
#include "vad/parallel.hpp"
#include "vad/pipeline.hpp"

namespace fs = std::filesystem;
using namespace vad;

namespace {

std::string indexed_name(const char* prefix, uint64_t index,
                         const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%06llu.%s", prefix,
                static_cast<unsigned long long>(index), ext);
  return buf;
}

int run_gen_data(const RunConfig& config, int count, uint64_t seed,
                 const std::string& out_dir, int jobs) {
  if (count < 1) throw ConfigError("--count must be >= 1");
  fs::create_directories(out_dir);
  const SynthConfig synth = config.synth_config();

  std::vector<ManifestRow> rows(count);
  std::vector<std::exception_ptr> errors(count);
  parallel_for(static_cast<std::size_t>(count), jobs, [&](std::size_t i) {
    try {
      const TrainingExample ex = make_example(seed, i, synth);
      const std::string mix_name = indexed_name("mix", i, "wav");
      const std::string label_name = indexed_name("label", i, "csv");
      write_wav(ex.mixture, (fs::path(out_dir) / mix_name).string());
      write_label_csv(ex.labels, (fs::path(out_dir) / label_name).string());
      rows[i] = {i,
                 ex.spec.seed,
                 ex.spec.snr_db,
                 ex.spec.level_dbfs,
                 ex.spec.reverb,
                 ex.spec.air_rt60_s,
                 mix_name,
                 label_name};
    } catch (...) {
      errors[i] = std::current_exception();
    }
  });
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  write_manifest(rows, (fs::path(out_dir) / "manifest.csv").string());
  std::printf("wrote %d examples to %s\n", count, out_dir.c_str());
  return 0;
}

int run_train(const RunConfig& config, const std::string& manifest,
              const std::string& val_manifest, const std::string& model_path,
              const std::string& log_path, int jobs) {
  TrainConfig train_config = config.train_config();
  train_config.jobs = jobs;
  const StftConfig stft_config = config.label_config().stft;

  const TrainSet train_set = load_train_set(manifest, stft_config);
  TrainSet val_set = train_set;
  if (!val_manifest.empty())
    val_set = load_train_set(val_manifest, stft_config);

  std::printf("training loss=%s clips=%zu val=%zu\n",
              loss_kind_to_string(train_config.loss_kind).c_str(),
              train_set.size(), val_set.size());
  TrainResult result = train_loop(train_config, train_set, val_set);
  save_model(result.best_model, model_path);
  if (!log_path.empty()) write_train_log(result.history, log_path);
  std::printf("best val auc %.4f at epoch %d; model -> %s\n", result.best_auc,
              result.best_epoch, model_path.c_str());
  return 0;
}

int run_infer(const RunConfig& config, const std::string& model_path,
              const std::string& wav_path, const std::string& out_path,
              bool no_postprocess, bool report_rtf) {
  Crn<float> model = load_model(model_path);
  const AudioClip clip = read_wav(wav_path);
  const StftConfig stft_config = config.label_config().stft;
  const double hop_s =
      static_cast<double>(stft_config.hop) / clip.sample_rate;
  const double post_window_s = config.get_double("post.window_s");
  const double post_percentile = config.get_double("post.percentile");

  const auto t0 = std::chrono::steady_clock::now();

  // streaming: features, model step, and trailing-percentile
  // post-processing are all computed frame by frame with no look-ahead
  int num_frames = 0;
  const std::vector<float> features =
      clip_features(clip, stft_config, &num_frames);

  StreamState<float> state = make_stream_state<float>();
  std::vector<std::vector<double>> raw(model.n_out),
      post(model.n_out);
  std::vector<float> frame(kFeatDim);
  for (int t = 0; t < num_frames; ++t) {
    std::copy(features.begin() + static_cast<std::size_t>(t) * kFeatDim,
              features.begin() + static_cast<std::size_t>(t + 1) * kFeatDim,
              frame.begin());
    const std::vector<float> out = crn_step(state, frame, model);
    for (int o = 0; o < model.n_out; ++o) raw[o].push_back(out[o]);
  }
  if (!no_postprocess) {
    for (int o = 0; o < model.n_out; ++o)
      post[o] = postprocess(raw[o], post_window_s, post_percentile, hop_s);
  }

  const auto t1 = std::chrono::steady_clock::now();

  const std::string tmp = out_path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw IoError("cannot open " + tmp);
    out.precision(9);
    out << "frame,time_s";
    const char* head_names[2] = {model.n_out == 2 ? "vad" : "out", "vnr"};
    for (int o = 0; o < model.n_out; ++o) {
      out << ',' << head_names[o] << "_raw";
      if (!no_postprocess) out << ',' << head_names[o] << "_post";
    }
    out << '\n';
    for (int t = 0; t < num_frames; ++t) {
      out << t << ',' << t * hop_s;
      for (int o = 0; o < model.n_out; ++o) {
        out << ',' << raw[o][t];
        if (!no_postprocess) out << ',' << post[o][t];
      }
      out << '\n';
    }
    if (!out) throw IoError("short write to " + tmp);
  }
  if (std::rename(tmp.c_str(), out_path.c_str()) != 0)
    throw IoError("rename " + tmp + " -> " + out_path);

  if (report_rtf) {
    const double elapsed_s =
        std::chrono::duration<double>(t1 - t0).count();
    const double rtf = elapsed_s / clip.duration_s();
    std::printf("rtf %.5f (%.3f ms per second of audio, simd=%s)\n", rtf,
                1000.0 * rtf, kern::simd_name());
  }
  std::printf("wrote %d frames to %s\n", num_frames, out_path.c_str());
  return 0;
}

int run_eval(const RunConfig& config, const std::string& model_path,
             const std::string& manifest, const std::string& out_dir,
             const std::string& head, double vnr_gt_threshold_db,
             bool use_vnr_gt, int jobs) {
  Crn<float> model = load_model(model_path);
  int head_index = 0;
  if (head == "vnr") {
    if (model.n_out != 2)
      throw ConfigError("--head vnr requires a two-output model");
    head_index = 1;
  } else if (head != "vad") {
    throw ConfigError("--head must be vad or vnr");
  }

  const StftConfig stft_config = config.label_config().stft;
  const double hop_s = static_cast<double>(stft_config.hop) / kSampleRate;
  const double post_window_s = config.get_double("post.window_s");
  const double post_percentile = config.get_double("post.percentile");

  const std::vector<ManifestRow> rows = read_manifest(manifest);
  const fs::path base = fs::path(manifest).parent_path();
  std::vector<ClipRecord> records(rows.size());
  std::vector<std::exception_ptr> errors(rows.size());
  parallel_for(rows.size(), jobs, [&](std::size_t i) {
    try {
      const ManifestRow& row = rows[i];
      auto resolve = [&](const std::string& p) {
        fs::path fp(p);
        return fp.is_absolute() ? fp.string() : (base / fp).string();
      };
      const AudioClip mixture = read_wav(resolve(row.mix_path));
      const LabelTrack labels = read_label_csv(resolve(row.label_path));
      int num_frames = 0;
      const std::vector<float> features =
          clip_features(mixture, stft_config, &num_frames);
      const std::vector<float> probs =
          crn_forward(features, num_frames, model);

      ClipRecord rec;
      rec.snr_db = row.snr_db;
      std::vector<double> scores(num_frames);
      for (int t = 0; t < num_frames; ++t)
        scores[t] = probs[t * model.n_out + head_index];
      rec.scores = postprocess(scores, post_window_s, post_percentile, hop_s);
      rec.labels.resize(num_frames);
      for (int t = 0; t < num_frames; ++t) {
        rec.labels[t] = use_vnr_gt
                            ? (labels.vnr_db[t] >= vnr_gt_threshold_db ? 1 : 0)
                            : (labels.vad[t] > 0.5 ? 1 : 0);
      }
      records[i] = std::move(rec);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  });
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<double> pooled_scores;
  std::vector<int> pooled_labels;
  for (const ClipRecord& rec : records) {
    pooled_scores.insert(pooled_scores.end(), rec.scores.begin(),
                         rec.scores.end());
    pooled_labels.insert(pooled_labels.end(), rec.labels.begin(),
                         rec.labels.end());
  }

  EvalReport report;
  report.overall_auc = roc_auc(pooled_scores, pooled_labels).auc;
  auto [rate, threshold] = eer(pooled_scores, pooled_labels);
  report.eer = rate;
  // report the EER threshold in dB for the VNR head (inverse unit map)
  report.eer_threshold =
      head_index == 1 ? vnr_unit_to_db(threshold) : threshold;
  report.per_snr_rows =
      auc_by_snr(records, kDefaultSnrBinEdges, &report.excluded_clips);

  fs::create_directories(out_dir);
  write_overall_csv(report, (fs::path(out_dir) / "overall.csv").string());
  write_by_snr_csv(report, (fs::path(out_dir) / "by_snr.csv").string());
  std::printf("auc %.4f eer %.4f (threshold %.3f) excluded %d -> %s\n",
              report.overall_auc, report.eer, report.eer_threshold,
              report.excluded_clips, out_dir.c_str());
  return 0;
}

int run_info(const std::string& model_path) {
  Crn<float> model = load_model(model_path);
  std::printf("n_out %d\nparameters %zu\nsimd %s\n", model.n_out,
              model.num_params(), kern::simd_name());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"noise-robust VAD/VNR toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "key = value config file");
  app.add_option("--set", overrides, "config override key=value (repeatable)");

  auto* gen = app.add_subcommand("gen-data", "generate a synthetic dataset");
  int gen_count = 10;
  uint64_t gen_seed = 1;
  std::string gen_out = "data";
  int gen_jobs = 1;
  gen->add_option("--count", gen_count, "number of examples");
  gen->add_option("--seed", gen_seed, "dataset seed");
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--jobs", gen_jobs, "worker threads");

  auto* train = app.add_subcommand("train", "train a model");
  std::string train_manifest, val_manifest, train_model = "model.crn",
                              train_log = "train_log.csv", train_loss;
  int train_jobs = 1;
  int train_max_epochs = -1, train_batch = -1, train_patience = -1;
  double train_lr = -1.0;
  uint64_t train_seed = 0;
  bool train_seed_set = false;
  train->add_option("--manifest", train_manifest, "training manifest")
      ->required();
  train->add_option("--val-manifest", val_manifest,
                    "validation manifest (defaults to training set)");
  train->add_option("--out", train_model, "output model path");
  train->add_option("--log", train_log, "training log CSV");
  train->add_option("--loss", train_loss,
                    "vad_bce | vnr_mae | multi_bce_mae | multi_bce_bce");
  train->add_option("--max-epochs", train_max_epochs, "epoch cap");
  train->add_option("--batch-clips", train_batch, "clips per batch");
  train->add_option("--patience", train_patience, "early stop patience");
  train->add_option("--lr", train_lr, "learning rate");
  train->add_option("--seed", train_seed, "training seed")
      ->each([&](const std::string&) { train_seed_set = true; });
  train->add_option("--jobs", train_jobs, "worker threads");

  auto* infer = app.add_subcommand("infer", "streaming inference on a WAV");
  std::string infer_model, infer_wav, infer_out = "predictions.csv";
  bool infer_no_post = false, infer_rtf = false;
  infer->add_option("--model", infer_model, "model file")->required();
  infer->add_option("--wav", infer_wav, "input WAV")->required();
  infer->add_option("--out", infer_out, "output CSV");
  infer->add_flag("--no-postprocess", infer_no_post,
                  "omit smoothed output columns");
  infer->add_flag("--rtf", infer_rtf, "report real-time factor");

  auto* eval_cmd = app.add_subcommand("eval", "evaluate on a manifest");
  std::string eval_model, eval_manifest, eval_out = "report", eval_head = "vad";
  double eval_vnr_gt_db = -7.0;
  bool eval_use_vnr_gt = false;
  int eval_jobs = 1;
  eval_cmd->add_option("--model", eval_model, "model file")->required();
  eval_cmd->add_option("--manifest", eval_manifest, "dataset manifest")
      ->required();
  eval_cmd->add_option("--out", eval_out, "report directory");
  eval_cmd->add_option("--head", eval_head, "vad | vnr");
  eval_cmd
      ->add_option("--vnr-gt-threshold-db", eval_vnr_gt_db,
                   "use VNR-thresholded ground truth at this dB value")
      ->each([&](const std::string&) { eval_use_vnr_gt = true; });
  eval_cmd->add_option("--jobs", eval_jobs, "worker threads");

  auto* info = app.add_subcommand("info", "print model summary");
  std::string info_model;
  info->add_option("--model", info_model, "model file")->required();

  try {
    app.parse(argc, argv);

    RunConfig config;
    if (!config_path.empty()) config.load_file(config_path);
    for (const std::string& kv : overrides) {
      const std::size_t eq = kv.find('=');
      if (eq == std::string::npos)
        throw ConfigError("--set expects key=value, got " + kv);
      config.set(kv.substr(0, eq), kv.substr(eq + 1));
    }

    if (gen->parsed())
      return run_gen_data(config, gen_count, gen_seed, gen_out, gen_jobs);
    if (train->parsed()) {
      // flags win over the config file
      if (!train_loss.empty()) config.set("loss", train_loss);
      if (train_max_epochs >= 0)
        config.set("max_epochs", std::to_string(train_max_epochs));
      if (train_batch > 0)
        config.set("batch_clips", std::to_string(train_batch));
      if (train_patience > 0)
        config.set("patience", std::to_string(train_patience));
      if (train_lr > 0.0) config.set("lr", std::to_string(train_lr));
      if (train_seed_set) config.set("seed", std::to_string(train_seed));
      return run_train(config, train_manifest, val_manifest, train_model,
                       train_log, train_jobs);
    }
    if (infer->parsed())
      return run_infer(config, infer_model, infer_wav, infer_out,
                       infer_no_post, infer_rtf);
    if (eval_cmd->parsed())
      return run_eval(config, eval_model, eval_manifest, eval_out, eval_head,
                      eval_vnr_gt_db, eval_use_vnr_gt, eval_jobs);
    if (info->parsed()) return run_info(info_model);
    return 2;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return 3;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
