// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0

#include "vad/pipeline.hpp"

#include <filesystem>

#include "vad/errors.hpp"

namespace vad {

std::vector<float> clip_features(const AudioClip& clip,
                                 const StftConfig& config, int* num_frames) {
  const Spectrogram spec = stft(clip, config);
  const FreqWeighting fb = mel_filterbank(64, 0.0, kSampleRate / 2.0,
                                          kSampleRate, config.frame_len);
  const MelFeatures feats = log_mel_features(spec, fb);
  if (num_frames) *num_frames = feats.num_frames;
  std::vector<float> out(feats.data.size());
  for (std::size_t i = 0; i < feats.data.size(); ++i)
    out[i] = static_cast<float>(feats.data[i]);
  return out;
}

ClipBatchItem<float> make_clip_item(const AudioClip& mixture,
                                    const LabelTrack& labels, double snr_db,
                                    const StftConfig& config) {
  ClipBatchItem<float> item;
  item.features = clip_features(mixture, config, &item.num_frames);
  if (item.num_frames != labels.num_frames())
    throw FrameCountMismatchError("label/feature frame count mismatch");
  item.vad.resize(labels.vad.size());
  item.vnr_unit.resize(labels.vnr_unit.size());
  for (std::size_t i = 0; i < labels.vad.size(); ++i) {
    item.vad[i] = static_cast<float>(labels.vad[i]);
    item.vnr_unit[i] = static_cast<float>(labels.vnr_unit[i]);
  }
  item.snr_db = snr_db;
  return item;
}

TrainSet load_train_set(const std::string& manifest_path,
                        const StftConfig& config) {
  const std::vector<ManifestRow> rows = read_manifest(manifest_path);
  const std::filesystem::path base =
      std::filesystem::path(manifest_path).parent_path();

  TrainSet set;
  set.reserve(rows.size());
  for (const ManifestRow& row : rows) {
    auto resolve = [&](const std::string& p) {
      std::filesystem::path fp(p);
      return fp.is_absolute() ? fp.string() : (base / fp).string();
    };
    const AudioClip mixture = read_wav(resolve(row.mix_path));
    const LabelTrack labels = read_label_csv(resolve(row.label_path));
    set.push_back(make_clip_item(mixture, labels, row.snr_db, config));
  }
  return set;
}

TrainSet generate_train_set(int n_examples, uint64_t split_seed,
                            const SynthConfig& config) {
  TrainSet set;
  set.reserve(n_examples);
  for (int i = 0; i < n_examples; ++i) {
    const TrainingExample ex =
        make_example(split_seed, static_cast<uint64_t>(i), config);
    set.push_back(make_clip_item(ex.mixture, ex.labels, ex.spec.snr_db,
                                 config.label.stft));
  }
  return set;
}

}  // namespace vad
