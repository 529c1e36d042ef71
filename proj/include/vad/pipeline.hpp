// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0

#ifndef VAD_PIPELINE_HPP
#define VAD_PIPELINE_HPP

#include <string>
#include <vector>

#include "vad/labels.hpp"
#include "vad/synth.hpp"
#include "vad/train.hpp"

namespace vad {

// 64-band log-mel features for the network input, as float T x 64.
std::vector<float> clip_features(const AudioClip& clip,
                                 const StftConfig& config, int* num_frames);

ClipBatchItem<float> make_clip_item(const AudioClip& mixture,
                                    const LabelTrack& labels, double snr_db,
                                    const StftConfig& config = {});

// Loads a gen-data manifest into memory as training items.
TrainSet load_train_set(const std::string& manifest_path,
                        const StftConfig& config = {});

// Generates a dataset in memory (no disk round-trip) for tests and
// training runs.
TrainSet generate_train_set(int n_examples, uint64_t split_seed,
                            const SynthConfig& config = {});

}  // namespace vad

#endif  // VAD_PIPELINE_HPP
