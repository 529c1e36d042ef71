// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0

#ifndef VAD_EVAL_HPP
#define VAD_EVAL_HPP

#include <string>
#include <vector>

#include "vad/audio_io.hpp"

namespace vad {

struct RocCurve {
  std::vector<std::pair<double, double>> points;  // (fpr, tpr)
  double auc = 0.0;
};

struct SnrBinRow {
  double bin_lo = 0.0;
  double bin_hi = 0.0;
  double mean_auc = 0.0;
  double std_auc = 0.0;
  int count = 0;
};

struct EvalReport {
  double overall_auc = 0.0;
  double eer = 0.0;
  double eer_threshold = 0.0;
  std::vector<SnrBinRow> per_snr_rows;
  int excluded_clips = 0;
};

// Trailing nearest-rank percentile over a window_s window (25 frames
// at 16 ms hop); truncated windows at the start, no look-ahead.
std::vector<double> postprocess(const std::vector<double>& pred,
                                double window_s = 0.4,
                                double percentile = 90.0,
                                double hop_s = 0.016);

// ROC by sweeping grouped score thresholds; trapezoidal AUC
// (equivalent to Mann-Whitney with half-credit ties).
RocCurve roc_auc(const std::vector<double>& scores,
                 const std::vector<int>& labels);

// Threshold minimizing |FPR - FNR|; rate is (FPR+FNR)/2 there.
std::pair<double, double> eer(const std::vector<double>& scores,
                              const std::vector<int>& labels);

struct ClipRecord {
  double snr_db = 0.0;
  std::vector<double> scores;
  std::vector<int> labels;
};

extern const std::vector<double> kDefaultSnrBinEdges;  // -10,-5,0,5,10,15,20

// Per-clip AUC grouped into SNR bins; clips missing a class are
// excluded and counted.
std::vector<SnrBinRow> auc_by_snr(const std::vector<ClipRecord>& clips,
                                  const std::vector<double>& bin_edges,
                                  int* excluded = nullptr);

// CSV time_s,waveform_env,vad,vnr_db at frame rate.
void export_trace(const AudioClip& mixture, const std::vector<double>& vad_pred,
                  const std::vector<double>& vnr_pred_db,
                  const std::string& path, int hop = 256, int frame_len = 512);

void write_overall_csv(const EvalReport& report, const std::string& path);
void write_by_snr_csv(const EvalReport& report, const std::string& path);

}  // namespace vad

#endif  // VAD_EVAL_HPP
