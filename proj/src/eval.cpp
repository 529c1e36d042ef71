// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0

#include "vad/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "vad/errors.hpp"

namespace vad {

std::vector<double> postprocess(const std::vector<double>& pred,
                                double window_s, double percentile,
                                double hop_s) {
  if (pred.empty()) return {};
  int win = static_cast<int>(std::lround(window_s / hop_s));
  if (win < 1) win = 1;
  const int n = static_cast<int>(pred.size());

  std::vector<double> out(pred.size());
  std::vector<double> window;
  window.reserve(win);
  for (int t = 0; t < n; ++t) {
    const int lo = std::max(0, t - win + 1);
    const int m = t - lo + 1;
    window.assign(pred.begin() + lo, pred.begin() + t + 1);
    int k = static_cast<int>(std::ceil(percentile / 100.0 * m));
    if (k < 1) k = 1;
    std::nth_element(window.begin(), window.begin() + (k - 1), window.end());
    out[t] = window[k - 1];
  }
  return out;
}

namespace {

// Scores sorted descending with labels, grouped by equal score.
struct Sweep {
  std::vector<double> thresholds;  // group score values, descending
  std::vector<double> fpr, tpr;    // cumulative after each group
  long num_pos = 0, num_neg = 0;
};

Sweep sweep_thresholds(const std::vector<double>& scores,
                       const std::vector<int>& labels) {
  if (scores.size() != labels.size())
    throw LengthMismatchError("roc: scores/labels length mismatch");
  Sweep s;
  for (int l : labels) (l ? s.num_pos : s.num_neg)++;
  if (s.num_pos == 0 || s.num_neg == 0)
    throw SingleClassError("roc: both classes must be present");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });

  long tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double v = scores[order[i]];
    while (i < order.size() && scores[order[i]] == v) {
      (labels[order[i]] ? tp : fp)++;
      ++i;
    }
    s.thresholds.push_back(v);
    s.fpr.push_back(static_cast<double>(fp) / s.num_neg);
    s.tpr.push_back(static_cast<double>(tp) / s.num_pos);
  }
  return s;
}

}  // namespace

RocCurve roc_auc(const std::vector<double>& scores,
                 const std::vector<int>& labels) {
  const Sweep s = sweep_thresholds(scores, labels);

  RocCurve curve;
  curve.points.emplace_back(0.0, 0.0);
  double auc = 0.0;
  double prev_fpr = 0.0, prev_tpr = 0.0;
  for (std::size_t i = 0; i < s.thresholds.size(); ++i) {
    auc += (s.fpr[i] - prev_fpr) * (s.tpr[i] + prev_tpr) / 2.0;
    curve.points.emplace_back(s.fpr[i], s.tpr[i]);
    prev_fpr = s.fpr[i];
    prev_tpr = s.tpr[i];
  }
  curve.auc = auc;
  return curve;
}

std::pair<double, double> eer(const std::vector<double>& scores,
                              const std::vector<int>& labels) {
  const Sweep s = sweep_thresholds(scores, labels);

  // threshold above all scores: nothing predicted positive
  double best_gap = 1.0;  // |FPR - FNR| = |0 - 1|
  double best_rate = 0.5;
  double best_threshold = s.thresholds.empty() ? 0.0 : s.thresholds.front();
  bool have = false;
  for (std::size_t i = 0; i < s.thresholds.size(); ++i) {
    const double fpr = s.fpr[i];
    const double fnr = 1.0 - s.tpr[i];
    const double gap = std::fabs(fpr - fnr);
    if (!have || gap < best_gap) {
      have = true;
      best_gap = gap;
      best_rate = (fpr + fnr) / 2.0;
      best_threshold = s.thresholds[i];
    }
  }
  return {best_rate, best_threshold};
}

const std::vector<double> kDefaultSnrBinEdges = {-10.0, -5.0, 0.0,
                                                 5.0,   10.0, 15.0, 20.0};

std::vector<SnrBinRow> auc_by_snr(const std::vector<ClipRecord>& clips,
                                  const std::vector<double>& bin_edges,
                                  int* excluded) {
  const std::size_t n_bins = bin_edges.size() - 1;
  std::vector<std::vector<double>> per_bin(n_bins);
  int skipped = 0;

  for (const ClipRecord& clip : clips) {
    bool has_pos = false, has_neg = false;
    for (int l : clip.labels) (l ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg) {
      ++skipped;
      continue;
    }
    const double auc = roc_auc(clip.scores, clip.labels).auc;
    // clamp out-of-range clips into the edge bins
    double snr = std::clamp(clip.snr_db, bin_edges.front(),
                            std::nextafter(bin_edges.back(), -1e300));
    std::size_t bin = 0;
    while (bin + 1 < n_bins && snr >= bin_edges[bin + 1]) ++bin;
    per_bin[bin].push_back(auc);
  }

  std::vector<SnrBinRow> rows;
  for (std::size_t b = 0; b < n_bins; ++b) {
    SnrBinRow row;
    row.bin_lo = bin_edges[b];
    row.bin_hi = bin_edges[b + 1];
    row.count = static_cast<int>(per_bin[b].size());
    if (row.count > 0) {
      double mean = 0.0;
      for (double a : per_bin[b]) mean += a;
      mean /= row.count;
      double var = 0.0;
      for (double a : per_bin[b]) var += (a - mean) * (a - mean);
      row.mean_auc = mean;
      row.std_auc = std::sqrt(var / row.count);
    }
    rows.push_back(row);
  }
  if (excluded) *excluded = skipped;
  return rows;
}

void export_trace(const AudioClip& mixture, const std::vector<double>& vad_pred,
                  const std::vector<double>& vnr_pred_db,
                  const std::string& path, int hop, int frame_len) {
  if (vad_pred.size() != vnr_pred_db.size())
    throw LengthMismatchError("export_trace: prediction length mismatch");

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw IoError("cannot open " + tmp);
    out << "time_s,waveform_env,vad,vnr_db\n";
    out.precision(9);
    for (std::size_t n = 0; n < vad_pred.size(); ++n) {
      const std::size_t start = n * hop;
      double env = 0.0;
      for (std::size_t i = start;
           i < std::min(start + frame_len, mixture.samples.size()); ++i)
        env = std::max(env, std::fabs(mixture.samples[i]));
      out << (static_cast<double>(n) * hop / mixture.sample_rate) << ',' << env
          << ',' << vad_pred[n] << ',' << vnr_pred_db[n] << '\n';
    }
    if (!out) throw IoError("short write to " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw IoError("rename " + tmp + " -> " + path);
}

void write_overall_csv(const EvalReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path);
  out.precision(9);
  out << "auc,eer,eer_threshold_db\n";
  out << report.overall_auc << ',' << report.eer << ','
      << report.eer_threshold << '\n';
}

void write_by_snr_csv(const EvalReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path);
  out.precision(9);
  out << "bin_lo,bin_hi,mean_auc,std_auc,count\n";
  for (const SnrBinRow& row : report.per_snr_rows)
    out << row.bin_lo << ',' << row.bin_hi << ',' << row.mean_auc << ','
        << row.std_auc << ',' << row.count << '\n';
}

}  // namespace vad
