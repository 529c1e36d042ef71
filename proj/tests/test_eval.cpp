#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "vad/errors.hpp"
#include "vad/eval.hpp"
#include "vad/rng.hpp"

using namespace vad;

namespace {

// O(n^2) Mann-Whitney statistic with half credit for ties; an
// independent definition of AUC.
double mann_whitney_auc(const std::vector<double>& scores,
                        const std::vector<int>& labels) {
  double wins = 0.0;
  long n_pos = 0, n_neg = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!labels[i]) continue;
    ++n_pos;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j]) continue;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  for (int l : labels)
    if (!l) ++n_neg;
  return wins / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

// Brute-force sweep over unique score thresholds (predict positive at
// score >= threshold), replicating the published operating points.
std::pair<double, double> eer_oracle(const std::vector<double>& scores,
                                     const std::vector<int>& labels) {
  std::vector<double> uniq = scores;
  std::sort(uniq.begin(), uniq.end(), std::greater<>());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());

  long n_pos = 0, n_neg = 0;
  for (int l : labels) (l ? n_pos : n_neg)++;

  double best_gap = 2.0, best_rate = 0.5, best_th = uniq.front();
  bool have = false;
  for (double th : uniq) {
    long tp = 0, fp = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (scores[i] >= th) (labels[i] ? tp : fp)++;
    }
    const double fpr = static_cast<double>(fp) / n_neg;
    const double fnr = 1.0 - static_cast<double>(tp) / n_pos;
    const double gap = std::fabs(fpr - fnr);
    if (!have || gap < best_gap) {
      have = true;
      best_gap = gap;
      best_rate = (fpr + fnr) / 2.0;
      best_th = th;
    }
  }
  return {best_rate, best_th};
}

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("postprocess: constants, spike response, window arithmetic") {
  // constants are fixed points
  const std::vector<double> c = postprocess(std::vector<double>(40, 0.3));
  for (double v : c) CHECK(v == 0.3);

  // a single spike survives only while it sits in the top decile of a
  // short (truncated) trailing window: frames 6, 7, 8 only
  std::vector<double> spike(60, 0.0);
  spike[6] = 1.0;
  const std::vector<double> p = postprocess(spike);
  for (int t = 0; t < 60; ++t) {
    const bool expect = t >= 6 && t <= 8;
    CHECK(p[t] == (expect ? 1.0 : 0.0));
  }

  // percentile 100 is a trailing max over 25 frames
  const std::vector<double> mx = postprocess(spike, 0.4, 100.0);
  for (int t = 0; t < 60; ++t) {
    const bool expect = t >= 6 && t <= 30;  // 25-frame trailing window
    CHECK(mx[t] == (expect ? 1.0 : 0.0));
  }

  CHECK(postprocess({}).empty());
  // outputs are drawn from the input values
  Rng rng(1);
  std::vector<double> x(100);
  for (auto& v : x) v = rng.uniform(0.0, 1.0);
  for (double v : postprocess(x))
    CHECK(std::count(x.begin(), x.end(), v) > 0);
}

TEST_CASE("postprocess is causal") {
  Rng rng(2);
  std::vector<double> x(80);
  for (auto& v : x) v = rng.uniform(0.0, 1.0);
  std::vector<double> y = x;
  const int t0 = 37;
  y[t0] = 2.0;  // future change

  const std::vector<double> px = postprocess(x);
  const std::vector<double> py = postprocess(y);
  for (int t = 0; t < t0; ++t) CHECK(px[t] == py[t]);
}

TEST_CASE("postprocess is monotone") {
  Rng rng(3);
  std::vector<double> a(64), b(64);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = rng.uniform(0.0, 1.0);
    b[i] = a[i] + rng.uniform(0.0, 0.5);  // pointwise >= a
  }
  const std::vector<double> pa = postprocess(a);
  const std::vector<double> pb = postprocess(b);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(pb[i] >= pa[i]);
}

TEST_CASE("roc_auc: separable, inverted, and uninformative cases") {
  const std::vector<int> labels = {1, 1, 0, 0};
  CHECK(roc_auc({0.9, 0.8, 0.2, 0.1}, labels).auc == doctest::Approx(1.0));
  CHECK(roc_auc({0.1, 0.2, 0.8, 0.9}, labels).auc ==
        doctest::Approx(0.0).epsilon(1e-12));
  // one tied group degenerates to the chance diagonal
  CHECK(roc_auc({0.5, 0.5, 0.5, 0.5}, labels).auc == doctest::Approx(0.5));

  // curve endpoints
  const RocCurve curve = roc_auc({0.9, 0.8, 0.2, 0.1}, labels);
  CHECK(curve.points.front() == std::pair<double, double>{0.0, 0.0});
  CHECK(curve.points.back() == std::pair<double, double>{1.0, 1.0});

  CHECK_THROWS_AS(roc_auc({0.5, 0.6}, {1, 1}), SingleClassError);
  CHECK_THROWS_AS(roc_auc({0.5}, {1, 0}), LengthMismatchError);
}

TEST_CASE("roc_auc equals the Mann-Whitney statistic, ties included") {
  Rng rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 50 + static_cast<int>(rng.below(150));
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    bool has_pos = false, has_neg = false;
    for (int i = 0; i < n; ++i) {
      // quantized scores so ties are frequent
      scores[i] = std::floor(rng.uniform(0.0, 1.0) * 8.0) / 8.0;
      labels[i] = rng.bernoulli(0.4) ? 1 : 0;
      (labels[i] ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg) continue;
    CHECK(std::fabs(roc_auc(scores, labels).auc -
                    mann_whitney_auc(scores, labels)) <= 1e-9);
  }
}

TEST_CASE("roc_auc is invariant to monotone score transforms") {
  Rng rng(13);
  std::vector<double> scores(200);
  std::vector<int> labels(200);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    scores[i] = rng.uniform(-4.0, 4.0);
    labels[i] = rng.bernoulli(0.5) ? 1 : 0;
  }
  labels[0] = 1;
  labels[1] = 0;
  std::vector<double> warped(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i)
    warped[i] = 1.0 / (1.0 + std::exp(-scores[i]));  // strictly increasing
  CHECK(roc_auc(scores, labels).auc ==
        doctest::Approx(roc_auc(warped, labels).auc).epsilon(1e-12));
}

TEST_CASE("eer: exact case and a brute-force sweep oracle") {
  // perfectly separable: EER 0 at the lowest positive score
  const auto [rate, th] = eer({0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0});
  CHECK(rate == 0.0);
  CHECK(th == 0.8);

  Rng rng(17);
  for (int rep = 0; rep < 10; ++rep) {
    const int n = 40 + static_cast<int>(rng.below(100));
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    for (int i = 0; i < n; ++i) {
      scores[i] = std::floor(rng.uniform(0.0, 1.0) * 16.0) / 16.0;
      labels[i] = rng.bernoulli(0.5) ? 1 : 0;
    }
    labels[0] = 1;
    labels[1] = 0;
    const auto got = eer(scores, labels);
    const auto want = eer_oracle(scores, labels);
    CHECK(got.first == doctest::Approx(want.first).epsilon(1e-12));
    CHECK(got.second == doctest::Approx(want.second).epsilon(1e-12));
  }
}

TEST_CASE("auc_by_snr: binning, clamping, exclusion, aggregation") {
  ClipRecord good;
  good.snr_db = 7.0;
  good.scores = {0.9, 0.8, 0.2, 0.1};
  good.labels = {1, 1, 0, 0};  // AUC 1

  ClipRecord noisy;
  noisy.snr_db = 8.5;
  noisy.scores = {0.5, 0.5, 0.5, 0.5};
  noisy.labels = {1, 0, 1, 0};  // AUC 0.5

  ClipRecord below;  // clamps into the lowest bin
  below.snr_db = -40.0;
  below.scores = good.scores;
  below.labels = good.labels;

  ClipRecord above;  // clamps into the highest bin
  above.snr_db = 99.0;
  above.scores = good.scores;
  above.labels = good.labels;

  ClipRecord single;  // one class only: excluded
  single.snr_db = 7.0;
  single.scores = {0.4, 0.6};
  single.labels = {1, 1};

  int excluded = -1;
  const std::vector<SnrBinRow> rows = auc_by_snr(
      {good, noisy, below, above, single}, kDefaultSnrBinEdges, &excluded);
  REQUIRE(rows.size() == 6);
  CHECK(excluded == 1);

  // bin [5,10) holds the two informative clips
  CHECK(rows[3].bin_lo == 5.0);
  CHECK(rows[3].bin_hi == 10.0);
  CHECK(rows[3].count == 2);
  CHECK(rows[3].mean_auc == doctest::Approx(0.75));
  CHECK(rows[3].std_auc == doctest::Approx(0.25));

  CHECK(rows[0].count == 1);  // clamped -40 dB clip
  CHECK(rows[0].mean_auc == doctest::Approx(1.0));
  CHECK(rows[5].count == 1);  // clamped 99 dB clip
  CHECK(rows[1].count == 0);
  CHECK(rows[1].mean_auc == 0.0);
}

TEST_CASE("export_trace: per-frame envelope and timing") {
  AudioClip mixture;
  mixture.samples.assign(1024, 0.0);
  mixture.samples[100] = -0.75;  // inside frame 0 only
  mixture.samples[600] = 0.5;    // inside frames 1 and 2

  const std::vector<double> vad = {0.9, 0.1, 0.4};
  const std::vector<double> vnr = {10.0, -5.0, 0.0};
  const std::string path = temp_path("trace.csv");
  export_trace(mixture, vad, vnr, path);

  std::ifstream in(path);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "time_s,waveform_env,vad,vnr_db");
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      const std::size_t next = line.find(',', pos);
      row.push_back(std::stod(line.substr(pos, next - pos)));
      if (next == std::string::npos) break;
      pos = next + 1;
    }
    rows.push_back(row);
  }
  REQUIRE(rows.size() == 3);
  for (int n = 0; n < 3; ++n) {
    CHECK(rows[n][0] == doctest::Approx(n * 256.0 / 16000.0));
    CHECK(rows[n][2] == doctest::Approx(vad[n]));
    CHECK(rows[n][3] == doctest::Approx(vnr[n]));
  }
  CHECK(rows[0][1] == doctest::Approx(0.75));  // peak magnitude in frame 0
  CHECK(rows[1][1] == doctest::Approx(0.5));
  CHECK(rows[2][1] == doctest::Approx(0.5));

  CHECK_THROWS_AS(export_trace(mixture, vad, {1.0}, path),
                  LengthMismatchError);
}

TEST_CASE("report CSV writers") {
  EvalReport report;
  report.overall_auc = 0.912;
  report.eer = 0.08;
  report.eer_threshold = 0.55;
  SnrBinRow row;
  row.bin_lo = 0.0;
  row.bin_hi = 5.0;
  row.mean_auc = 0.9;
  row.std_auc = 0.05;
  row.count = 12;
  report.per_snr_rows.push_back(row);

  const std::string p1 = temp_path("overall.csv");
  write_overall_csv(report, p1);
  std::ifstream in1(p1);
  std::string line;
  REQUIRE(std::getline(in1, line));
  CHECK(line == "auc,eer,eer_threshold_db");
  REQUIRE(std::getline(in1, line));
  CHECK(line == "0.912,0.08,0.55");

  const std::string p2 = temp_path("by_snr.csv");
  write_by_snr_csv(report, p2);
  std::ifstream in2(p2);
  REQUIRE(std::getline(in2, line));
  CHECK(line == "bin_lo,bin_hi,mean_auc,std_auc,count");
  REQUIRE(std::getline(in2, line));
  CHECK(line == "0,5,0.9,0.05,12");
}
