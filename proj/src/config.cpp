// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0

#include "vad/config.hpp"

#include <fstream>

#include "vad/errors.hpp"

namespace vad {

namespace {

std::string trim(const std::string& s) {
  const std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

RunConfig::RunConfig() {
  values_ = {
      {"stft.frame_len", "512"},
      {"stft.hop", "256"},
      {"vad.band_lo_hz", "150"},
      {"vad.band_hi_hz", "5000"},
      {"vad.rel_threshold", "0.01"},
      {"vnr.mel_bands", "32"},
      {"smooth.window_s", "0.2"},
      {"features.mel_bands", "64"},
      {"loss", "vad_bce"},
      {"alpha", "0.2"},
      {"lr", "5e-5"},
      {"weight_decay", "0.01"},
      {"batch_clips", "50"},
      {"clip_percentile", "10"},
      {"patience", "10"},
      {"max_epochs", "100"},
      {"seed", "1"},
      {"clip_len_s", "10"},
      {"snr.mean_db", "5"},
      {"snr.std_db", "10"},
      {"level.mean_dbfs", "-28"},
      {"level.std_dbfs", "10"},
      {"reverb.prob", "0.8"},
      {"rt60.lo_s", "0.2"},
      {"rt60.hi_s", "1.0"},
      {"post.window_s", "0.4"},
      {"post.percentile", "90"},
      {"jobs", "1"},
  };
}

void RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected key = value");
    set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

void RunConfig::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key: " + key);
  it->second = value;
}

const std::string& RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key: " + key);
  return it->second;
}

double RunConfig::get_double(const std::string& key) const {
  try {
    return std::stod(get(key));
  } catch (const std::logic_error&) {
    throw ConfigError("config key " + key + " is not a number");
  }
}

int RunConfig::get_int(const std::string& key) const {
  try {
    return std::stoi(get(key));
  } catch (const std::logic_error&) {
    throw ConfigError("config key " + key + " is not an integer");
  }
}

uint64_t RunConfig::get_u64(const std::string& key) const {
  try {
    return std::stoull(get(key));
  } catch (const std::logic_error&) {
    throw ConfigError("config key " + key + " is not an integer");
  }
}

bool RunConfig::get_bool(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config key " + key + " is not a boolean");
}

LabelConfig RunConfig::label_config() const {
  LabelConfig c;
  c.stft.frame_len = get_int("stft.frame_len");
  c.stft.hop = get_int("stft.hop");
  c.vad_band_lo_hz = get_double("vad.band_lo_hz");
  c.vad_band_hi_hz = get_double("vad.band_hi_hz");
  c.rel_threshold = get_double("vad.rel_threshold");
  c.vnr_mel_bands = get_int("vnr.mel_bands");
  c.smooth_window_s = get_double("smooth.window_s");
  return c;
}

SynthConfig RunConfig::synth_config() const {
  SynthConfig c;
  c.clip_len_s = get_double("clip_len_s");
  c.snr_mean_db = get_double("snr.mean_db");
  c.snr_std_db = get_double("snr.std_db");
  c.level_mean_dbfs = get_double("level.mean_dbfs");
  c.level_std_dbfs = get_double("level.std_dbfs");
  c.reverb_prob = get_double("reverb.prob");
  c.rt60_lo_s = get_double("rt60.lo_s");
  c.rt60_hi_s = get_double("rt60.hi_s");
  c.label = label_config();
  return c;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig c;
  c.loss_kind = loss_kind_from_string(get("loss"));
  c.alpha = get_double("alpha");
  c.lr = get_double("lr");
  c.weight_decay = get_double("weight_decay");
  c.batch_clips = get_int("batch_clips");
  c.clip_percentile = get_double("clip_percentile");
  c.patience = get_int("patience");
  c.max_epochs = get_int("max_epochs");
  c.seed = get_u64("seed");
  return c;
}

}  // namespace vad
