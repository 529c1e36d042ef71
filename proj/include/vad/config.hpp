// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0

#ifndef VAD_CONFIG_HPP
#define VAD_CONFIG_HPP

#include <map>
#include <string>

#include "vad/labels.hpp"
#include "vad/synth.hpp"
#include "vad/train.hpp"

namespace vad {

// Flat key=value run configuration. Every tunable has a default equal
// to the reference value; unknown keys are rejected.
class RunConfig {
 public:
  RunConfig();

  // Parses a UTF-8 `key = value` file with '#' comments.
  void load_file(const std::string& path);
  void set(const std::string& key, const std::string& value);
  const std::string& get(const std::string& key) const;

  double get_double(const std::string& key) const;
  int get_int(const std::string& key) const;
  uint64_t get_u64(const std::string& key) const;
  bool get_bool(const std::string& key) const;

  LabelConfig label_config() const;
  SynthConfig synth_config() const;
  TrainConfig train_config() const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace vad

#endif  // VAD_CONFIG_HPP
