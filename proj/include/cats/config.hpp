#pragma once

// Run configuration: plain-text key=value files with [sections], every key
// overridable by a --key=value command-line flag (section prefix optional,
// e.g. --model.c1=512 or --c1=512). C3 is always derived as C1 + C2.

#include <cstdint>
#include <string>
#include <vector>

#include "cats/data.hpp"
#include "cats/model.hpp"

namespace cats {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  ScenarioSpec scenario;
  ModelConfig model;
  std::string skeleton_text = "default";

  int epochs = 60;
  double lr = 1e-3;
  double grad_clip = 5.0;
  double early_stop_train_acc = 0.0;  // 0 disables early stopping
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string fold_policy = "leave_two_subjects_out";
  int background_class = -1;  // excluded from segment extraction when >= 0

  std::string dataset_path;  // empty: synthesize from `scenario`
  std::string out_dir = "runs/out";

  static RunConfig from_file(const std::string& path);
  void apply_override(const std::string& key, const std::string& value);
  void finalize();  // propagates derived fields and validates
  std::string snapshot() const;  // canonical key=value dump
};

// Parses "--key=value" style flags into (key, value) pairs; a bare "--key"
// yields value "true".
std::vector<std::pair<std::string, std::string>> parse_flag_overrides(
    const std::vector<std::string>& args);

}  // namespace cats
