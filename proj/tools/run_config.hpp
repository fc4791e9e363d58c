#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "alphaembed/nn/model.hpp"
#include "alphaembed/nn/train.hpp"
#include "alphaembed/tasks.hpp"

namespace alphaembed::cli {

// Everything a training run needs. Filled from a preset, then a config
// file, then command-line flags.
struct RunConfig {
  std::string preset = "copy-small";
  TaskKind task = TaskKind::Copy;
  int aps = 5;  // interchangeable tokens in the model vocabulary
  nn::ModelConfig model;
  nn::EmbeddingConfig embedding;
  bool full_vocab_baseline = false;
  nn::TrainOptions train;
  int checkpoint_every = 0;
  std::string data_path;
  std::string checkpoint_path = "checkpoint.json";
  std::string log_path;
};

std::vector<std::string> preset_names();
// Throws ConfigError for unknown names.
RunConfig preset(const std::string& name);

// Section-qualified key, e.g. "model.d_model".
struct Setting {
  std::string key;
  std::string value;
};

// Reads an INI file into settings in file order. Throws ConfigError when
// the file cannot be parsed and DataError when it cannot be opened.
std::vector<Setting> read_config_file(const std::string& path);

// Applies one setting. Throws ConfigError for unknown keys or bad values.
void apply_setting(RunConfig& c, const Setting& s);

// "f_bn", "f_fn" or "adacos". Disabling f_fn also disables AdaCos.
void apply_ablation(RunConfig& c, const std::string& what);

// Cross-field checks. Throws ConfigError.
void validate(const RunConfig& c);

// Builds the config: preset named by the flags, else by the file, else the
// default; then file settings; then flag settings.
RunConfig resolve(const std::optional<std::string>& preset_flag,
                  const std::vector<Setting>& file, const std::vector<Setting>& flags,
                  const std::vector<std::string>& ablations);

// --seed, then ALPHA_EMBED_SEED, then `fallback`.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, std::uint64_t fallback);

}  // namespace alphaembed::cli
