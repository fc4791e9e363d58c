#include "run_config.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "alphaembed/errors.hpp"

namespace alphaembed::cli {

namespace {

RunConfig copy_small() {
  RunConfig c;
  c.preset = "copy-small";
  c.task = TaskKind::Copy;
  c.aps = 5;
  c.model.d_model = 64;
  c.model.layers = 2;
  c.model.heads = 4;
  c.model.fc_size = 64;
  c.model.max_source_length = 64;
  c.model.max_target_length = 65;
  c.embedding.method = RandMethod(RandKind::HypercubeVertices, 6);
  c.embedding.flags = {false, true};
  c.train.batch_size = 512;
  c.train.steps = 20000;
  return c;
}

RunConfig copy_big() {
  RunConfig c = copy_small();
  c.preset = "copy-big";
  c.aps = 20;
  c.model.d_model = 128;
  c.model.layers = 6;
  c.model.heads = 8;
  c.model.fc_size = 128;
  c.model.max_source_length = 128;
  c.model.max_target_length = 129;
  return c;
}

RunConfig ltl() {
  RunConfig c;
  c.preset = "ltl";
  c.task = TaskKind::Ltl;
  c.aps = 5;
  c.model.d_model = 128;
  c.model.layers = 8;
  c.model.heads = 8;
  c.model.fc_size = 1024;
  c.model.max_source_length = 128;
  c.model.max_target_length = 128;
  c.model.encoder_positions = nn::EncoderPositions::TreePositional;
  c.embedding.method = RandMethod(RandKind::HypercubeVertices, 5);
  c.embedding.flags = {true, true};
  c.train.batch_size = 768;
  c.train.steps = 52000;
  return c;
}

RunConfig prop() {
  RunConfig c = ltl();
  c.preset = "prop";
  c.task = TaskKind::Prop;
  c.model.d_model = 132;
  c.model.layers = 6;
  c.model.heads = 6;
  c.model.fc_size = 512;
  c.model.max_target_length = 64;
  c.train.batch_size = 1024;
  c.train.steps = 50000;
  return c;
}

int to_int(const Setting& s) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(s.value, &used);
    if (used == s.value.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError(s.key + ": expected an integer, got '" + s.value + "'");
}

double to_double(const Setting& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s.value, &used);
    if (used == s.value.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError(s.key + ": expected a number, got '" + s.value + "'");
}

bool to_bool(const Setting& s) {
  if (s.value == "true" || s.value == "on" || s.value == "1") return true;
  if (s.value == "false" || s.value == "off" || s.value == "0") return false;
  throw ConfigError(s.key + ": expected true or false, got '" + s.value + "'");
}

using Setter = std::function<void(RunConfig&, const Setting&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table{
      {"preset", [](RunConfig&, const Setting&) {}},
      {"task", [](RunConfig& c, const Setting& s) { c.task = task_from_string(s.value); }},
      {"data.aps", [](RunConfig& c, const Setting& s) { c.aps = to_int(s); }},
      {"data.train", [](RunConfig& c, const Setting& s) { c.data_path = s.value; }},
      {"data.checkpoint", [](RunConfig& c, const Setting& s) { c.checkpoint_path = s.value; }},
      {"data.log", [](RunConfig& c, const Setting& s) { c.log_path = s.value; }},
      {"model.d_model", [](RunConfig& c, const Setting& s) { c.model.d_model = to_int(s); }},
      {"model.layers", [](RunConfig& c, const Setting& s) { c.model.layers = to_int(s); }},
      {"model.heads", [](RunConfig& c, const Setting& s) { c.model.heads = to_int(s); }},
      {"model.fc_size", [](RunConfig& c, const Setting& s) { c.model.fc_size = to_int(s); }},
      {"model.dropout", [](RunConfig& c, const Setting& s) { c.model.dropout = to_double(s); }},
      {"model.max_source_length",
       [](RunConfig& c, const Setting& s) { c.model.max_source_length = to_int(s); }},
      {"model.max_target_length",
       [](RunConfig& c, const Setting& s) { c.model.max_target_length = to_int(s); }},
      {"model.encoder_positions",
       [](RunConfig& c, const Setting& s) {
         c.model.encoder_positions = nn::encoder_positions_from_string(s.value);
       }},
      {"embedding.kind",
       [](RunConfig& c, const Setting& s) {
         if (s.value == "dual-part") {
           c.embedding.kind = nn::EmbeddingKind::DualPart;
         } else if (s.value == "baseline") {
           c.embedding.kind = nn::EmbeddingKind::Baseline;
         } else {
           throw ConfigError("embedding.kind: expected dual-part or baseline, got '" + s.value + "'");
         }
       }},
      {"embedding.method",
       [](RunConfig& c, const Setting& s) {
         c.embedding.method = RandMethod(rand_kind_from_string(s.value), c.embedding.method.d_beta);
       }},
      {"embedding.d_beta",
       [](RunConfig& c, const Setting& s) {
         c.embedding.method = RandMethod(c.embedding.method.kind, to_int(s));
       }},
      {"embedding.f_bn", [](RunConfig& c, const Setting& s) { c.embedding.flags.f_bn = to_bool(s); }},
      {"embedding.f_fn", [](RunConfig& c, const Setting& s) { c.embedding.flags.f_fn = to_bool(s); }},
      {"embedding.baseline",
       [](RunConfig& c, const Setting& s) {
         c.embedding.augmentation = nn::baseline_augmentation_from_string(s.value);
         c.full_vocab_baseline = s.value == "full-vocab";
         c.embedding.kind = nn::EmbeddingKind::Baseline;
       }},
      {"train.loss",
       [](RunConfig& c, const Setting& s) {
         if (s.value == "adacos") {
           c.train.loss = nn::LossKind::AdaCos;
         } else if (s.value == "cross-entropy") {
           c.train.loss = nn::LossKind::CrossEntropy;
         } else {
           throw ConfigError("train.loss: expected adacos or cross-entropy, got '" + s.value + "'");
         }
       }},
      {"train.steps", [](RunConfig& c, const Setting& s) { c.train.steps = to_int(s); }},
      {"train.batch_size", [](RunConfig& c, const Setting& s) { c.train.batch_size = to_int(s); }},
      {"train.learning_rate",
       [](RunConfig& c, const Setting& s) { c.train.learning_rate = to_double(s); }},
      {"train.warmup_steps", [](RunConfig& c, const Setting& s) { c.train.warmup_steps = to_int(s); }},
      {"train.grad_clip", [](RunConfig& c, const Setting& s) { c.train.grad_clip = to_double(s); }},
      {"train.seed",
       [](RunConfig& c, const Setting& s) {
         try {
           c.train.seed = std::stoull(s.value);
         } catch (const std::exception&) {
           throw ConfigError("train.seed: expected a non-negative integer, got '" + s.value + "'");
         }
       }},
      {"train.log_every", [](RunConfig& c, const Setting& s) { c.train.log_every = to_int(s); }},
      {"train.checkpoint_every",
       [](RunConfig& c, const Setting& s) { c.checkpoint_every = to_int(s); }},
  };
  return table;
}

}  // namespace

std::vector<std::string> preset_names() { return {"copy-small", "copy-big", "ltl", "prop"}; }

RunConfig preset(const std::string& name) {
  if (name == "copy-small") return copy_small();
  if (name == "copy-big") return copy_big();
  if (name == "ltl") return ltl();
  if (name == "prop") return prop();
  throw ConfigError("unknown preset '" + name + "'");
}

std::vector<Setting> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file " + path);
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(path + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  std::vector<Setting> out;
  for (const auto& [key, node] : tree) {
    if (node.empty()) {
      out.push_back({key, node.data()});
      continue;
    }
    for (const auto& [sub, leaf] : node) out.push_back({key + "." + sub, leaf.data()});
  }
  return out;
}

void apply_setting(RunConfig& c, const Setting& s) {
  auto it = setters().find(s.key);
  if (it == setters().end()) throw ConfigError("unknown config key '" + s.key + "'");
  it->second(c, s);
}

void apply_ablation(RunConfig& c, const std::string& what) {
  if (what == "f_bn") {
    c.embedding.flags.f_bn = false;
  } else if (what == "f_fn") {
    c.embedding.flags.f_fn = false;
    c.train.loss = nn::LossKind::CrossEntropy;
  } else if (what == "adacos") {
    c.train.loss = nn::LossKind::CrossEntropy;
  } else {
    throw ConfigError("unknown ablation '" + what + "' (expected f_bn, f_fn or adacos)");
  }
}

void validate(const RunConfig& c) {
  c.model.validate();
  if (c.aps < 1) throw ConfigError("data.aps must be positive");
  if (c.train.steps < 1) throw ConfigError("train.steps must be positive");
  if (c.train.batch_size < 1) throw ConfigError("train.batch_size must be positive");
  if (!(c.train.learning_rate > 0)) throw ConfigError("train.learning_rate must be positive");
  if (c.train.warmup_steps < 1) throw ConfigError("train.warmup_steps must be positive");
  if (c.train.log_every < 1) throw ConfigError("train.log_every must be positive");
  if (c.checkpoint_every < 0) throw ConfigError("train.checkpoint_every must be non-negative");
  if (c.embedding.kind == nn::EmbeddingKind::DualPart) {
    if (c.embedding.method.d_beta >= c.model.d_model) {
      throw ConfigError("embedding.d_beta must be smaller than model.d_model");
    }
    if (c.embedding.augmentation != nn::BaselineAugmentation::None || c.full_vocab_baseline) {
      throw ConfigError("embedding.baseline requires embedding.kind = baseline");
    }
  }
  if (c.train.loss == nn::LossKind::AdaCos && !c.embedding.flags.f_fn) {
    throw ConfigError("AdaCos needs feature normalization (embedding.f_fn)");
  }
}

RunConfig resolve(const std::optional<std::string>& preset_flag, const std::vector<Setting>& file,
                  const std::vector<Setting>& flags, const std::vector<std::string>& ablations) {
  std::string name = "copy-small";
  bool seed_given = false;
  for (const auto& s : file) {
    if (s.key == "preset") name = s.value;
    if (s.key == "train.seed") seed_given = true;
  }
  for (const auto& s : flags) seed_given = seed_given || s.key == "train.seed";
  if (preset_flag) name = *preset_flag;
  RunConfig c = preset(name);
  if (!seed_given) c.train.seed = resolve_seed(std::nullopt, c.train.seed);
  for (const auto& s : file) apply_setting(c, s);
  for (const auto& s : flags) apply_setting(c, s);
  for (const auto& a : ablations) apply_ablation(c, a);
  validate(c);
  return c;
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, std::uint64_t fallback) {
  if (flag) return *flag;
  if (const char* env = std::getenv("ALPHA_EMBED_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError(std::string("ALPHA_EMBED_SEED is not a non-negative integer: ") + env);
  }
  return fallback;
}

}  // namespace alphaembed::cli
