#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "alphaembed/decode.hpp"
#include "alphaembed/errors.hpp"
#include "alphaembed/eval.hpp"
#include "alphaembed/nn/checkpoint.hpp"
#include "alphaembed/nn/model.hpp"
#include "alphaembed/nn/train.hpp"
#include "alphaembed/prop.hpp"
#include "alphaembed/randvec.hpp"
#include "alphaembed/tasks.hpp"
#include "run_config.hpp"

using namespace alphaembed;
namespace fs = std::filesystem;

namespace {

constexpr int kScanAps = 1024;  // vocabulary size used to read unknown datasets

struct Common {
  std::optional<std::uint64_t> seed;
  bool no_timestamp = false;
  int workers = 1;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--seed", c.seed, "Random seed (falls back to ALPHA_EMBED_SEED)");
  app->add_flag("--no-timestamp", c.no_timestamp, "Omit the timestamp header line in CSV outputs");
  app->add_option("--workers", c.workers, "Worker count")->check(CLI::PositiveNumber);
}

std::string timestamp_line() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << "# generated " << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ") << '\n';
  return out.str();
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  return out;
}

// Parses "A:B".
std::pair<int, int> parse_range(const std::string& text) {
  const auto colon = text.find(':');
  try {
    if (colon != std::string::npos) {
      return {std::stoi(text.substr(0, colon)), std::stoi(text.substr(colon + 1))};
    }
  } catch (const std::exception&) {
  }
  throw ConfigError("expected a range A:B, got '" + text + "'");
}

// Highest interchangeable index used plus one.
int aps_needed(const Vocabulary& v, const Dataset& d) {
  int top = 0;
  for (const auto& s : d) {
    for (const auto* seq : {&s.input, &s.target}) {
      for (TokenId t : *seq) {
        if (v.is_interchangeable(t)) top = std::max(top, v.interchangeable_index(t) + 1);
      }
    }
  }
  return top;
}

// Reads a dataset whose AP count is unknown. Token ids do not depend on the
// size of the interchangeable block, so the samples stay valid for any
// vocabulary over the same symbols with at least `needed` APs.
struct LoadedData {
  Dataset samples;
  int needed = 0;
};

LoadedData load_any(const std::string& path, const std::vector<std::string>& symbols) {
  if (!fs::exists(path)) throw DataError("dataset not found: " + path);
  const Vocabulary scan(symbols, kScanAps);
  LoadedData out;
  out.samples = load_dataset(path, scan);
  out.needed = aps_needed(scan, out.samples);
  return out;
}

void print_summary(std::ostream& out, const Dataset& d) {
  out << "samples: " << d.size() << '\n';
  if (d.empty()) return;
  auto stats = [&](const char* name, auto length) {
    std::size_t lo = SIZE_MAX, hi = 0;
    double sum = 0;
    for (const auto& s : d) {
      const std::size_t l = length(s);
      lo = std::min(lo, l);
      hi = std::max(hi, l);
      sum += static_cast<double>(l);
    }
    out << name << " length: min " << lo << " mean " << std::fixed << std::setprecision(2)
        << sum / static_cast<double>(d.size()) << " max " << hi << '\n';
    out.unsetf(std::ios::floatfield);
  };
  stats("input", [](const Sample& s) { return s.input.size(); });
  stats("target", [](const Sample& s) { return s.target.size(); });
  std::map<int, std::size_t> histogram;
  for (const auto& s : d) ++histogram[s.ap_count];
  out << "ap histogram:";
  for (const auto& [k, n] : histogram) out << ' ' << k << ':' << n;
  out << '\n';
}

DecodeSpec parse_decode(const std::string& text, int max_length) {
  DecodeSpec spec;
  spec.max_length = max_length;
  if (text == "greedy") {
    spec.strategy = DecodeStrategy::Greedy;
  } else if (text.starts_with("beam:")) {
    spec.strategy = DecodeStrategy::Beam;
    try {
      spec.beam_size = std::stoi(text.substr(5));
    } catch (const std::exception&) {
      throw ConfigError("bad beam size in '" + text + "'");
    }
  } else {
    throw ConfigError("--decode expects greedy or beam:K, got '" + text + "'");
  }
  spec.validate();
  return spec;
}

struct Selection {
  enum Kind { Single, Median, Average } kind = Single;
  int count = 1;
};

Selection parse_selection(const std::string& text) {
  auto number = [&](std::size_t from) {
    try {
      const int k = std::stoi(text.substr(from));
      if (k >= 1) return k;
    } catch (const std::exception&) {
    }
    throw ConfigError("bad embedding selection '" + text + "'");
  };
  if (text == "single") return {};
  if (text.starts_with("median")) return {Selection::Median, number(6)};
  if (text.starts_with("average:")) return {Selection::Average, number(8)};
  throw ConfigError("--embedding-selection expects single, medianK or average:R, got '" + text + "'");
}

// Common setup for commands that run a checkpoint on a dataset.
struct LoadedModel {
  nn::Seq2Seq model{nullptr};
  TaskKind task = TaskKind::Copy;
};

LoadedModel load_model(const std::string& path) {
  nlohmann::json extra;
  LoadedModel out;
  out.model = nn::load_checkpoint(path, &extra);
  if (extra.contains("task")) out.task = task_from_string(extra["task"].get<std::string>());
  return out;
}

// Grows a dual-part vocabulary to `m`; a fixed table keeps its size.
// Returns the largest AP count the model can embed.
int fit_vocabulary(nn::Seq2SeqImpl& model, int m) {
  if (model.dual_part()) {
    if (m > model.vocabulary().interchangeable_count()) model.extend_vocabulary(m);
  }
  return model.vocabulary().interchangeable_count();
}

std::string default_decode(TaskKind task) { return task == TaskKind::Copy ? "greedy" : "beam:3"; }

// ---------------------------------------------------------------- gen-data

struct GenDataArgs {
  Common common;
  std::string task = "copy";
  std::string out;
  std::string len = "5:10";
  int vocab = 5;
  std::size_t count = 1000;
  int aps = 5;
  int size = 35;
  int max_len = 30;
  std::optional<int> max_unique;
  int per_cell = 100;
  std::string corpus;
  std::string format = "auto";
};

int cmd_gen_data(const GenDataArgs& a) {
  const auto seed = cli::resolve_seed(a.common.seed, 1);
  Dataset d;
  Vocabulary v = task_vocabulary(TaskKind::Copy, 1);
  if (a.task == "copy") {
    const auto [lo, hi] = parse_range(a.len);
    v = task_vocabulary(TaskKind::Copy, a.vocab);
    Rng probe(seed);
    gen_copy_dataset(v, 0, lo, hi, a.vocab, probe);  // validates the flags
    d = generate_sharded(a.count, seed, a.common.workers, [&](std::size_t n, Rng& rng) {
      return gen_copy_dataset(v, n, lo, hi, a.vocab, rng);
    });
  } else if (a.task == "copy-grid") {
    const int unique = a.max_unique.value_or(a.max_len);
    if (a.per_cell < 1) throw ConfigError("--per-cell must be positive");
    v = task_vocabulary(TaskKind::Copy, unique);
    Rng rng(seed);
    d = gen_eval_grid_dataset(v, a.max_len, unique, a.per_cell, rng);
  } else if (a.task == "prop") {
    if (a.aps < 1 || a.aps > kMaxPropAps) {
      throw ConfigError("--aps must lie in [1, " + std::to_string(kMaxPropAps) + "]");
    }
    if (a.size < 1) throw ConfigError("--size must be positive");
    v = task_vocabulary(TaskKind::Prop, a.aps);
    d = generate_sharded(a.count, seed, a.common.workers, [&](std::size_t n, Rng& rng) {
      Dataset part;
      part.reserve(n);
      for (std::size_t i = 0; i < n; ++i) part.push_back(gen_prop_sample(v, a.aps, a.size, rng));
      return part;
    });
    for (std::size_t i = 0; i < d.size(); ++i) {
      const auto f = parse_prop(d[i].input, v);
      if (!prop_correct(f, decode_assignment(d[i].target, v))) {
        throw NumericError("generated label " + std::to_string(i) + " fails verification");
      }
    }
  } else if (a.task == "ltl") {
    if (a.corpus.empty()) throw ConfigError("--task ltl needs --corpus");
    const CorpusFormat format = a.format == "jsonl" ? CorpusFormat::Jsonl
                                : a.format == "tsv" ? CorpusFormat::Tsv
                                : a.format == "auto"
                                    ? CorpusFormat::Auto
                                    : throw ConfigError("--format expects auto, jsonl or tsv");
    if (!fs::exists(a.corpus)) throw DataError("corpus not found: " + a.corpus);
    const Vocabulary scan = task_vocabulary(TaskKind::Ltl, kScanAps);
    d = ingest_ltl_corpus(a.corpus, format, scan);
    v = task_vocabulary(TaskKind::Ltl, std::max(1, aps_needed(scan, d)));
  } else {
    throw ConfigError("unknown task '" + a.task + "' (expected copy, copy-grid, prop or ltl)");
  }
  save_dataset(a.out, d, v);
  print_summary(std::cout, d);
  return 0;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  Common common;
  std::string config;
  std::optional<std::string> preset;
  std::vector<std::string> ablate;
  std::optional<std::string> data, out, log, loss, embedding, baseline, method, task;
  std::optional<int> steps, batch_size, warmup, d_beta, aps, checkpoint_every;
  std::optional<double> lr;
};

std::vector<cli::Setting> flag_settings(const TrainArgs& a) {
  std::vector<cli::Setting> s;
  auto put = [&](const char* key, const auto& value) {
    if (!value) return;
    std::ostringstream text;
    text << std::setprecision(17) << *value;
    s.push_back({key, text.str()});
  };
  put("task", a.task);
  put("data.train", a.data);
  put("data.checkpoint", a.out);
  put("data.log", a.log);
  put("data.aps", a.aps);
  put("embedding.kind", a.embedding);
  put("embedding.baseline", a.baseline);
  put("embedding.method", a.method);
  put("embedding.d_beta", a.d_beta);
  put("train.loss", a.loss);
  put("train.steps", a.steps);
  put("train.batch_size", a.batch_size);
  put("train.warmup_steps", a.warmup);
  put("train.learning_rate", a.lr);
  put("train.checkpoint_every", a.checkpoint_every);
  put("train.seed", a.common.seed);
  return s;
}

std::string step_checkpoint_path(const std::string& path, int step) {
  fs::path p(path);
  const auto stem = p.stem().string();
  return (p.parent_path() / (stem + ".step" + std::to_string(step) + p.extension().string())).string();
}

void check_fits(nn::Seq2SeqImpl& model, const Dataset& d) {
  constexpr std::size_t kChunk = 1024;
  for (std::size_t start = 0; start < d.size(); start += kChunk) {
    std::vector<Sequence> in, out;
    for (std::size_t i = start; i < std::min(d.size(), start + kChunk); ++i) {
      in.push_back(d[i].input);
      out.push_back(d[i].target);
    }
    model.make_batch(in, &out);
  }
}

int cmd_train(const TrainArgs& a) {
  const auto file = a.config.empty() ? std::vector<cli::Setting>{} : cli::read_config_file(a.config);
  auto c = cli::resolve(a.preset, file, flag_settings(a), a.ablate);
  if (c.data_path.empty()) throw ConfigError("no training data (--data or data.train)");

  const auto base = task_vocabulary(c.task, 1);
  auto loaded = load_any(c.data_path, base.symbols());
  if (loaded.samples.empty()) throw DataError("dataset is empty: " + c.data_path);
  int m = c.aps;
  if (loaded.needed > m) {
    if (c.embedding.kind == nn::EmbeddingKind::Baseline) {
      throw ConfigError("dataset uses " + std::to_string(loaded.needed) +
                        " interchangeable tokens but data.aps is " + std::to_string(m));
    }
    m = loaded.needed;
  }
  const Vocabulary v = task_vocabulary(c.task, m);
  if (c.embedding.augmentation == nn::BaselineAugmentation::AlphaRenaming) {
    c.train.rename_target_m = m;
  }

  torch::manual_seed(c.train.seed);
  nn::Seq2Seq model(c.model, c.embedding, v);
  check_fits(*model, loaded.samples);

  nlohmann::json extra{{"task", to_string(c.task)}, {"preset", c.preset},
                       {"seed", c.train.seed}, {"steps", c.train.steps}};
  std::ofstream log;
  if (!c.log_path.empty()) {
    log = open_output(c.log_path);
    if (!a.common.no_timestamp) log << timestamp_line();
    nn::write_log_header(log);
  }
  auto on_checkpoint = [&](int step) {
    nn::save_checkpoint(step_checkpoint_path(c.checkpoint_path, step), *model, extra);
  };
  const auto records = nn::train(*model, loaded.samples, c.train, log.is_open() ? &log : nullptr,
                                 {}, on_checkpoint, c.checkpoint_every);
  nn::save_checkpoint(c.checkpoint_path, *model, extra);
  const auto& last = records.back();
  std::cout << "steps: " << last.step << "\nfinal loss: " << last.loss
            << "\noutput scale: " << model->output_scale << "\ncheckpoint: " << c.checkpoint_path
            << '\n';
  return 0;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  Common common;
  std::string checkpoint, data, out;
  bool grid = false;
  std::string selection = "single";
  std::optional<std::string> decode;
  std::optional<int> max_output;
  int vocab = 0;
};

int cmd_eval(const EvalArgs& a) {
  const auto seed = cli::resolve_seed(a.common.seed, 1);
  const auto selection = parse_selection(a.selection);
  auto loaded_model = load_model(a.checkpoint);
  auto& model = loaded_model.model;
  const TaskKind task = loaded_model.task;
  const auto decode = parse_decode(a.decode.value_or(default_decode(task)),
                                   a.max_output.value_or(model->config().max_target_length - 1));
  auto loaded = load_any(a.data, model->vocabulary().symbols());
  const int supported = fit_vocabulary(*model, std::max(a.vocab, loaded.needed));
  if (!a.grid && loaded.needed > supported) {
    throw ConfigError("dataset uses " + std::to_string(loaded.needed) +
                      " interchangeable tokens but the model embeds only " +
                      std::to_string(supported));
  }
  auto* dual = model->dual_part();
  if (selection.kind == Selection::Median && !dual) {
    throw ConfigError("median embedding selection needs a dual-part model");
  }
  torch::set_num_threads(a.common.workers);
  model->eval();

  const Dataset& d = loaded.samples;
  Rng rng(seed);
  int rounds = 1;
  std::function<void(int)> prepare = [&](int) { model->table().freeze_for_inference(rng); };
  if (selection.kind == Selection::Median) {
    // Scored on the samples the model can embed.
    Dataset scored;
    for (const auto& s : d) {
      if (s.ap_count <= supported) scored.push_back(s);
    }
    const double loss = nn::select_median_embedding(*dual, selection.count, rng, [&] {
      return nn::teacher_forced_loss(*model, scored);
    });
    std::cerr << "median embedding loss: " << loss << '\n';
    prepare = [](int) {};
  } else if (selection.kind == Selection::Average) {
    rounds = selection.count;
  }

  nn::ModelPredictor predictor(*model, decode);
  std::ostringstream report;
  if (a.grid) {
    GridEvalOptions options;
    options.rounds = rounds;
    options.prepare_round = prepare;
    if (!dual) options.max_supported_unique = supported;
    const auto grid = run_grid_eval(predictor, d, options);
    if (!a.common.no_timestamp) report << timestamp_line();
    write_grid_csv(report, grid);
  } else {
    nlohmann::ordered_json j;
    j["samples"] = d.size();
    double distance = 0, exact = 0;
    PropScore prop;
    for (int r = 0; r < rounds; ++r) {
      prepare(r);
      std::vector<Sequence> inputs;
      for (const auto& s : d) inputs.push_back(s.input);
      const auto predictions = predictor.predict(inputs);
      for (std::size_t i = 0; i < d.size(); ++i) {
        distance += static_cast<double>(edit_distance(predictions[i].tokens, d[i].target));
        exact += predictions[i].tokens == d[i].target ? 1 : 0;
      }
      if (task == TaskKind::Prop) {
        const auto s = score_prop_predictions(model->vocabulary(), d, predictions);
        prop.total += s.total;
        prop.correct += s.correct;
        prop.exact += s.exact;
        prop.malformed += s.malformed;
        prop.truncated += s.truncated;
      }
    }
    const double n = static_cast<double>(d.size()) * rounds;
    j["rounds"] = rounds;
    j["mean_edit_distance"] = n > 0 ? distance / n : 0.0;
    j["exact_match"] = n > 0 ? exact / n : 0.0;
    if (task == TaskKind::Prop) {
      const double total = static_cast<double>(std::max<std::size_t>(prop.total, 1));
      j["correct"] = static_cast<double>(prop.correct) / total;
      j["exact"] = static_cast<double>(prop.exact) / total;
      j["malformed"] = prop.malformed;
      j["truncated"] = prop.truncated;
    }
    report << j.dump(2) << '\n';
  }
  if (a.out.empty()) {
    std::cout << report.str();
  } else {
    open_output(a.out) << report.str();
  }
  return 0;
}

// ---------------------------------------------------------------- alphacov

struct AlphaCovArgs {
  Common common;
  std::string checkpoint, data, out;
  std::string variants = "all";
  std::optional<int> target_m;
  std::optional<std::string> decode;
  std::optional<int> max_output;
};

int cmd_alphacov(const AlphaCovArgs& a) {
  const auto seed = cli::resolve_seed(a.common.seed, 1);
  const auto variants = VariantSpec::parse(a.variants);
  auto loaded_model = load_model(a.checkpoint);
  auto& model = loaded_model.model;
  const auto decode = parse_decode(a.decode.value_or(default_decode(loaded_model.task)),
                                   a.max_output.value_or(model->config().max_target_length - 1));
  auto loaded = load_any(a.data, model->vocabulary().symbols());
  const int m = a.target_m.value_or(model->vocabulary().interchangeable_count());
  if (m < loaded.needed) {
    throw ConfigError("--target-m " + std::to_string(m) + " is smaller than the " +
                      std::to_string(loaded.needed) + " tokens the dataset uses");
  }
  if (fit_vocabulary(*model, m) < m) {
    throw ConfigError("the model embeds only " +
                      std::to_string(model->vocabulary().interchangeable_count()) +
                      " interchangeable tokens");
  }
  torch::set_num_threads(a.common.workers);
  model->eval();
  Rng rng(seed);
  model->table().freeze_for_inference(rng);
  nn::ModelPredictor predictor(*model, decode);
  const auto rows =
      run_alpha_cov_protocol(predictor, model->vocabulary(), loaded.samples, m, variants, rng, &std::cerr);
  std::ostringstream report;
  write_alpha_cov_json(report, rows);
  if (a.out.empty()) {
    std::cout << report.str();
  } else {
    open_output(a.out) << report.str();
  }
  return 0;
}

// ---------------------------------------------------------------- perturb

struct PerturbArgs {
  Common common;
  std::string data, out;
  std::string task = "copy";
};

int cmd_perturb(const PerturbArgs& a) {
  const auto task = task_from_string(a.task);
  auto loaded = load_any(a.data, task_vocabulary(task, 1).symbols());
  const Vocabulary v = task_vocabulary(task, std::max(1, loaded.needed));
  const auto d = perturb_dataset(v, loaded.samples);
  save_dataset(a.out, d, v);
  print_summary(std::cout, d);
  return 0;
}

// ---------------------------------------------------------------- bench-randvec

struct BenchArgs {
  Common common;
  std::string method = "hypercube";
  int d_beta = 16;
  std::vector<int> m{10, 100, 1000, 10000};
  int repeats = 5;
  std::string out;
};

int cmd_bench(const BenchArgs& a) {
  const auto seed = cli::resolve_seed(a.common.seed, 1);
  const RandMethod method(rand_kind_from_string(a.method), a.d_beta);
  if (a.repeats < 1) throw ConfigError("--repeats must be positive");
  if (method.discrete() && method.enforce_unique) {
    const auto size = sampling_set_size(method.kind, method.d_beta);
    for (int m : a.m) {
      if (m < 1 || static_cast<std::uint64_t>(m) > size) {
        throw ConfigError("m = " + std::to_string(m) + " outside [1, " + std::to_string(size) + "]");
      }
    }
  }
  Rng rng(seed);
  auto time_ms = [&](auto&& generate, int m) {
    const auto start = std::chrono::steady_clock::now();
    for (int r = 0; r < a.repeats; ++r) generate(method, m, rng);
    const std::chrono::duration<double, std::milli> spent = std::chrono::steady_clock::now() - start;
    return spent.count() / a.repeats;
  };
  std::ostringstream table;
  if (!a.common.no_timestamp) table << timestamp_line();
  table << "m,reservoir_ms,rejection_ms\n";
  for (int m : a.m) {
    table << m << ',' << time_ms(generate_betas, m) << ','
          << time_ms(generate_betas_by_rejection, m) << '\n';
  }
  std::cout << table.str();
  if (!a.out.empty()) open_output(a.out) << table.str();
  return 0;
}

int exit_code(const std::exception& e) {
  if (dynamic_cast<const NumericError*>(&e) || dynamic_cast<const NormalizationError*>(&e)) return 4;
  if (dynamic_cast<const DataError*>(&e) || dynamic_cast<const ParseError*>(&e) ||
      dynamic_cast<const LengthError*>(&e) || dynamic_cast<const DepthError*>(&e) ||
      dynamic_cast<const RangeError*>(&e) || dynamic_cast<const MaskError*>(&e)) {
    return 3;
  }
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ModeError*>(&e) ||
      dynamic_cast<const SizeError*>(&e) || dynamic_cast<const OverflowError*>(&e) ||
      dynamic_cast<const DomainError*>(&e)) {
    return 2;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interchangeable-token embeddings: data generation, training and evaluation"};
  app.require_subcommand(1);

  GenDataArgs gen;
  auto* g = app.add_subcommand("gen-data", "Generate or ingest a dataset as JSONL");
  add_common(g, gen.common);
  g->add_option("--task", gen.task, "copy, copy-grid, prop or ltl");
  g->add_option("--out", gen.out, "Output JSONL")->required();
  g->add_option("--len", gen.len, "Copy string length range A:B");
  g->add_option("--vocab", gen.vocab, "Copy alphabet size");
  g->add_option("--count", gen.count, "Number of samples");
  g->add_option("--aps", gen.aps, "Propositional variables");
  g->add_option("--size", gen.size, "Maximum formula size");
  g->add_option("--max-len", gen.max_len, "Grid: longest string");
  g->add_option("--max-unique", gen.max_unique, "Grid: most unique tokens (default --max-len)");
  g->add_option("--per-cell", gen.per_cell, "Grid: samples per cell");
  g->add_option("--corpus", gen.corpus, "LTL corpus file");
  g->add_option("--format", gen.format, "LTL corpus format: auto, jsonl or tsv");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train a model");
  add_common(t, tr.common);
  t->add_option("--config", tr.config, "INI config file");
  t->add_option("--preset", tr.preset, "copy-small, copy-big, ltl or prop");
  t->add_option("--ablate", tr.ablate, "Disable f_bn, f_fn or adacos (repeatable)");
  t->add_option("--task", tr.task, "copy, prop or ltl");
  t->add_option("--data", tr.data, "Training JSONL");
  t->add_option("--out", tr.out, "Checkpoint path");
  t->add_option("--log", tr.log, "Training log CSV");
  t->add_option("--aps", tr.aps, "Interchangeable tokens in the model vocabulary");
  t->add_option("--embedding", tr.embedding, "dual-part or baseline");
  t->add_option("--baseline", tr.baseline, "none, full-vocab, alpha-renaming or shuffle-aps");
  t->add_option("--method", tr.method, "normal, neighbor or hypercube");
  t->add_option("--d-beta", tr.d_beta, "Random part dimension");
  t->add_option("--loss", tr.loss, "adacos or cross-entropy");
  t->add_option("--steps", tr.steps, "Training steps");
  t->add_option("--batch-size", tr.batch_size, "Batch size");
  t->add_option("--lr", tr.lr, "Peak learning rate");
  t->add_option("--warmup", tr.warmup, "Warmup steps");
  t->add_option("--checkpoint-every", tr.checkpoint_every, "Intermediate checkpoint interval");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Evaluate a checkpoint");
  add_common(e, ev.common);
  e->add_option("--checkpoint", ev.checkpoint, "Checkpoint")->required();
  e->add_option("--data", ev.data, "Evaluation JSONL")->required();
  e->add_option("--out", ev.out, "Report path (stdout when omitted)");
  e->add_flag("--grid", ev.grid, "Write the (unique tokens, length) grid CSV");
  e->add_option("--embedding-selection", ev.selection, "single, medianK or average:R");
  e->add_option("--decode", ev.decode, "greedy or beam:K");
  e->add_option("--max-output", ev.max_output, "Longest generated sequence");
  e->add_option("--vocab", ev.vocab, "Interchangeable tokens to provide at inference");

  AlphaCovArgs ac;
  auto* c = app.add_subcommand("alphacov", "Alpha-covariance report");
  add_common(c, ac.common);
  c->add_option("--checkpoint", ac.checkpoint, "Checkpoint")->required();
  c->add_option("--data", ac.data, "Evaluation JSONL")->required();
  c->add_option("--out", ac.out, "JSON report (stdout when omitted)");
  c->add_option("--variants", ac.variants, "all or random:K");
  c->add_option("--target-m", ac.target_m, "Interchangeable tokens renamed into");
  c->add_option("--decode", ac.decode, "greedy or beam:K");
  c->add_option("--max-output", ac.max_output, "Longest generated sequence");

  PerturbArgs pe;
  auto* p = app.add_subcommand("perturb", "Rename APs into canonical first-occurrence order");
  add_common(p, pe.common);
  p->add_option("--data", pe.data, "Input JSONL")->required();
  p->add_option("--out", pe.out, "Output JSONL")->required();
  p->add_option("--task", pe.task, "copy, prop or ltl");

  BenchArgs be;
  auto* b = app.add_subcommand("bench-randvec", "Time reservoir vs rejection sampling of betas");
  add_common(b, be.common);
  b->add_option("--method", be.method, "normal, neighbor or hypercube");
  b->add_option("--d-beta", be.d_beta, "Vector dimension");
  b->add_option("--m", be.m, "Vector counts")->delimiter(',');
  b->add_option("--repeats", be.repeats, "Repetitions per point");
  b->add_option("--out", be.out, "Also write the CSV here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForAllHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return 2;
  }

  try {
    if (g->parsed()) return cmd_gen_data(gen);
    if (t->parsed()) return cmd_train(tr);
    if (e->parsed()) return cmd_eval(ev);
    if (c->parsed()) return cmd_alphacov(ac);
    if (p->parsed()) return cmd_perturb(pe);
    if (b->parsed()) return cmd_bench(be);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return exit_code(err);
  }
  return 1;
}
