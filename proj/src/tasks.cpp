#include "alphaembed/tasks.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include "alphaembed/errors.hpp"
#include "alphaembed/ltl.hpp"
#include "json.hpp"

namespace alphaembed {

TaskKind task_from_string(const std::string& name) {
  if (name == "copy") return TaskKind::Copy;
  if (name == "prop") return TaskKind::Prop;
  if (name == "ltl") return TaskKind::Ltl;
  throw ConfigError("unknown task '" + name + "' (expected copy, prop or ltl)");
}

std::string to_string(TaskKind task) {
  switch (task) {
    case TaskKind::Copy: return "copy";
    case TaskKind::Prop: return "prop";
    case TaskKind::Ltl: return "ltl";
  }
  return "unknown";
}

Vocabulary task_vocabulary(TaskKind task, int interchangeable_count) {
  switch (task) {
    case TaskKind::Copy: return Vocabulary({}, interchangeable_count);
    case TaskKind::Prop: return prop_vocabulary(interchangeable_count);
    case TaskKind::Ltl: return ltl_vocabulary(interchangeable_count);
  }
  throw ConfigError("unknown task");
}

int count_aps(const Vocabulary& v, const Sample& s) {
  return static_cast<int>(interchangeable_in_order(v, {s.input, s.target}).size());
}

Sample make_sample(const Vocabulary& v, Sequence input, Sequence target) {
  Sample s{std::move(input), std::move(target), 0};
  s.ap_count = count_aps(v, s);
  return s;
}

Dataset gen_copy_dataset(const Vocabulary& v, std::size_t count, int len_min, int len_max,
                         int vocab_m, Rng& rng) {
  if (len_min < 3 || len_max < len_min) {
    throw ConfigError("copy lengths must satisfy 3 <= min <= max");
  }
  if (vocab_m < 1 || vocab_m > v.interchangeable_count()) {
    throw ConfigError("copy vocabulary size must be in [1, " +
                      std::to_string(v.interchangeable_count()) + "]");
  }
  std::uniform_int_distribution<int> length(len_min, len_max);
  std::uniform_int_distribution<int> symbol(0, vocab_m - 1);
  Dataset out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Sequence s(static_cast<std::size_t>(length(rng)));
    for (auto& t : s) t = v.interchangeable_id(symbol(rng));
    out.push_back(make_sample(v, s, s));
  }
  return out;
}

Dataset gen_eval_grid_dataset(const Vocabulary& v, int max_len, int max_unique, int per_cell,
                              Rng& rng) {
  if (max_unique > max_len) throw ConfigError("max_unique cannot exceed max_len");
  if (max_unique > v.interchangeable_count()) {
    throw ConfigError("vocabulary has fewer than " + std::to_string(max_unique) +
                      " interchangeable tokens");
  }
  Dataset out;
  for (int u = 3; u <= max_unique; ++u) {
    std::uniform_int_distribution<int> symbol(0, u - 1);
    for (int l = u; l <= max_len; ++l) {
      for (int i = 0; i < per_cell; ++i) {
        Sequence s;
        s.reserve(static_cast<std::size_t>(l));
        for (int k = 0; k < u; ++k) s.push_back(v.interchangeable_id(k));
        for (int k = u; k < l; ++k) s.push_back(v.interchangeable_id(symbol(rng)));
        std::shuffle(s.begin(), s.end(), rng);
        out.push_back(make_sample(v, s, s));
      }
    }
  }
  return out;
}

Sample gen_prop_sample(const Vocabulary& v, int ap_count, int max_size, Rng& rng) {
  if (ap_count > v.interchangeable_count()) {
    throw ConfigError("vocabulary has fewer than " + std::to_string(ap_count) + " APs");
  }
  for (;;) {
    const auto f = gen_prop_formula(ap_count, max_size, rng);
    if (auto a = solve_prop(f)) {
      return make_sample(v, prop_tokens(f, v), encode_assignment(*a, v));
    }
  }
}

Sample perturb_sample(const Vocabulary& v, const Sample& s) {
  const auto order = interchangeable_in_order(v, {s.target, s.input});
  std::vector<int> image(order.size());
  std::iota(image.begin(), image.end(), 0);
  const auto r = renaming_from_pairs(v, order, image, v.interchangeable_count());
  return Sample{apply_renaming(s.input, r), apply_renaming(s.target, r), s.ap_count};
}

Dataset perturb_dataset(const Vocabulary& v, const Dataset& d) {
  Dataset out;
  out.reserve(d.size());
  for (const auto& s : d) out.push_back(perturb_sample(v, s));
  return out;
}

Dataset augment_alpha_rename(const Vocabulary& v, const Dataset& batch, int target_m, Rng& rng) {
  Dataset out;
  out.reserve(batch.size());
  for (const auto& s : batch) {
    const auto aps = interchangeable_in_order(v, {s.input, s.target});
    const auto k = static_cast<int>(aps.size());
    if (k > target_m) {
      throw SizeError("sample has " + std::to_string(k) + " APs but only " +
                      std::to_string(target_m) + " target tokens");
    }
    const auto draw = sample_renaming(rng, v.non_interchangeable_count(), k, target_m);
    const auto r = renaming_from_pairs(v, aps, draw.image(), target_m);
    out.push_back(Sample{apply_renaming(s.input, r), apply_renaming(s.target, r), s.ap_count});
  }
  return out;
}

Dataset generate_sharded(std::size_t count, std::uint64_t seed, int workers,
                         const ShardGenerator& generate) {
  const std::size_t shards = (count + kShardSize - 1) / kShardSize;
  std::vector<Dataset> parts(shards);
  auto run_shard = [&](std::size_t shard) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(shard), static_cast<std::uint32_t>(shard >> 32)};
    Rng rng(seq);
    const std::size_t n = std::min(kShardSize, count - shard * kShardSize);
    parts[shard] = generate(n, rng);
  };
  const auto threads = static_cast<std::size_t>(std::max(1, workers));
  if (threads == 1 || shards <= 1) {
    for (std::size_t s = 0; s < shards; ++s) run_shard(s);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t s = w; s < shards; s += threads) run_shard(s);
      });
    }
  }
  Dataset out;
  out.reserve(count);
  for (auto& p : parts) std::move(p.begin(), p.end(), std::back_inserter(out));
  return out;
}

void write_jsonl(std::ostream& out, const Dataset& d, const Vocabulary& v) {
  for (const auto& s : d) {
    nlohmann::ordered_json line;
    line["input"] = v.decode(s.input);
    line["target"] = v.decode(s.target);
    line["ap_count"] = s.ap_count;
    out << line.dump() << '\n';
  }
}

namespace {

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

std::pair<std::string, std::string> split_tab(const std::string& line, std::size_t lineno) {
  const auto tab = line.find('\t');
  if (tab == std::string::npos) throw ParseError("expected two tab-separated columns", lineno);
  auto second = line.substr(tab + 1);
  if (!second.empty() && second.back() == '\r') second.pop_back();
  return {line.substr(0, tab), second};
}

}  // namespace

Dataset read_jsonl(std::istream& in, const Vocabulary& v) {
  Dataset out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    try {
      Sample s;
      std::optional<int> declared;
      if (line.front() == '{') {
        const auto j = nlohmann::json::parse(line);
        s = make_sample(v, v.encode(j.at("input").get<std::string>()),
                        v.encode(j.at("target").get<std::string>()));
        if (j.contains("ap_count")) declared = j.at("ap_count").get<int>();
      } else {
        const auto [a, b] = split_tab(line, lineno);
        s = make_sample(v, v.encode(a), v.encode(b));
      }
      if (declared && *declared != s.ap_count) {
        throw ParseError("ap_count " + std::to_string(*declared) + " does not match tokens (" +
                         std::to_string(s.ap_count) + ")");
      }
      out.push_back(std::move(s));
    } catch (const ParseError& e) {
      if (e.line() != 0) throw;
      throw ParseError(e.what(), lineno);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(e.what(), lineno);
    } catch (const RangeError& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  return out;
}

void save_dataset(const std::string& path, const Dataset& d, const Vocabulary& v) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  write_jsonl(out, d, v);
  if (!out) throw DataError("write failed for " + path);
}

Dataset load_dataset(const std::string& path, const Vocabulary& v) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path);
  return read_jsonl(in, v);
}

Dataset ingest_ltl_corpus(std::istream& in, CorpusFormat format, const Vocabulary& v) {
  Dataset out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    try {
      std::string formula, trace;
      const bool as_json =
          format == CorpusFormat::Jsonl || (format == CorpusFormat::Auto && line.front() == '{');
      if (as_json) {
        const auto j = nlohmann::json::parse(line);
        formula = j.at("formula").get<std::string>();
        trace = j.at("trace").get<std::string>();
      } else {
        std::tie(formula, trace) = split_tab(line, lineno);
      }
      auto f = v.encode(formula);
      auto t = v.encode(trace);
      check_ltl_formula(f, v);
      parse_trace(t, v);
      out.push_back(make_sample(v, std::move(f), std::move(t)));
    } catch (const ParseError& e) {
      if (e.line() != 0) throw;
      throw ParseError(e.what(), lineno);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  return out;
}

Dataset ingest_ltl_corpus(const std::string& path, CorpusFormat format, const Vocabulary& v) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path);
  if (format == CorpusFormat::Auto) {
    if (path.ends_with(".jsonl") || path.ends_with(".json")) format = CorpusFormat::Jsonl;
    else if (path.ends_with(".tsv") || path.ends_with(".txt")) format = CorpusFormat::Tsv;
  }
  return ingest_ltl_corpus(in, format, v);
}

}  // namespace alphaembed
