#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "alphaembed/prop.hpp"
#include "alphaembed/vocab.hpp"

namespace alphaembed {

struct Sample {
  Sequence input;
  Sequence target;
  int ap_count = 0;  // distinct interchangeable tokens over input and target

  friend bool operator==(const Sample&, const Sample&) = default;
};

using Dataset = std::vector<Sample>;

enum class TaskKind { Copy, Prop, Ltl };

TaskKind task_from_string(const std::string& name);
std::string to_string(TaskKind task);
Vocabulary task_vocabulary(TaskKind task, int interchangeable_count);

int count_aps(const Vocabulary& v, const Sample& s);
Sample make_sample(const Vocabulary& v, Sequence input, Sequence target);

// Random strings over the first vocab_m interchangeable tokens with length
// uniform in [len_min, len_max]; the target is the input.
Dataset gen_copy_dataset(const Vocabulary& v, std::size_t count, int len_min, int len_max,
                         int vocab_m, Rng& rng);

// `per_cell` strings for every (unique count u, length l) with
// 3 <= u <= l <= max_len and u <= max_unique. Each string uses exactly the
// first u interchangeable tokens, each at least once.
Dataset gen_eval_grid_dataset(const Vocabulary& v, int max_len, int max_unique, int per_cell,
                              Rng& rng);

// Formula / minimal assignment pair; unsatisfiable draws are rejected.
Sample gen_prop_sample(const Vocabulary& v, int ap_count, int max_size, Rng& rng);

// Renames the APs of each sample so that their first appearances in the
// target (then the input) read a, b, c, ...
Sample perturb_sample(const Vocabulary& v, const Sample& s);
Dataset perturb_dataset(const Vocabulary& v, const Dataset& d);

// Applies a fresh random injection of each sample's APs into the first
// target_m interchangeable ids.
Dataset augment_alpha_rename(const Vocabulary& v, const Dataset& batch, int target_m, Rng& rng);

// Generation split into fixed-size shards whose engines are seeded from
// (seed, shard index), so the output does not depend on the worker count.
inline constexpr std::size_t kShardSize = 4096;
using ShardGenerator = std::function<Dataset(std::size_t count, Rng& rng)>;
Dataset generate_sharded(std::size_t count, std::uint64_t seed, int workers,
                         const ShardGenerator& generate);

// JSON lines with fields input, target, ap_count. Reading also accepts
// two-column tab-separated lines; blank lines are skipped.
void write_jsonl(std::ostream& out, const Dataset& d, const Vocabulary& v);
Dataset read_jsonl(std::istream& in, const Vocabulary& v);
void save_dataset(const std::string& path, const Dataset& d, const Vocabulary& v);
Dataset load_dataset(const std::string& path, const Vocabulary& v);

enum class CorpusFormat { Auto, Jsonl, Tsv };

// Formula / trace pairs, validated against the LTL and trace grammars.
// Throws ParseError carrying the offending line number.
Dataset ingest_ltl_corpus(const std::string& path, CorpusFormat format, const Vocabulary& v);
Dataset ingest_ltl_corpus(std::istream& in, CorpusFormat format, const Vocabulary& v);

}  // namespace alphaembed
