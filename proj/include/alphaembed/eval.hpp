#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "alphaembed/prop.hpp"
#include "alphaembed/tasks.hpp"
#include "alphaembed/vocab.hpp"

namespace alphaembed {

// Levenshtein distance with unit costs at token granularity.
std::size_t edit_distance(std::span<const TokenId> a, std::span<const TokenId> b);

// True iff every completion of `a` over the APs of f satisfies f. Throws
// SizeError when more than kMaxPropAps APs are left unassigned.
bool prop_correct(const PropFormula& f, const Assignment& a);

// Order-insensitive equality of the (AP, bit) sets.
bool prop_exact_match(const Assignment& pred, const Assignment& truth);

struct PropScore {
  std::size_t total = 0;
  std::size_t correct = 0;
  std::size_t exact = 0;
  std::size_t malformed = 0;
  std::size_t truncated = 0;  // counted as incorrect
};

struct Prediction {
  Sequence tokens;
  bool truncated = false;
};

PropScore score_prop_predictions(const Vocabulary& v, const Dataset& d,
                                 std::span<const Prediction> predictions);

// Anything that maps a batch of inputs to output sequences.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual std::vector<Prediction> predict(const std::vector<Sequence>& inputs) = 0;
};

struct PredictionRecord {
  std::size_t sample_id = 0;
  std::size_t variant = 0;
  Renaming renaming;
  Sequence raw;
  Sequence unrenamed;
};

// Undoes `renaming` on a prediction. Interchangeable ids the inverse does not
// cover (tokens the model invented) map to -(id + 1) so they stay distinct
// from every real token.
Sequence undo_renaming(std::span<const TokenId> prediction, const Renaming& renaming);

// 1 - (|U| - 1) / (|P| - 1) with U the set of distinct un-renamed
// predictions. Throws ConfigError for fewer than two records.
double alpha_covariance(std::span<const PredictionRecord> records);

struct VariantSpec {
  bool all = true;
  std::size_t count = 0;  // for random variants

  static VariantSpec parse(const std::string& text);  // "all" | "random:K"
};

struct AlphaCovRow {
  int ap_count = 0;
  double mean = 0.0;
  std::size_t samples = 0;
};

// For each sample: build alpha-equivalent variants by renaming its APs into
// the first `target_m` interchangeable ids, predict, undo the renamings and
// score. Results are averaged per AP count. Samples with fewer than two
// possible variants are skipped.
std::vector<AlphaCovRow> run_alpha_cov_protocol(Predictor& model, const Vocabulary& v,
                                                const Dataset& d, int target_m,
                                                const VariantSpec& variants, Rng& rng,
                                                std::ostream* warnings = nullptr);

void write_alpha_cov_json(std::ostream& out, std::span<const AlphaCovRow> rows);

struct GridCell {
  double sum = 0.0;
  std::size_t count = 0;
  double mean() const { return count ? sum / static_cast<double>(count) : 0.0; }
};

// Keyed by (unique interchangeable count, sequence length).
struct EvalGrid {
  std::map<std::pair<int, int>, GridCell> cells;
  int train_unique_max = 0;
  int train_length_max = 0;

  std::optional<GridCell> at(int u, int l) const;
  // Pooled mean over the cells accepted by `select`.
  double mean_where(const std::function<bool(int u, int l)>& select) const;
};

struct GridEvalOptions {
  int rounds = 1;
  // Called before each round, e.g. to refreeze random embeddings.
  std::function<void(int round)> prepare_round;
  // Samples with more unique tokens than the model supports are scored as
  // an empty prediction.
  std::optional<int> max_supported_unique;
};

EvalGrid run_grid_eval(Predictor& model, const Dataset& grid, const GridEvalOptions& options);

// Header `u,l,mean,count`, rows ordered by (u, l).
void write_grid_csv(std::ostream& out, const EvalGrid& grid);

}  // namespace alphaembed
