#include "alphaembed/eval.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <set>

#include "alphaembed/errors.hpp"
#include "alphaembed/randvec.hpp"
#include "json.hpp"

namespace alphaembed {

std::size_t edit_distance(std::span<const TokenId> a, std::span<const TokenId> b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t substitute = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, substitute});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

bool prop_correct(const PropFormula& f, const Assignment& a) {
  const auto aps = formula_aps(f);
  int max_ap = -1;
  for (int ap : aps) max_ap = std::max(max_ap, ap);
  for (const auto& lit : a) max_ap = std::max(max_ap, lit.ap);

  std::vector<char> values(static_cast<std::size_t>(max_ap + 1));
  std::vector<bool> assigned(values.size());
  for (const auto& lit : a) {
    values[static_cast<std::size_t>(lit.ap)] = lit.value;
    assigned[static_cast<std::size_t>(lit.ap)] = true;
  }
  std::vector<int> free;
  for (int ap : aps) {
    if (!assigned[static_cast<std::size_t>(ap)]) free.push_back(ap);
  }
  if (free.size() > static_cast<std::size_t>(kMaxPropAps)) {
    throw SizeError(std::to_string(free.size()) + " unassigned APs exceed the budget");
  }
  for (std::size_t r = 0; r < (std::size_t{1} << free.size()); ++r) {
    for (std::size_t j = 0; j < free.size(); ++j) {
      values[static_cast<std::size_t>(free[j])] = (r >> j) & 1u;
    }
    if (!evaluate(f, values)) return false;
  }
  return true;
}

bool prop_exact_match(const Assignment& pred, const Assignment& truth) {
  const std::set<Literal> a(pred.begin(), pred.end());
  const std::set<Literal> b(truth.begin(), truth.end());
  return a == b && a.size() == pred.size() && b.size() == truth.size();
}

PropScore score_prop_predictions(const Vocabulary& v, const Dataset& d,
                                 std::span<const Prediction> predictions) {
  if (predictions.size() != d.size()) throw DataError("prediction count does not match dataset");
  PropScore score;
  for (std::size_t i = 0; i < d.size(); ++i) {
    ++score.total;
    if (predictions[i].truncated) {
      ++score.truncated;
      continue;
    }
    Assignment pred;
    try {
      pred = decode_assignment(predictions[i].tokens, v);
    } catch (const ParseError&) {
      ++score.malformed;
      continue;
    }
    const auto f = parse_prop(d[i].input, v);
    if (prop_exact_match(pred, decode_assignment(d[i].target, v))) {
      ++score.exact;
      ++score.correct;
    } else if (prop_correct(f, pred)) {
      ++score.correct;
    }
  }
  return score;
}

Sequence undo_renaming(std::span<const TokenId> prediction, const Renaming& renaming) {
  const auto inverse = invert_renaming(renaming);
  Sequence out;
  out.reserve(prediction.size());
  for (TokenId t : prediction) {
    if (t < inverse.first_interchangeable() || inverse.in_domain(t)) {
      out.push_back(inverse(t));
    } else {
      out.push_back(-(t + 1));
    }
  }
  return out;
}

double alpha_covariance(std::span<const PredictionRecord> records) {
  if (records.size() < 2) throw ConfigError("alpha-covariance needs at least two variants");
  std::set<Sequence> distinct;
  for (const auto& r : records) distinct.insert(r.unrenamed);
  return 1.0 - static_cast<double>(distinct.size() - 1) / static_cast<double>(records.size() - 1);
}

VariantSpec VariantSpec::parse(const std::string& text) {
  if (text == "all") return {true, 0};
  const std::string prefix = "random:";
  if (text.starts_with(prefix)) {
    try {
      const long k = std::stol(text.substr(prefix.size()));
      if (k >= 1) return {false, static_cast<std::size_t>(k)};
    } catch (const std::exception&) {
    }
  }
  throw ConfigError("variants must be 'all' or 'random:K' with K >= 1, got '" + text + "'");
}

namespace {

// Image tuples of the chosen injections of k APs into target_m slots.
std::vector<std::vector<int>> choose_images(int k, int target_m, const VariantSpec& spec,
                                            Rng& rng, std::ostream* warnings) {
  const std::uint64_t total = permutation_count(target_m, k);
  if (spec.all || spec.count >= total) {
    if (!spec.all && spec.count > total && warnings) {
      *warnings << "warning: " << spec.count << " variants requested but only " << total
                << " exist for " << k << " APs; using all\n";
    }
    std::vector<std::vector<int>> out;
    for (const auto& r : enumerate_renamings(0, k, target_m)) out.push_back(r.image());
    return out;
  }
  constexpr std::uint64_t kEnumerateLimit = 200000;
  std::vector<std::vector<int>> out;
  if (total <= kEnumerateLimit) {
    const auto all = enumerate_renamings(0, k, target_m);
    for (auto idx : reservoir_sample_unique(spec.count, total, rng)) {
      out.push_back(all[static_cast<std::size_t>(idx)].image());
    }
    return out;
  }
  std::set<std::vector<int>> seen;
  while (out.size() < spec.count) {
    auto image = sample_renaming(rng, 0, k, target_m).image();
    if (seen.insert(image).second) out.push_back(std::move(image));
  }
  return out;
}

}  // namespace

std::vector<AlphaCovRow> run_alpha_cov_protocol(Predictor& model, const Vocabulary& v,
                                                const Dataset& d, int target_m,
                                                const VariantSpec& variants, Rng& rng,
                                                std::ostream* warnings) {
  std::map<int, std::pair<double, std::size_t>> by_count;
  for (std::size_t id = 0; id < d.size(); ++id) {
    const auto& sample = d[id];
    auto aps = interchangeable_in_order(v, {sample.input, sample.target});
    std::sort(aps.begin(), aps.end());
    const int k = static_cast<int>(aps.size());
    if (k > target_m) throw SizeError("sample has more APs than the target vocabulary");
    if (permutation_count(target_m, k) < 2) continue;

    std::vector<PredictionRecord> records;
    std::vector<Sequence> inputs;
    for (const auto& image : choose_images(k, target_m, variants, rng, warnings)) {
      PredictionRecord rec;
      rec.sample_id = id;
      rec.variant = records.size();
      rec.renaming = renaming_from_pairs(v, aps, image, target_m);
      inputs.push_back(apply_renaming(sample.input, rec.renaming));
      records.push_back(std::move(rec));
    }
    const auto predictions = model.predict(inputs);
    for (std::size_t i = 0; i < records.size(); ++i) {
      records[i].raw = predictions[i].tokens;
      records[i].unrenamed = undo_renaming(records[i].raw, records[i].renaming);
    }
    auto& acc = by_count[sample.ap_count];
    acc.first += alpha_covariance(records);
    ++acc.second;
  }
  std::vector<AlphaCovRow> rows;
  for (const auto& [k, acc] : by_count) {
    rows.push_back({k, acc.first / static_cast<double>(acc.second), acc.second});
  }
  return rows;
}

void write_alpha_cov_json(std::ostream& out, std::span<const AlphaCovRow> rows) {
  auto array = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json row;
    row["ap_count"] = r.ap_count;
    row["mean"] = r.mean;
    row["samples"] = r.samples;
    array.push_back(row);
  }
  out << array.dump(2) << '\n';
}

std::optional<GridCell> EvalGrid::at(int u, int l) const {
  auto it = cells.find({u, l});
  if (it == cells.end()) return std::nullopt;
  return it->second;
}

double EvalGrid::mean_where(const std::function<bool(int, int)>& select) const {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& [key, cell] : cells) {
    if (!select(key.first, key.second)) continue;
    sum += cell.sum;
    count += cell.count;
  }
  return count ? sum / static_cast<double>(count) : 0.0;
}

EvalGrid run_grid_eval(Predictor& model, const Dataset& grid, const GridEvalOptions& options) {
  constexpr std::size_t kChunk = 256;
  EvalGrid out;
  for (int round = 0; round < std::max(1, options.rounds); ++round) {
    if (options.prepare_round) options.prepare_round(round);
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto& s = grid[i];
      const int u = s.ap_count;
      const int l = static_cast<int>(s.input.size());
      auto& cell = out.cells[{u, l}];
      if (options.max_supported_unique && u > *options.max_supported_unique) {
        cell.sum += static_cast<double>(s.target.size());
        ++cell.count;
      } else {
        pending.push_back(i);
      }
    }
    for (std::size_t start = 0; start < pending.size(); start += kChunk) {
      const std::size_t end = std::min(pending.size(), start + kChunk);
      std::vector<Sequence> inputs;
      for (std::size_t k = start; k < end; ++k) inputs.push_back(grid[pending[k]].input);
      const auto predictions = model.predict(inputs);
      for (std::size_t k = start; k < end; ++k) {
        const auto& s = grid[pending[k]];
        auto& cell = out.cells[{s.ap_count, static_cast<int>(s.input.size())}];
        cell.sum += static_cast<double>(edit_distance(predictions[k - start].tokens, s.target));
        ++cell.count;
      }
    }
  }
  // Rounds repeat the same samples; report per-sample means and counts.
  const int rounds = std::max(1, options.rounds);
  for (auto& [key, cell] : out.cells) {
    cell.sum /= rounds;
    cell.count /= static_cast<std::size_t>(rounds);
  }
  return out;
}

void write_grid_csv(std::ostream& out, const EvalGrid& grid) {
  out << "u,l,mean,count\n";
  const auto flags = out.flags();
  for (const auto& [key, cell] : grid.cells) {
    out << key.first << ',' << key.second << ',' << std::setprecision(10) << cell.mean() << ','
        << cell.count << '\n';
  }
  out.flags(flags);
}

}  // namespace alphaembed
