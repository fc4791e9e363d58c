#include "alphaembed/decode.hpp"

#include <algorithm>
#include <limits>

#include "alphaembed/errors.hpp"

namespace alphaembed {

void DecodeSpec::validate() const {
  if (beam_size < 1) throw ConfigError("beam size must be at least 1");
  if (max_length < 1) throw ConfigError("max output length must be at least 1");
}

double normalized_score(const Hypothesis& h) {
  const auto count = h.tokens.size() + (h.finished ? 1 : 0);
  return count == 0 ? h.log_prob : h.log_prob / static_cast<double>(count);
}

Hypothesis greedy_decode(const StepFunction& step, int max_length, TokenId end_token) {
  Hypothesis h;
  while (static_cast<int>(h.tokens.size()) < max_length) {
    const auto scores = step({h.tokens}).front();
    const auto best = std::max_element(scores.begin(), scores.end()) - scores.begin();
    h.log_prob += scores[static_cast<std::size_t>(best)];
    if (best == end_token) {
      h.finished = true;
      break;
    }
    h.tokens.push_back(static_cast<TokenId>(best));
  }
  return h;
}

Hypothesis beam_search(const StepFunction& step, int beam_size, int max_length,
                       TokenId end_token) {
  struct Candidate {
    double log_prob;
    std::size_t parent;
    TokenId token;
  };
  std::vector<Hypothesis> alive(1);
  std::vector<Hypothesis> finished;

  for (int t = 0; t < max_length && !alive.empty(); ++t) {
    std::vector<Sequence> prefixes;
    for (const auto& h : alive) prefixes.push_back(h.tokens);
    const auto scores = step(prefixes);

    std::vector<Candidate> candidates;
    for (std::size_t p = 0; p < alive.size(); ++p) {
      for (std::size_t tok = 0; tok < scores[p].size(); ++tok) {
        candidates.push_back({alive[p].log_prob + scores[p][tok], p, static_cast<TokenId>(tok)});
      }
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) { return a.log_prob > b.log_prob; });

    std::vector<Hypothesis> next;
    for (std::size_t rank = 0; rank < candidates.size(); ++rank) {
      const auto& c = candidates[rank];
      if (c.token == end_token) {
        // Only end tokens ranked inside the beam finish a hypothesis.
        if (rank < static_cast<std::size_t>(beam_size)) {
          finished.push_back({alive[c.parent].tokens, c.log_prob, true});
        }
      } else if (static_cast<int>(next.size()) < beam_size) {
        Hypothesis h{alive[c.parent].tokens, c.log_prob, false};
        h.tokens.push_back(c.token);
        next.push_back(std::move(h));
      }
      if (static_cast<int>(next.size()) == beam_size && rank + 1 >= static_cast<std::size_t>(beam_size)) {
        break;
      }
    }
    alive = std::move(next);
    if (static_cast<int>(finished.size()) >= beam_size) break;
  }

  const auto& pool = finished.empty() ? alive : finished;
  auto best = std::max_element(pool.begin(), pool.end(), [](const Hypothesis& a, const Hypothesis& b) {
    return normalized_score(a) < normalized_score(b);
  });
  return *best;
}

Hypothesis decode(const StepFunction& step, const DecodeSpec& spec, TokenId end_token) {
  spec.validate();
  if (spec.strategy == DecodeStrategy::Greedy) return greedy_decode(step, spec.max_length, end_token);
  return beam_search(step, spec.beam_size, spec.max_length, end_token);
}

}  // namespace alphaembed
