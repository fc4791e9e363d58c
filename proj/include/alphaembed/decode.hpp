#pragma once

#include <functional>
#include <vector>

#include "alphaembed/vocab.hpp"

namespace alphaembed {

enum class DecodeStrategy { Greedy, Beam };

struct DecodeSpec {
  DecodeStrategy strategy = DecodeStrategy::Greedy;
  int beam_size = 1;
  int max_length = 64;

  // Throws ConfigError for beam_size < 1 or max_length < 1.
  void validate() const;
};

struct Hypothesis {
  Sequence tokens;      // generated tokens, end token excluded
  double log_prob = 0;  // cumulative, end token included when finished
  bool finished = false;
};

// Log-probabilities over the vocabulary for the next token of every prefix.
// Prefixes hold generated tokens only (no start token).
using StepFunction =
    std::function<std::vector<std::vector<float>>(const std::vector<Sequence>& prefixes)>;

// Argmax chain until the end token or max_length tokens.
Hypothesis greedy_decode(const StepFunction& step, int max_length,
                         TokenId end_token = Vocabulary::kEnd);

// Beam search ranking hypotheses by cumulative log-probability divided by
// their token count (end token included). Returns the best finished
// hypothesis, or the best unfinished one when none finished in time.
Hypothesis beam_search(const StepFunction& step, int beam_size, int max_length,
                       TokenId end_token = Vocabulary::kEnd);

Hypothesis decode(const StepFunction& step, const DecodeSpec& spec,
                  TokenId end_token = Vocabulary::kEnd);

double normalized_score(const Hypothesis& h);

}  // namespace alphaembed
