#pragma once

#include <span>
#include <vector>

#include "alphaembed/vocab.hpp"

namespace alphaembed {

// Formula symbols plus the trace delimiters `;`, `{`, `}`.
Vocabulary ltl_vocabulary(int ap_count);

// Symbolic lasso trace u v^omega; each step is a propositional formula.
struct LassoTrace {
  std::vector<Sequence> prefix;
  std::vector<Sequence> period;
};

// Grammar: (step ';')* '{' step (';' step)* '}', where a step is a prefix
// formula over ! & | 0 1 and APs. Throws ParseError.
LassoTrace parse_trace(std::span<const TokenId> tokens, const Vocabulary& v);

// Throws ParseError unless `tokens` is one complete LTL prefix formula.
void check_ltl_formula(std::span<const TokenId> tokens, const Vocabulary& v);

}  // namespace alphaembed
