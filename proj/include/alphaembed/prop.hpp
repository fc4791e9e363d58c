#pragma once

#include <optional>
#include <span>
#include <vector>

#include "alphaembed/vocab.hpp"

namespace alphaembed {

// Propositional formulas in prefix form over
//   ! (not), & (and), | (or), = (equivalence), ^ (exclusive or), 0, 1, APs.
enum class PropOp { False, True, Ap, Not, And, Or, Equiv, Xor };

struct PropNode {
  PropOp op = PropOp::False;
  int ap = -1;  // interchangeable index, only for PropOp::Ap

  friend bool operator==(const PropNode&, const PropNode&) = default;
};

struct PropFormula {
  std::vector<PropNode> prefix;

  friend bool operator==(const PropFormula&, const PropFormula&) = default;
};

struct Literal {
  int ap = 0;
  bool value = false;

  friend bool operator==(const Literal&, const Literal&) = default;
  friend auto operator<=>(const Literal&, const Literal&) = default;
};

// Ordered list of (AP, bit) pairs; may be partial.
using Assignment = std::vector<Literal>;

inline constexpr int kMaxPropAps = 20;

Vocabulary prop_vocabulary(int ap_count);

PropFormula parse_prop(std::span<const TokenId> tokens, const Vocabulary& v);
Sequence prop_tokens(const PropFormula& f, const Vocabulary& v);

// Distinct AP indices occurring in f, ascending.
std::vector<int> formula_aps(const PropFormula& f);

// `values[i]` is the truth value of AP i.
bool evaluate(const PropFormula& f, std::span<const char> values);

// Bit r of the result is f under the assignment aps[j] = bit j of r.
std::vector<bool> truth_table(const PropFormula& f, std::span<const int> aps);

// Operator weights: ! & | 1 each, = ^ 0.5 each. The node count is drawn
// uniformly from [1, max_size]; leaves are uniform over the APs and 0/1.
PropFormula gen_prop_formula(int ap_count, int max_size, Rng& rng);

// Smallest partial assignment all of whose completions satisfy f; ties go to
// the lexicographically first AP set, then to 1 before 0. nullopt when f is
// unsatisfiable. Throws SizeError for more than kMaxPropAps APs.
std::optional<Assignment> solve_prop(const PropFormula& f);

// Alternating AP / bit tokens, e.g. a1b0.
Sequence encode_assignment(const Assignment& a, const Vocabulary& v);
// Throws ParseError on malformed input or a repeated AP.
Assignment decode_assignment(std::span<const TokenId> tokens, const Vocabulary& v);

}  // namespace alphaembed
