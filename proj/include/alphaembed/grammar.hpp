#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "alphaembed/randvec.hpp"
#include "alphaembed/vocab.hpp"

namespace alphaembed {

// Arity of a prefix-notation symbol: 1 for ! X F G, 2 for & | ^ = > U W R,
// 0 for constants and atomic propositions, -1 for anything that may not
// appear inside a formula (delimiters, specials).
int symbol_arity(std::string_view symbol);

// Per-token arity for a whole vocabulary; interchangeable tokens are leaves.
std::vector<int> arity_table(const Vocabulary& v);

// Parses one complete prefix expression starting at `begin` and returns the
// index one past its last token. Throws ParseError on malformed input.
std::size_t parse_prefix(std::span<const TokenId> tokens, std::span<const int> arities,
                         std::size_t begin = 0);

// Throws ParseError unless `tokens` is exactly one complete expression.
void check_prefix(std::span<const TokenId> tokens, std::span<const int> arities);

inline constexpr int kMaxTreeDepth = 32;

// Root-to-node branch paths as one-hot pairs: for the k-th step below the
// root with child index c, column 2k + c is 1. Trailing padding tokens get
// all-zero rows. Throws ParseError for malformed input and DepthError when
// a node lies deeper than max_depth.
VectorSet tree_positions(std::span<const TokenId> tokens, std::span<const int> arities,
                         int max_depth = kMaxTreeDepth);

}  // namespace alphaembed
