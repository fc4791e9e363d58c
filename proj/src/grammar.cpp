#include "alphaembed/grammar.hpp"

#include "alphaembed/errors.hpp"

namespace alphaembed {

int symbol_arity(std::string_view symbol) {
  if (symbol.size() != 1) return -1;
  switch (symbol[0]) {
    case '!': case 'X': case 'F': case 'G':
      return 1;
    case '&': case '|': case '^': case '=': case '>':
    case 'U': case 'W': case 'R':
      return 2;
    case '0': case '1':
      return 0;
    default:
      return -1;
  }
}

std::vector<int> arity_table(const Vocabulary& v) {
  std::vector<int> out(static_cast<std::size_t>(v.size()));
  for (TokenId id = 0; id < v.size(); ++id) {
    out[static_cast<std::size_t>(id)] = v.is_interchangeable(id) ? 0 : symbol_arity(v.token(id));
  }
  return out;
}

namespace {

int arity_of(TokenId t, std::span<const int> arities) {
  if (t < 0 || static_cast<std::size_t>(t) >= arities.size()) return -1;
  return arities[static_cast<std::size_t>(t)];
}

}  // namespace

std::size_t parse_prefix(std::span<const TokenId> tokens, std::span<const int> arities,
                         std::size_t begin) {
  // Count of operands still owed; iterative so deep formulas cannot
  // overflow the call stack.
  std::size_t pos = begin;
  long open = 1;
  while (open > 0) {
    if (pos >= tokens.size()) throw ParseError("prefix expression ends early");
    const int a = arity_of(tokens[pos], arities);
    if (a < 0) {
      throw ParseError("token at position " + std::to_string(pos) +
                       " cannot appear in a formula");
    }
    open += a - 1;
    ++pos;
  }
  return pos;
}

void check_prefix(std::span<const TokenId> tokens, std::span<const int> arities) {
  const auto end = parse_prefix(tokens, arities);
  if (end != tokens.size()) {
    throw ParseError("trailing tokens after position " + std::to_string(end));
  }
}

VectorSet tree_positions(std::span<const TokenId> tokens, std::span<const int> arities,
                         int max_depth) {
  std::size_t length = tokens.size();
  while (length > 0 && tokens[length - 1] == Vocabulary::kPad) --length;
  check_prefix(tokens.first(length), arities);

  VectorSet out(static_cast<int>(tokens.size()), 2 * max_depth);
  // Each frame is an open operator: the path to it and how many children
  // have been emitted so far.
  struct Frame {
    std::vector<int> path;
    int arity;
    int emitted;
  };
  std::vector<Frame> stack;
  for (std::size_t i = 0; i < length; ++i) {
    std::vector<int> path;
    if (!stack.empty()) {
      auto& parent = stack.back();
      path = parent.path;
      path.push_back(parent.emitted++);
    }
    if (static_cast<int>(path.size()) > max_depth) {
      throw DepthError("formula deeper than " + std::to_string(max_depth));
    }
    auto row = out.row(static_cast<int>(i));
    for (std::size_t k = 0; k < path.size(); ++k) {
      row[2 * k + static_cast<std::size_t>(path[k])] = 1.0f;
    }
    const int a = arities[static_cast<std::size_t>(tokens[i])];
    if (a > 0) stack.push_back({std::move(path), a, 0});
    while (!stack.empty() && stack.back().emitted == stack.back().arity) stack.pop_back();
  }
  return out;
}

}  // namespace alphaembed
