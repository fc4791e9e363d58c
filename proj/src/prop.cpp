#include "alphaembed/prop.hpp"

#include <algorithm>
#include <set>

#include "alphaembed/errors.hpp"

namespace alphaembed {

namespace {

int arity(PropOp op) {
  switch (op) {
    case PropOp::False: case PropOp::True: case PropOp::Ap: return 0;
    case PropOp::Not: return 1;
    default: return 2;
  }
}

char symbol(PropOp op) {
  switch (op) {
    case PropOp::False: return '0';
    case PropOp::True: return '1';
    case PropOp::Not: return '!';
    case PropOp::And: return '&';
    case PropOp::Or: return '|';
    case PropOp::Equiv: return '=';
    case PropOp::Xor: return '^';
    case PropOp::Ap: break;
  }
  return '?';
}

std::optional<PropOp> op_from_symbol(const std::string& s) {
  if (s.size() != 1) return std::nullopt;
  switch (s[0]) {
    case '0': return PropOp::False;
    case '1': return PropOp::True;
    case '!': return PropOp::Not;
    case '&': return PropOp::And;
    case '|': return PropOp::Or;
    case '=': return PropOp::Equiv;
    case '^': return PropOp::Xor;
    default: return std::nullopt;
  }
}

// Builds a tree of exactly `size` nodes in prefix order.
void grow(std::vector<PropNode>& out, int size, int ap_count, Rng& rng) {
  if (size == 1) {
    std::uniform_int_distribution<int> leaf(0, ap_count + 1);
    const int pick = leaf(rng);
    if (pick < ap_count) {
      out.push_back({PropOp::Ap, pick});
    } else {
      out.push_back({pick == ap_count ? PropOp::False : PropOp::True, -1});
    }
    return;
  }
  PropOp op = PropOp::Not;
  if (size >= 3) {
    static constexpr PropOp kOps[] = {PropOp::Not, PropOp::And, PropOp::Or,
                                      PropOp::Equiv, PropOp::Xor};
    std::discrete_distribution<int> pick({1.0, 1.0, 1.0, 0.5, 0.5});
    op = kOps[pick(rng)];
  }
  out.push_back({op, -1});
  if (op == PropOp::Not) {
    grow(out, size - 1, ap_count, rng);
    return;
  }
  std::uniform_int_distribution<int> split(1, size - 2);
  const int left = split(rng);
  grow(out, left, ap_count, rng);
  grow(out, size - 1 - left, ap_count, rng);
}

}  // namespace

Vocabulary prop_vocabulary(int ap_count) {
  return Vocabulary({"!", "&", "|", "=", "^", "0", "1"}, ap_count);
}

PropFormula parse_prop(std::span<const TokenId> tokens, const Vocabulary& v) {
  PropFormula f;
  long open = 1;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (open == 0) throw ParseError("trailing tokens after complete formula");
    const TokenId t = tokens[i];
    PropNode node;
    if (v.is_interchangeable(t)) {
      node = {PropOp::Ap, v.interchangeable_index(t)};
    } else {
      const auto op = v.contains(t) ? op_from_symbol(v.token(t)) : std::nullopt;
      if (!op) throw ParseError("token at position " + std::to_string(i) + " is not a formula symbol");
      node = {*op, -1};
    }
    open += arity(node.op) - 1;
    f.prefix.push_back(node);
  }
  if (open != 0) throw ParseError("formula ends early");
  return f;
}

Sequence prop_tokens(const PropFormula& f, const Vocabulary& v) {
  Sequence out;
  out.reserve(f.prefix.size());
  for (const auto& node : f.prefix) {
    if (node.op == PropOp::Ap) {
      out.push_back(v.interchangeable_id(node.ap));
    } else {
      out.push_back(v.id(std::string(1, symbol(node.op))));
    }
  }
  return out;
}

std::vector<int> formula_aps(const PropFormula& f) {
  std::set<int> aps;
  for (const auto& node : f.prefix) {
    if (node.op == PropOp::Ap) aps.insert(node.ap);
  }
  return {aps.begin(), aps.end()};
}

bool evaluate(const PropFormula& f, std::span<const char> values) {
  // Right-to-left stack evaluation of the prefix form.
  std::vector<bool> stack;
  stack.reserve(f.prefix.size());
  for (auto it = f.prefix.rbegin(); it != f.prefix.rend(); ++it) {
    switch (it->op) {
      case PropOp::False: stack.push_back(false); break;
      case PropOp::True: stack.push_back(true); break;
      case PropOp::Ap:
        if (it->ap < 0 || static_cast<std::size_t>(it->ap) >= values.size()) {
          throw DomainError("no value for AP " + std::to_string(it->ap));
        }
        stack.push_back(values[static_cast<std::size_t>(it->ap)]);
        break;
      case PropOp::Not: stack.back() = !stack.back(); break;
      default: {
        const bool lhs = stack.back();
        stack.pop_back();
        const bool rhs = stack.back();
        bool r = false;
        switch (it->op) {
          case PropOp::And: r = lhs && rhs; break;
          case PropOp::Or: r = lhs || rhs; break;
          case PropOp::Equiv: r = lhs == rhs; break;
          case PropOp::Xor: r = lhs != rhs; break;
          default: break;
        }
        stack.back() = r;
      }
    }
  }
  if (stack.size() != 1) throw ParseError("malformed formula");
  return stack.back();
}

std::vector<bool> truth_table(const PropFormula& f, std::span<const int> aps) {
  if (aps.size() > static_cast<std::size_t>(kMaxPropAps)) {
    throw SizeError("truth table over " + std::to_string(aps.size()) + " APs exceeds budget");
  }
  int max_ap = -1;
  for (const auto& node : f.prefix) max_ap = std::max(max_ap, node.ap);
  for (int ap : aps) max_ap = std::max(max_ap, ap);
  std::vector<char> values(static_cast<std::size_t>(max_ap + 1));
  const std::size_t rows = std::size_t{1} << aps.size();
  std::vector<bool> table(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < aps.size(); ++j) {
      values[static_cast<std::size_t>(aps[j])] = (r >> j) & 1u;
    }
    table[r] = evaluate(f, values);
  }
  return table;
}

std::optional<Assignment> solve_prop(const PropFormula& f) {
  const auto aps = formula_aps(f);
  const int k = static_cast<int>(aps.size());
  if (k > kMaxPropAps) {
    throw SizeError("formula has " + std::to_string(k) + " APs, budget is " +
                    std::to_string(kMaxPropAps));
  }
  const auto table = truth_table(f, aps);
  if (std::find(table.begin(), table.end(), true) == table.end()) return std::nullopt;

  const std::size_t rows = table.size();
  std::vector<int> chosen;
  for (int c = 0; c <= k; ++c) {
    // Combinations of c AP positions in lexicographic order.
    chosen.resize(static_cast<std::size_t>(c));
    for (int i = 0; i < c; ++i) chosen[static_cast<std::size_t>(i)] = i;
    for (;;) {
      std::size_t mask = 0;
      for (int p : chosen) mask |= std::size_t{1} << p;
      // Value patterns with the first AP as the most significant digit and
      // 1 ordered before 0.
      for (std::size_t pattern = (std::size_t{1} << c); pattern-- > 0;) {
        std::size_t wanted = 0;
        for (int i = 0; i < c; ++i) {
          if ((pattern >> (c - 1 - i)) & 1u) wanted |= std::size_t{1} << chosen[static_cast<std::size_t>(i)];
        }
        bool valid = true;
        for (std::size_t r = 0; r < rows && valid; ++r) {
          if ((r & mask) == wanted && !table[r]) valid = false;
        }
        if (valid) {
          Assignment a;
          for (int i = 0; i < c; ++i) {
            a.push_back({aps[static_cast<std::size_t>(chosen[static_cast<std::size_t>(i)])],
                         static_cast<bool>((pattern >> (c - 1 - i)) & 1u)});
          }
          return a;
        }
      }
      int i = c - 1;
      while (i >= 0 && chosen[static_cast<std::size_t>(i)] == k - c + i) --i;
      if (i < 0) break;
      ++chosen[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < c; ++j) {
        chosen[static_cast<std::size_t>(j)] = chosen[static_cast<std::size_t>(j - 1)] + 1;
      }
    }
  }
  return std::nullopt;  // unreachable for satisfiable formulas
}

PropFormula gen_prop_formula(int ap_count, int max_size, Rng& rng) {
  if (ap_count < 1 || max_size < 1) throw ConfigError("ap_count and max_size must be positive");
  std::uniform_int_distribution<int> size(1, max_size);
  PropFormula f;
  grow(f.prefix, size(rng), ap_count, rng);
  return f;
}

Sequence encode_assignment(const Assignment& a, const Vocabulary& v) {
  Sequence out;
  out.reserve(2 * a.size());
  const TokenId one = v.id("1");
  const TokenId zero = v.id("0");
  for (const auto& lit : a) {
    out.push_back(v.interchangeable_id(lit.ap));
    out.push_back(lit.value ? one : zero);
  }
  return out;
}

Assignment decode_assignment(std::span<const TokenId> tokens, const Vocabulary& v) {
  if (tokens.size() % 2 != 0) throw ParseError("assignment has odd token count");
  const TokenId one = v.id("1");
  const TokenId zero = v.id("0");
  Assignment a;
  std::set<int> seen;
  for (std::size_t i = 0; i < tokens.size(); i += 2) {
    if (!v.is_interchangeable(tokens[i])) {
      throw ParseError("expected an AP at position " + std::to_string(i));
    }
    const TokenId bit = tokens[i + 1];
    if (bit != one && bit != zero) {
      throw ParseError("expected 0 or 1 at position " + std::to_string(i + 1));
    }
    const int ap = v.interchangeable_index(tokens[i]);
    if (!seen.insert(ap).second) throw ParseError("AP assigned twice");
    a.push_back({ap, bit == one});
  }
  return a;
}

}  // namespace alphaembed
