#include "alphaembed/ltl.hpp"

#include "alphaembed/errors.hpp"
#include "alphaembed/grammar.hpp"

namespace alphaembed {

namespace {

// Steps only allow propositional connectives.
std::vector<int> step_arities(const Vocabulary& v) {
  auto arities = arity_table(v);
  for (TokenId id = 0; id < v.size(); ++id) {
    if (v.is_interchangeable(id)) continue;
    const auto& s = v.token(id);
    if (s != "!" && s != "&" && s != "|" && s != "0" && s != "1") {
      arities[static_cast<std::size_t>(id)] = -1;
    }
  }
  return arities;
}

}  // namespace

Vocabulary ltl_vocabulary(int ap_count) {
  return Vocabulary({"!", "&", "|", "^", "=", ">", "X", "U", "F", "G", "W", "R",
                     "0", "1", ";", "{", "}"},
                    ap_count);
}

void check_ltl_formula(std::span<const TokenId> tokens, const Vocabulary& v) {
  check_prefix(tokens, arity_table(v));
}

LassoTrace parse_trace(std::span<const TokenId> tokens, const Vocabulary& v) {
  const auto arities = step_arities(v);
  const TokenId semi = v.id(";");
  const TokenId open = v.id("{");
  const TokenId close = v.id("}");

  LassoTrace trace;
  std::size_t pos = 0;
  auto read_step = [&](std::vector<Sequence>& into) {
    const auto end = parse_prefix(tokens, arities, pos);
    into.emplace_back(tokens.begin() + static_cast<std::ptrdiff_t>(pos),
                      tokens.begin() + static_cast<std::ptrdiff_t>(end));
    pos = end;
  };

  while (pos < tokens.size() && tokens[pos] != open) {
    read_step(trace.prefix);
    if (pos >= tokens.size() || tokens[pos] != semi) {
      throw ParseError("expected ';' after trace step " + std::to_string(trace.prefix.size()));
    }
    ++pos;
  }
  if (pos >= tokens.size()) throw ParseError("trace has no '{' period");
  ++pos;
  for (;;) {
    read_step(trace.period);
    if (pos >= tokens.size()) throw ParseError("trace period is missing '}'");
    if (tokens[pos] == close) break;
    if (tokens[pos] != semi) throw ParseError("expected ';' or '}' in trace period");
    ++pos;
  }
  ++pos;
  if (pos != tokens.size()) throw ParseError("tokens after the closing '}'");
  return trace;
}

}  // namespace alphaembed
