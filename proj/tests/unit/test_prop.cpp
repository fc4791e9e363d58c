#include <map>

#include "alphaembed/errors.hpp"
#include "alphaembed/eval.hpp"
#include "alphaembed/prop.hpp"
#include "doctest.h"
#include "prop_oracle.hpp"

using namespace alphaembed;

namespace {

const Vocabulary& vocab() {
  static const Vocabulary v = prop_vocabulary(10);
  return v;
}

PropFormula F(const char* text) { return parse_prop(vocab().encode(text), vocab()); }

Assignment A(const char* text) { return decode_assignment(vocab().encode(text), vocab()); }

}  // namespace

TEST_CASE("parse and serialize") {
  const auto f = F("&a!|b1");
  CHECK(f.prefix.size() == 6);
  CHECK(vocab().decode(prop_tokens(f, vocab())) == "&a!|b1");
  CHECK(formula_aps(f) == std::vector<int>{0, 1});
  CHECK_THROWS_AS(F("&a"), ParseError);
  CHECK_THROWS_AS(F("ab"), ParseError);
  CHECK_THROWS_AS(F(""), ParseError);
}

TEST_CASE("evaluate agrees with the recursive oracle") {
  Rng rng(17);
  for (int i = 0; i < 2000; ++i) {
    const auto f = gen_prop_formula(4, 25, rng);
    const std::vector<int> aps{0, 1, 2, 3};
    const auto table = truth_table(f, aps);
    for (unsigned r = 0; r < 16; ++r) {
      std::map<int, bool> values;
      for (int j = 0; j < 4; ++j) values[j] = (r >> j) & 1u;
      CHECK(table[r] == testing::eval_recursive(f, values));
    }
  }
}

TEST_CASE("solve_prop examples") {
  CHECK(*solve_prop(F("&ab")) == A("a1b1"));
  CHECK(*solve_prop(F("|ab")) == A("a1"));
  CHECK(solve_prop(F("|a!a"))->empty());
  CHECK_FALSE(solve_prop(F("&a!a")).has_value());
  CHECK(*solve_prop(F("!a")) == A("a0"));
  CHECK(*solve_prop(F("^ab")) == A("a1b0"));
}

TEST_CASE("solve_prop is minimal with the documented tie-break") {
  Rng rng(23);
  for (int i = 0; i < 400; ++i) {
    const auto f = gen_prop_formula(4, 15, rng);
    const auto aps = formula_aps(f);
    const auto solved = solve_prop(f);

    // Oracle: scan every partial assignment in (size, AP set, value) order.
    std::optional<Assignment> best;
    for (const auto& a : testing::all_partial_assignments(aps)) {
      if (!testing::truth_table_correct(f, aps, a)) continue;
      auto key = [](const Assignment& x) {
        std::vector<int> set;
        std::vector<int> vals;
        for (const auto& l : x) {
          set.push_back(l.ap);
          vals.push_back(l.value ? 0 : 1);
        }
        return std::make_tuple(x.size(), set, vals);
      };
      if (!best || key(a) < key(*best)) best = a;
    }
    REQUIRE(solved.has_value() == best.has_value());
    if (solved) {
      CHECK(*solved == *best);
      CHECK(prop_correct(f, *solved));
    }
  }
}

TEST_CASE("generator shape") {
  Rng rng(29);
  SUBCASE("single leaf") {
    for (int i = 0; i < 50; ++i) CHECK(gen_prop_formula(5, 1, rng).prefix.size() == 1);
  }
  SUBCASE("size bound and round trip") {
    for (int i = 0; i < 1000; ++i) {
      const auto f = gen_prop_formula(5, 35, rng);
      CHECK(f.prefix.size() <= 35);
      CHECK(parse_prop(prop_tokens(f, vocab()), vocab()) == f);
    }
  }
  SUBCASE("top operator weights") {
    std::map<PropOp, int> top;
    for (int i = 0; i < 100000; ++i) ++top[gen_prop_formula(5, 35, rng).prefix.front().op];
    const double ratio = static_cast<double>(top[PropOp::Equiv]) / top[PropOp::And];
    CHECK(ratio == doctest::Approx(0.5).epsilon(0.2));
    const double xor_ratio = static_cast<double>(top[PropOp::Xor]) / top[PropOp::Or];
    CHECK(xor_ratio == doctest::Approx(0.5).epsilon(0.2));
    CHECK(static_cast<double>(top[PropOp::Not]) / top[PropOp::And] == doctest::Approx(1.0).epsilon(0.1));
  }
}

TEST_CASE("assignment encoding") {
  const auto& v = vocab();
  CHECK(v.decode(encode_assignment({{0, true}, {1, false}}, v)) == "a1b0");
  CHECK(A("").empty());
  CHECK_THROWS_AS(A("a1a0"), ParseError);
  CHECK_THROWS_AS(A("a1b"), ParseError);
  CHECK_THROWS_AS(A("1a"), ParseError);
  CHECK_THROWS_AS(A("ab"), ParseError);
  Rng rng(31);
  for (int i = 0; i < 200; ++i) {
    const auto f = gen_prop_formula(6, 20, rng);
    if (auto a = solve_prop(f)) CHECK(decode_assignment(encode_assignment(*a, v), v) == *a);
  }
}

TEST_CASE("prop_correct and exact match") {
  CHECK(prop_correct(F("|ab"), A("a1")));
  CHECK_FALSE(prop_correct(F("&ab"), A("a1")));
  CHECK(prop_correct(F("|a!a"), A("")));
  CHECK(prop_exact_match(A("a1b0"), A("b0a1")));
  CHECK_FALSE(prop_exact_match(A("a1"), A("a0")));
  CHECK_FALSE(prop_exact_match(A("a1b0"), A("a1")));

  Rng rng(37);
  for (int i = 0; i < 500; ++i) {
    const auto f = gen_prop_formula(4, 20, rng);
    const std::vector<int> aps{0, 1, 2, 3};
    for (const auto& a : testing::all_partial_assignments({0, 2})) {
      CHECK(prop_correct(f, a) == testing::truth_table_correct(f, aps, a));
    }
  }
}
