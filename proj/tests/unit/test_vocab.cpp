#include <algorithm>
#include <map>
#include <set>

#include "alphaembed/errors.hpp"
#include "alphaembed/vocab.hpp"
#include "doctest.h"
#include "stats.hpp"

using namespace alphaembed;

namespace {

// Fixed block used by the LTL examples: one-character operators and delimiters.
Vocabulary ltl_like(int m) {
  return Vocabulary({"!", "&", "|", "X", "U", "0", "1", ";", "{", "}"}, m);
}

Renaming swap_ab(const Vocabulary& v) {
  return Renaming(v.non_interchangeable_count(), {1, 0}, 2);
}

}  // namespace

TEST_CASE("vocabulary layout") {
  const auto v = ltl_like(2);
  CHECK(v.token(Vocabulary::kPad) == "<pad>");
  CHECK(v.token(Vocabulary::kStart) == "<s>");
  CHECK(v.token(Vocabulary::kEnd) == "</s>");
  CHECK(v.non_interchangeable_count() == 13);
  CHECK(v.interchangeable_count() == 2);
  CHECK(v.id("a") == 13);
  CHECK(v.id("b") == 14);
  CHECK(v.is_interchangeable(13));
  CHECK_FALSE(v.is_interchangeable(12));
  for (TokenId id = 0; id < v.size(); ++id) CHECK(v.id(v.token(id)) == id);
  CHECK_THROWS_AS(Vocabulary({"a"}, 1), ConfigError);
}

TEST_CASE("interchangeable names beyond the alphabet") {
  CHECK(Vocabulary::interchangeable_name(0) == "a");
  CHECK(Vocabulary::interchangeable_name(25) == "z");
  CHECK(Vocabulary::interchangeable_name(26) == "ap26");
  Vocabulary v({}, 30);
  const auto ids = v.encode("az<ap29>");
  REQUIRE(ids.size() == 3);
  CHECK(v.token(ids[2]) == "ap29");
  CHECK(v.decode(ids) == "az<ap29>");
  CHECK_THROWS_AS(v.encode("a<ap29"), ParseError);
  CHECK_THROWS_AS(v.encode("A"), ParseError);
}

TEST_CASE("apply_renaming examples") {
  const auto v = ltl_like(2);
  SUBCASE("formula &aXb with a<->b") {
    CHECK(v.decode(apply_renaming(v.encode("&aXb"), swap_ab(v))) == "&bXa");
  }
  SUBCASE("trace a;b;{1} with a<->b") {
    CHECK(v.decode(apply_renaming(v.encode("a;b;{1}"), swap_ab(v))) == "b;a;{1}");
  }
  SUBCASE("identity") {
    const auto seq = v.encode("&&abX&ba");
    CHECK(apply_renaming(seq, Renaming::identity(13, 2)) == seq);
  }
  SUBCASE("id outside the domain") {
    const Renaming partial(13, {0, Renaming::kUnmapped}, 2);
    CHECK_THROWS_AS(apply_renaming(v.encode("&ab"), partial), DomainError);
    CHECK_THROWS_AS(apply_renaming(Sequence{99}, swap_ab(v)), DomainError);
  }
}

TEST_CASE("invert_renaming examples") {
  const int n = 3;
  CHECK(invert_renaming(Renaming(n, {1, 0}, 2)) == Renaming(n, {1, 0}, 2));
  // a->c, b->a inverts to c->a, a->b (b unmapped).
  const Renaming r(n, {2, 0}, 3);
  const auto inv = invert_renaming(r);
  CHECK(inv.image() == std::vector<int>{1, Renaming::kUnmapped, 0});
  CHECK(invert_renaming(Renaming::identity(n, 4)) == Renaming::identity(n, 4));
  CHECK_THROWS_AS(Renaming(n, {1, 1}, 2), DomainError);
}

TEST_CASE("renaming round trip property") {
  Rng rng(7);
  const auto v = ltl_like(6);
  std::uniform_int_distribution<TokenId> any_token(0, v.size() - 1);
  for (int trial = 0; trial < 500; ++trial) {
    Sequence s(static_cast<std::size_t>(trial % 17));
    for (auto& t : s) t = any_token(rng);
    const auto r = sample_renaming(rng, v.non_interchangeable_count(), 6, 6);
    const auto renamed = apply_renaming(s, r);
    CHECK(apply_renaming(renamed, invert_renaming(r)) == s);
    REQUIRE(renamed.size() == s.size());
    std::multiset<TokenId> fixed_a, fixed_b;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!v.is_interchangeable(s[i])) {
        CHECK(renamed[i] == s[i]);
        fixed_a.insert(s[i]);
      }
      if (!v.is_interchangeable(renamed[i])) fixed_b.insert(renamed[i]);
    }
    CHECK(fixed_a == fixed_b);
  }
}

TEST_CASE("sample_renaming distribution") {
  Rng rng(11);
  SUBCASE("single token is always identity") {
    for (int i = 0; i < 100; ++i) CHECK(sample_renaming(rng, 3, 1, 1) == Renaming::identity(3, 1));
  }
  SUBCASE("two permutations with equal frequency") {
    std::map<std::vector<int>, std::uint64_t> counts;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) ++counts[sample_renaming(rng, 3, 2, 2).image()];
    REQUIRE(counts.size() == 2);
    std::vector<std::uint64_t> freq;
    for (auto& [image, c] : counts) {
      CHECK(static_cast<double>(c) / draws == doctest::Approx(0.5).epsilon(0.04));
      freq.push_back(c);
    }
    CHECK(testing::uniform_chi_square_p(freq) > 0.001);
  }
  SUBCASE("3 into 5 covers all 60 injections uniformly") {
    std::map<std::vector<int>, std::uint64_t> counts;
    for (int i = 0; i < 60000; ++i) ++counts[sample_renaming(rng, 3, 3, 5).image()];
    CHECK(counts.size() == 60);
    std::vector<std::uint64_t> freq;
    for (auto& kv : counts) freq.push_back(kv.second);
    CHECK(testing::uniform_chi_square_p(freq) > 0.001);
  }
  CHECK_THROWS_AS(sample_renaming(rng, 3, 4, 3), SizeError);
}

TEST_CASE("enumerate_renamings") {
  CHECK(enumerate_renamings(3, 3, 5).size() == 60);
  CHECK(enumerate_renamings(3, 5, 5).size() == 120);
  const auto single = enumerate_renamings(3, 1, 1);
  REQUIRE(single.size() == 1);
  CHECK(single[0] == Renaming::identity(3, 1));
  CHECK_THROWS_AS(enumerate_renamings(3, 4, 3), SizeError);

  for (int m = 1; m <= 6; ++m) {
    for (int k = 0; k <= m; ++k) {
      const auto all = enumerate_renamings(3, k, m);
      CHECK(all.size() == permutation_count(m, k));
      std::set<std::vector<int>> distinct;
      for (const auto& r : all) distinct.insert(r.image());
      CHECK(distinct.size() == all.size());
      CHECK(std::is_sorted(all.begin(), all.end(), [](const Renaming& a, const Renaming& b) {
        return a.image() < b.image();
      }));
    }
  }
}

TEST_CASE("extend_vocabulary") {
  const auto v = ltl_like(2);
  const auto w = extend_vocabulary(v, 4);
  CHECK(w.interchangeable_count() == 4);
  CHECK(w.token(w.interchangeable_id(2)) == "c");
  CHECK(w.token(w.interchangeable_id(3)) == "d");
  for (TokenId id = 0; id < v.size(); ++id) CHECK(w.token(id) == v.token(id));
  CHECK(extend_vocabulary(v, 2) == v);
  CHECK(extend_vocabulary(Vocabulary({}, 5), 30).interchangeable_count() == 30);
  CHECK_THROWS_AS(extend_vocabulary(v, 1), SizeError);
}

TEST_CASE("first-appearance order") {
  const auto v = ltl_like(4);
  const auto in = v.encode("&cd");
  const auto out = v.encode("d1a0");
  const auto order = interchangeable_in_order(v, {out, in});
  CHECK(v.decode(order) == "dac");
}
