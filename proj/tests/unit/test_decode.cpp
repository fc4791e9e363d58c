#include <cmath>
#include <map>

#include "alphaembed/decode.hpp"
#include "alphaembed/errors.hpp"
#include "doctest.h"

using namespace alphaembed;

namespace {

constexpr TokenId E = 0, x = 1, y = 2;

// Tokens E, x, y. Greedy follows x then x; the better-normalized path is y E.
std::vector<float> fixture_probs(const Sequence& prefix) {
  if (prefix.empty()) return {0.1f, 0.5f, 0.4f};
  if (prefix == Sequence{x}) return {0.3f, 0.35f, 0.35f};
  if (prefix == Sequence{y}) return {0.9f, 0.05f, 0.05f};
  return {0.9f, 0.05f, 0.05f};
}

StepFunction from_probs(std::function<std::vector<float>(const Sequence&)> probs) {
  return [probs](const std::vector<Sequence>& prefixes) {
    std::vector<std::vector<float>> out;
    for (const auto& p : prefixes) {
      auto row = probs(p);
      for (auto& v : row) v = std::log(v);
      out.push_back(row);
    }
    return out;
  };
}

}  // namespace

TEST_CASE("beam search beats greedy on the fixture") {
  const auto step = from_probs(fixture_probs);
  const auto greedy = greedy_decode(step, 10, E);
  CHECK(greedy.tokens == Sequence{x, x});
  CHECK(greedy.finished);
  CHECK(greedy.log_prob == doctest::Approx(std::log(0.5 * 0.35 * 0.9)));

  const auto beam = beam_search(step, 3, 10, E);
  CHECK(beam.tokens == Sequence{y});
  CHECK(beam.finished);
  CHECK(normalized_score(beam) == doctest::Approx(std::log(0.4 * 0.9) / 2));

  const auto one = beam_search(step, 1, 10, E);
  CHECK(one.tokens == greedy.tokens);
}

TEST_CASE("beam of one matches greedy on random models") {
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 50; ++trial) {
    std::map<Sequence, std::vector<float>> table;
    auto probs = [&](const Sequence& prefix) {
      auto it = table.find(prefix);
      if (it != table.end()) return it->second;
      std::uniform_real_distribution<float> u(0.05f, 1.0f);
      std::vector<float> p(4);
      float total = 0;
      for (auto& v : p) total += (v = u(rng));
      for (auto& v : p) v /= total;
      return table[prefix] = p;
    };
    const auto step = from_probs(probs);
    const auto g = greedy_decode(step, 6, E);
    const auto b = beam_search(step, 1, 6, E);
    CHECK(g.tokens == b.tokens);
    CHECK(g.finished == b.finished);
  }
}

TEST_CASE("decode limits") {
  const auto never_end = from_probs([](const Sequence&) { return std::vector<float>{0.01f, 0.99f}; });
  const auto g = greedy_decode(never_end, 5, E);
  CHECK(g.tokens.size() == 5);
  CHECK_FALSE(g.finished);
  const auto b = beam_search(never_end, 2, 5, E);
  CHECK(b.finished);
  CHECK_THROWS_AS(decode(never_end, {DecodeStrategy::Beam, 0, 5}, E), ConfigError);
  CHECK_THROWS_AS(decode(never_end, {DecodeStrategy::Greedy, 1, 0}, E), ConfigError);
}
