#include <map>
#include <set>
#include <sstream>

#include "alphaembed/errors.hpp"
#include "alphaembed/grammar.hpp"
#include "alphaembed/ltl.hpp"
#include "alphaembed/tasks.hpp"
#include "doctest.h"
#include "stats.hpp"

using namespace alphaembed;

TEST_CASE("tree positions") {
  const auto v = ltl_vocabulary(5);
  const auto arities = arity_table(v);
  SUBCASE("&ab") {
    const auto p = tree_positions(v.encode("&ab"), arities);
    CHECK(p.cols == 2 * kMaxTreeDepth);
    for (float x : p.row(0)) CHECK(x == 0.0f);
    CHECK(p.row(1)[0] == 1.0f);
    CHECK(p.row(1)[1] == 0.0f);
    CHECK(p.row(2)[0] == 0.0f);
    CHECK(p.row(2)[1] == 1.0f);
    for (int c = 2; c < p.cols; ++c) {
      CHECK(p.row(1)[static_cast<std::size_t>(c)] == 0.0f);
      CHECK(p.row(2)[static_cast<std::size_t>(c)] == 0.0f);
    }
  }
  SUBCASE("&&abX&cd depths") {
    const auto tokens = v.encode("&&abX&cd");
    const auto p = tree_positions(tokens, arities);
    // Hand-parsed paths: & [] & [0] a [0,0] b [0,1] X [1] & [1,0] c [1,0,0] d [1,0,1]
    const std::vector<std::vector<int>> paths{{}, {0}, {0, 0}, {0, 1}, {1}, {1, 0}, {1, 0, 0}, {1, 0, 1}};
    for (int i = 0; i < p.rows; ++i) {
      std::vector<float> expected(static_cast<std::size_t>(p.cols));
      const auto& path = paths[static_cast<std::size_t>(i)];
      for (std::size_t k = 0; k < path.size(); ++k) expected[2 * k + static_cast<std::size_t>(path[k])] = 1.0f;
      CHECK(std::vector<float>(p.row(i).begin(), p.row(i).end()) == expected);
      CHECK(path.size() <= 3);
    }
  }
  SUBCASE("padding rows are zero") {
    auto tokens = v.encode("!a");
    tokens.push_back(Vocabulary::kPad);
    const auto p = tree_positions(tokens, arities);
    CHECK(p.rows == 3);
    for (float x : p.row(2)) CHECK(x == 0.0f);
  }
  CHECK_THROWS_AS(tree_positions(v.encode("&a"), arities), ParseError);
  CHECK_THROWS_AS(tree_positions(v.encode("a;b"), arities), ParseError);
  Sequence deep(40, v.id("!"));
  deep.push_back(v.id("a"));
  CHECK_THROWS_AS(tree_positions(deep, arities), DepthError);
  CHECK_NOTHROW(tree_positions(deep, arities, 64));
}

TEST_CASE("trace parsing") {
  const auto v = ltl_vocabulary(5);
  const auto t = parse_trace(v.encode("a;&ab;{b}"), v);
  CHECK(t.prefix.size() == 2);
  CHECK(t.period.size() == 1);
  CHECK(v.decode(t.prefix[1]) == "&ab");
  CHECK(parse_trace(v.encode("{1}"), v).prefix.empty());
  CHECK(parse_trace(v.encode("a;{!b;c}"), v).period.size() == 2);
  CHECK_THROWS_AS(parse_trace(v.encode("a;b;{1"), v), ParseError);
  CHECK_THROWS_AS(parse_trace(v.encode("a;b"), v), ParseError);
  CHECK_THROWS_AS(parse_trace(v.encode("a;{}"), v), ParseError);
  CHECK_THROWS_AS(parse_trace(v.encode("Xa;{1}"), v), ParseError);
  CHECK_THROWS_AS(parse_trace(v.encode("{1}a"), v), ParseError);
}

TEST_CASE("ltl ingestion") {
  const auto v = ltl_vocabulary(5);
  SUBCASE("jsonl") {
    std::istringstream in(R"({"formula": "&aXb", "trace": "a;b;{1}"})"
                          "\n\n"
                          R"({"formula": "U1c", "trace": "{c}"})"
                          "\n");
    const auto d = ingest_ltl_corpus(in, CorpusFormat::Auto, v);
    REQUIRE(d.size() == 2);
    CHECK(d[0].ap_count == 2);
    CHECK(d[1].ap_count == 1);
    CHECK(v.decode(d[0].target) == "a;b;{1}");
  }
  SUBCASE("tsv") {
    std::istringstream in("&aXb\ta;b;{1}\n");
    CHECK(ingest_ltl_corpus(in, CorpusFormat::Tsv, v).size() == 1);
  }
  SUBCASE("errors carry line numbers") {
    std::istringstream in("&aXb\ta;b;{1}\n&aXb\ta;b;{1\n");
    try {
      ingest_ltl_corpus(in, CorpusFormat::Tsv, v);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
    std::istringstream bad_formula("&a\ta;{1}\n");
    CHECK_THROWS_AS(ingest_ltl_corpus(bad_formula, CorpusFormat::Tsv, v), ParseError);
  }
}

TEST_CASE("copy datasets") {
  const auto v = task_vocabulary(TaskKind::Copy, 30);
  Rng rng(41);
  SUBCASE("length and vocabulary bounds") {
    const auto d = gen_copy_dataset(v, 2000, 5, 10, 5, rng);
    CHECK(d.size() == 2000);
    for (const auto& s : d) {
      CHECK(s.input.size() >= 5);
      CHECK(s.input.size() <= 10);
      CHECK(s.ap_count <= 5);
      CHECK(s.target == s.input);
      for (TokenId t : s.input) CHECK(v.interchangeable_index(t) < 5);
    }
  }
  SUBCASE("scale-up range") {
    for (const auto& s : gen_copy_dataset(v, 200, 20, 80, 20, rng)) {
      CHECK(s.input.size() >= 20);
      CHECK(s.input.size() <= 80);
      CHECK(s.ap_count <= 20);
    }
  }
  SUBCASE("single character") {
    for (const auto& s : gen_copy_dataset(v, 50, 3, 6, 1, rng)) CHECK(s.ap_count == 1);
  }
  CHECK_THROWS_AS(gen_copy_dataset(v, 1, 2, 5, 5, rng), ConfigError);
  CHECK_THROWS_AS(gen_copy_dataset(v, 1, 6, 5, 5, rng), ConfigError);
  CHECK_THROWS_AS(gen_copy_dataset(v, 1, 3, 5, 0, rng), ConfigError);
}

TEST_CASE("evaluation grid") {
  const auto v = task_vocabulary(TaskKind::Copy, 30);
  Rng rng(43);
  const auto d = gen_eval_grid_dataset(v, 30, 30, 100, rng);
  CHECK(d.size() == 40600);
  std::map<std::pair<int, int>, int> cells;
  for (const auto& s : d) {
    ++cells[{s.ap_count, static_cast<int>(s.input.size())}];
    CHECK(s.ap_count <= static_cast<int>(s.input.size()));
  }
  CHECK(cells.size() == 406);
  for (const auto& [key, count] : cells) CHECK(count == 100);
  for (const auto& s : d) {
    if (s.ap_count == 5 && s.input.size() == 5) {
      CHECK(std::set<TokenId>(s.input.begin(), s.input.end()).size() == 5);
    }
  }
  CHECK(gen_eval_grid_dataset(v, 10, 10, 20, rng).size() == 36 * 20);
}

TEST_CASE("perturbation") {
  const auto v = task_vocabulary(TaskKind::Prop, 5);
  const auto s = make_sample(v, v.encode("&ba"), v.encode("b1a1"));
  const auto p = perturb_sample(v, s);
  CHECK(v.decode(p.input) == "&ab");
  CHECK(v.decode(p.target) == "a1b1");
  CHECK(perturb_sample(v, p) == p);

  // APs only in the input are ordered after the target's.
  const auto only_input = make_sample(v, v.encode("|d&ec"), v.encode("e1"));
  const auto q = perturb_sample(v, only_input);
  CHECK(v.decode(q.input) == "|b&ac");
  CHECK(v.decode(q.target) == "a1");
}

TEST_CASE("alpha-renaming augmentation") {
  const auto v = task_vocabulary(TaskKind::Copy, 5);
  Rng rng(47);
  const auto d = gen_copy_dataset(v, 300, 3, 10, 5, rng);
  const auto out = augment_alpha_rename(v, d, 10, rng);
  std::set<int> used;
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(out[i].input == out[i].target);
    CHECK(out[i].ap_count == d[i].ap_count);
    std::set<TokenId> distinct(out[i].input.begin(), out[i].input.end());
    CHECK(static_cast<int>(distinct.size()) == d[i].ap_count);
    for (TokenId t : out[i].input) used.insert(t - v.non_interchangeable_count());
  }
  CHECK(*used.rbegin() <= 9);
  CHECK(used.size() == 10);

  SUBCASE("two APs into three slots are uniform") {
    const auto sample = make_sample(v, v.encode("ab"), v.encode("ab"));
    std::map<Sequence, std::uint64_t> counts;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) ++counts[augment_alpha_rename(v, {sample}, 3, rng)[0].input];
    CHECK(counts.size() == 6);
    std::vector<std::uint64_t> freq;
    for (auto& [seq, c] : counts) {
      CHECK(static_cast<double>(c) / draws == doctest::Approx(1.0 / 6).epsilon(0.06));
      freq.push_back(c);
    }
    CHECK(testing::uniform_chi_square_p(freq) > 0.001);
  }
  CHECK_THROWS_AS(augment_alpha_rename(v, d, 2, rng), SizeError);
}

TEST_CASE("dataset jsonl round trip") {
  const auto v = task_vocabulary(TaskKind::Prop, 5);
  Rng rng(53);
  Dataset d;
  for (int i = 0; i < 200; ++i) d.push_back(gen_prop_sample(v, 5, 20, rng));
  std::stringstream buffer;
  write_jsonl(buffer, d, v);
  const auto text = buffer.str();
  CHECK(text.find(" \n") == std::string::npos);
  CHECK(read_jsonl(buffer, v) == d);

  std::istringstream first_line(text.substr(0, text.find('\n') + 1));
  CHECK(first_line.str().starts_with("{\"input\":"));

  std::istringstream wrong_count(R"({"input":"&ab","target":"a1b1","ap_count":3})");
  CHECK_THROWS_AS(read_jsonl(wrong_count, v), ParseError);
  std::istringstream tsv("&ab\ta1b1\n");
  CHECK(read_jsonl(tsv, v).front().ap_count == 2);
}

TEST_CASE("sharded generation is independent of worker count") {
  const auto v = task_vocabulary(TaskKind::Copy, 5);
  auto gen = [&](std::size_t n, Rng& rng) { return gen_copy_dataset(v, n, 3, 10, 5, rng); };
  const auto one = generate_sharded(10000, 99, 1, gen);
  const auto three = generate_sharded(10000, 99, 3, gen);
  CHECK(one.size() == 10000);
  CHECK(one == three);
  CHECK(generate_sharded(10000, 100, 1, gen) != one);
}
