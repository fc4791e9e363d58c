#include <cmath>
#include <map>
#include <set>

#include "alphaembed/errors.hpp"
#include "alphaembed/randvec.hpp"
#include "doctest.h"
#include "stats.hpp"

using namespace alphaembed;

namespace {

// Independent enumeration of {-1,1}^d and {-1,0,1}^d \ {0} by counting in
// base 2 / base 3 with a carry loop.
std::set<std::vector<float>> all_grid_points(int d, std::vector<float> values,
                                             bool drop_zero) {
  std::set<std::vector<float>> points;
  std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
  for (;;) {
    std::vector<float> p;
    bool zero = true;
    for (auto i : idx) {
      p.push_back(values[i]);
      zero = zero && values[i] == 0.0f;
    }
    if (!(drop_zero && zero)) points.insert(p);
    std::size_t k = 0;
    while (k < idx.size() && ++idx[k] == values.size()) idx[k++] = 0;
    if (k == idx.size()) break;
  }
  return points;
}

}  // namespace

TEST_CASE("int_to_hypercube examples") {
  CHECK(int_to_hypercube(0, 3) == std::vector<float>{-1, -1, -1});
  CHECK(int_to_hypercube(7, 3) == std::vector<float>{1, 1, 1});
  CHECK(int_to_hypercube(5, 3) == std::vector<float>{1, -1, 1});
  CHECK_THROWS_AS(int_to_hypercube(8, 3), RangeError);
}

TEST_CASE("int_to_hypercube is a bijection for small d") {
  for (int d = 1; d <= 10; ++d) {
    const auto expected = all_grid_points(d, {-1, 1}, false);
    std::set<std::vector<float>> images;
    for (std::uint64_t i = 0; i < (std::uint64_t{1} << d); ++i) images.insert(int_to_hypercube(i, d));
    CHECK(images.size() == (std::size_t{1} << d));
    CHECK(images == expected);
  }
}

TEST_CASE("int_to_neighbor examples") {
  CHECK(int_to_neighbor(0, 2) == std::vector<float>{-1, -1});
  CHECK(int_to_neighbor(4, 2) == std::vector<float>{1, 0});
  CHECK(int_to_neighbor(7, 2) == std::vector<float>{1, 1});
  CHECK_THROWS_AS(int_to_neighbor(8, 2), RangeError);
}

TEST_CASE("int_to_neighbor is a bijection onto nonzero points") {
  for (int d = 1; d <= 6; ++d) {
    const auto expected = all_grid_points(d, {-1, 0, 1}, true);
    const auto size = sampling_set_size(RandKind::NeighboringPoints, d);
    CHECK(size == expected.size());
    std::set<std::vector<float>> images;
    for (std::uint64_t i = 0; i < size; ++i) images.insert(int_to_neighbor(i, d));
    CHECK(images == expected);
  }
}

TEST_CASE("sampling set sizes") {
  CHECK(sampling_set_size(RandKind::HypercubeVertices, 5) == 32);
  CHECK(sampling_set_size(RandKind::NeighboringPoints, 8) == 6560);
  CHECK(sampling_set_size(RandKind::NeighboringPoints, 40) == 12157665459056928800ull);
  CHECK_THROWS_AS(sampling_set_size(RandKind::NeighboringPoints, 41), OverflowError);
  CHECK_THROWS_AS(sampling_set_size(RandKind::HypercubeVertices, 64), OverflowError);
  CHECK_THROWS_AS(sampling_set_size(RandKind::NormalDistribution, 4), ConfigError);
}

TEST_CASE("reservoir_sample_unique") {
  Rng rng(3);
  SUBCASE("full set yields a permutation") {
    for (int trial = 0; trial < 50; ++trial) {
      auto s = reservoir_sample_unique(8, 8, rng);
      std::sort(s.begin(), s.end());
      CHECK(s == std::vector<std::uint64_t>{0, 1, 2, 3, 4, 5, 6, 7});
    }
  }
  SUBCASE("single draws are uniform") {
    std::vector<std::uint64_t> counts(4);
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) ++counts[reservoir_sample_unique(1, 4, rng)[0]];
    for (auto c : counts) CHECK(static_cast<double>(c) / draws == doctest::Approx(0.25).epsilon(0.04));
    CHECK(testing::uniform_chi_square_p(counts) > 0.001);
  }
  SUBCASE("every 2-subset of 5 equally likely") {
    std::map<std::pair<std::uint64_t, std::uint64_t>, std::uint64_t> counts;
    for (int i = 0; i < 50000; ++i) {
      auto s = reservoir_sample_unique(2, 5, rng);
      std::sort(s.begin(), s.end());
      ++counts[{s[0], s[1]}];
    }
    CHECK(counts.size() == 10);
    std::vector<std::uint64_t> freq;
    for (auto& kv : counts) freq.push_back(kv.second);
    CHECK(testing::uniform_chi_square_p(freq) > 0.001);
  }
  SUBCASE("distinct draws from a large set") {
    const auto s = reservoir_sample_unique(3, 6560, rng);
    CHECK(std::set<std::uint64_t>(s.begin(), s.end()).size() == 3);
    const auto huge = reservoir_sample_unique(64, sampling_set_size(RandKind::NeighboringPoints, 32), rng);
    CHECK(std::set<std::uint64_t>(huge.begin(), huge.end()).size() == 64);
  }
  CHECK_THROWS_AS(reservoir_sample_unique(5, 4, rng), SizeError);
  CHECK(reservoir_sample_unique(0, 4, rng).empty());
}

TEST_CASE("generate_betas") {
  Rng rng(5);
  SUBCASE("hypercube d=5 m=10 distinct") {
    const auto b = generate_betas(RandMethod(RandKind::HypercubeVertices, 5), 10, rng);
    std::set<std::vector<float>> rows;
    for (int r = 0; r < b.rows; ++r) {
      const auto row = b.row(r);
      for (float x : row) CHECK((x == 1.0f || x == -1.0f));
      rows.emplace(row.begin(), row.end());
    }
    CHECK(rows.size() == 10);
  }
  SUBCASE("neighbor d=2 m=8 exhausts the set") {
    const auto b = generate_betas(RandMethod(RandKind::NeighboringPoints, 2), 8, rng);
    std::set<std::vector<float>> rows;
    for (int r = 0; r < b.rows; ++r) rows.emplace(b.row(r).begin(), b.row(r).end());
    CHECK(rows == all_grid_points(2, {-1, 0, 1}, true));
    CHECK_THROWS_AS(generate_betas(RandMethod(RandKind::NeighboringPoints, 2), 9, rng), SizeError);
  }
  SUBCASE("normal moments") {
    const auto b = generate_betas(RandMethod(RandKind::NormalDistribution, 4), 1000, rng);
    for (int c = 0; c < 4; ++c) {
      double sum = 0, sq = 0;
      for (int r = 0; r < b.rows; ++r) sum += b.row(r)[static_cast<std::size_t>(c)];
      const double mean = sum / b.rows;
      for (int r = 0; r < b.rows; ++r) {
        const double d = b.row(r)[static_cast<std::size_t>(c)] - mean;
        sq += d * d;
      }
      CHECK(std::abs(mean) < 0.1);
      CHECK(std::abs(sq / (b.rows - 1) - 1.0) < 0.15);
    }
  }
  SUBCASE("uniqueness disabled above 32 dims") {
    const RandMethod wide(RandKind::HypercubeVertices, 48);
    CHECK_FALSE(wide.enforce_unique);
    CHECK(RandMethod(RandKind::NeighboringPoints, 32).enforce_unique);
    const auto b = generate_betas(wide, 100, rng);
    CHECK(b.rows == 100);
    CHECK(b.cols == 48);
    const auto n = generate_betas(RandMethod(RandKind::NeighboringPoints, 50), 20, rng);
    for (int r = 0; r < n.rows; ++r) {
      bool nonzero = false;
      for (float x : n.row(r)) nonzero = nonzero || x != 0.0f;
      CHECK(nonzero);
    }
  }
  SUBCASE("rejection baseline also yields distinct rows") {
    const auto b = generate_betas_by_rejection(RandMethod(RandKind::NeighboringPoints, 8), 200, rng);
    std::set<std::vector<float>> rows;
    for (int r = 0; r < b.rows; ++r) rows.emplace(b.row(r).begin(), b.row(r).end());
    CHECK(rows.size() == 200);
  }
  CHECK_THROWS_AS(RandMethod(RandKind::HypercubeVertices, 0), ConfigError);
}
