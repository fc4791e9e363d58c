#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "alphaembed/vocab.hpp"

namespace alphaembed {

enum class RandKind { NormalDistribution, NeighboringPoints, HypercubeVertices };

std::string to_string(RandKind kind);
RandKind rand_kind_from_string(const std::string& name);

// Above this many dimensions the discrete sampling sets no longer fit the
// integer mapping and uniqueness is not enforced.
inline constexpr int kMaxUniqueDims = 32;

struct RandMethod {
  RandKind kind = RandKind::HypercubeVertices;
  int d_beta = 1;
  bool enforce_unique = true;

  RandMethod() = default;
  // Throws ConfigError for d_beta < 1. Clears enforce_unique for discrete
  // methods with d_beta > kMaxUniqueDims.
  RandMethod(RandKind kind, int d_beta, bool enforce_unique = true);

  bool discrete() const { return kind != RandKind::NormalDistribution; }

  friend bool operator==(const RandMethod&, const RandMethod&) = default;
};

// Dense row-major m x cols block of generated vectors.
struct VectorSet {
  int rows = 0;
  int cols = 0;
  std::vector<float> data;

  VectorSet() = default;
  VectorSet(int rows, int cols)
      : rows(rows), cols(cols),
        data(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {}

  std::span<float> row(int i) {
    return {data.data() + static_cast<std::size_t>(i) * cols,
            static_cast<std::size_t>(cols)};
  }
  std::span<const float> row(int i) const {
    return {data.data() + static_cast<std::size_t>(i) * cols,
            static_cast<std::size_t>(cols)};
  }

  friend bool operator==(const VectorSet&, const VectorSet&) = default;
};

// Size of the discrete sampling set: 2^d for hypercube vertices, 3^d - 1 for
// neighboring points. Throws OverflowError beyond 64 bits and ConfigError for
// the continuous method.
std::uint64_t sampling_set_size(RandKind kind, int d);

// Binary digits of i, least significant first, mapped 0 -> -1, 1 -> +1.
std::vector<float> int_to_hypercube(std::uint64_t i, int d);

// Ternary digits, least significant first, mapped 0 -> -1, 1 -> 0, 2 -> +1,
// after skipping the integer (3^d - 1) / 2 that encodes the zero vector.
std::vector<float> int_to_neighbor(std::uint64_t i, int d);

// m distinct integers from [0, set_size), every m-subset equally likely,
// returned in random order. Uses O(m) memory and skip-based reservoir
// sampling, so set_size may be huge.
std::vector<std::uint64_t> reservoir_sample_unique(std::uint64_t m,
                                                   std::uint64_t set_size,
                                                   Rng& rng);

VectorSet generate_betas(const RandMethod& method, int m, Rng& rng);

// Baseline used by the micro-benchmark: draw vectors one by one and reject
// duplicates against the vectors drawn so far.
VectorSet generate_betas_by_rejection(const RandMethod& method, int m, Rng& rng);

}  // namespace alphaembed
