#include "alphaembed/randvec.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "alphaembed/errors.hpp"

namespace alphaembed {

namespace {

// Uniform double in the open interval (0, 1).
double open_unit(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

std::vector<float> random_discrete_vector(RandKind kind, int d, Rng& rng) {
  std::vector<float> v(static_cast<std::size_t>(d));
  if (kind == RandKind::HypercubeVertices) {
    std::bernoulli_distribution coin(0.5);
    for (auto& x : v) x = coin(rng) ? 1.0f : -1.0f;
    return v;
  }
  std::uniform_int_distribution<int> digit(-1, 1);
  bool nonzero = false;
  while (!nonzero) {
    for (auto& x : v) {
      x = static_cast<float>(digit(rng));
      nonzero = nonzero || x != 0.0f;
    }
  }
  return v;
}

}  // namespace

std::string to_string(RandKind kind) {
  switch (kind) {
    case RandKind::NormalDistribution: return "normal";
    case RandKind::NeighboringPoints: return "neighbor";
    case RandKind::HypercubeVertices: return "hypercube";
  }
  return "unknown";
}

RandKind rand_kind_from_string(const std::string& name) {
  if (name == "normal") return RandKind::NormalDistribution;
  if (name == "neighbor" || name == "neighboring") return RandKind::NeighboringPoints;
  if (name == "hypercube") return RandKind::HypercubeVertices;
  throw ConfigError("unknown random embedding method '" + name +
                    "' (expected normal, neighbor or hypercube)");
}

RandMethod::RandMethod(RandKind kind, int d_beta, bool enforce_unique)
    : kind(kind), d_beta(d_beta), enforce_unique(enforce_unique) {
  if (d_beta < 1) throw ConfigError("d_beta must be at least 1");
  if (discrete() && d_beta > kMaxUniqueDims) this->enforce_unique = false;
}

std::uint64_t sampling_set_size(RandKind kind, int d) {
  if (d < 1) throw RangeError("dimension must be positive");
  switch (kind) {
    case RandKind::HypercubeVertices:
      if (d >= 64) throw OverflowError("2^" + std::to_string(d) + " exceeds 64 bits");
      return std::uint64_t{1} << d;
    case RandKind::NeighboringPoints: {
      std::uint64_t p = 1;
      for (int k = 0; k < d; ++k) {
        if (p > UINT64_MAX / 3) {
          throw OverflowError("3^" + std::to_string(d) + " exceeds 64 bits");
        }
        p *= 3;
      }
      return p - 1;
    }
    case RandKind::NormalDistribution: break;
  }
  throw ConfigError("normal distribution has no finite sampling set");
}

std::vector<float> int_to_hypercube(std::uint64_t i, int d) {
  if (d < 1 || d > 64) throw RangeError("hypercube dimension must be in [1, 64]");
  if (d < 64 && i >= (std::uint64_t{1} << d)) {
    throw RangeError(std::to_string(i) + " outside [0, 2^" + std::to_string(d) + ")");
  }
  std::vector<float> v(static_cast<std::size_t>(d));
  for (int k = 0; k < d; ++k) v[static_cast<std::size_t>(k)] = ((i >> k) & 1u) ? 1.0f : -1.0f;
  return v;
}

std::vector<float> int_to_neighbor(std::uint64_t i, int d) {
  const std::uint64_t size = sampling_set_size(RandKind::NeighboringPoints, d);
  if (i >= size) {
    throw RangeError(std::to_string(i) + " outside [0, 3^" + std::to_string(d) + " - 1)");
  }
  const std::uint64_t zero_code = size / 2;
  std::uint64_t j = i < zero_code ? i : i + 1;
  std::vector<float> v(static_cast<std::size_t>(d));
  for (int k = 0; k < d; ++k) {
    v[static_cast<std::size_t>(k)] = static_cast<float>(static_cast<int>(j % 3) - 1);
    j /= 3;
  }
  return v;
}

std::vector<std::uint64_t> reservoir_sample_unique(std::uint64_t m,
                                                   std::uint64_t set_size,
                                                   Rng& rng) {
  if (m > set_size) {
    throw SizeError("cannot draw " + std::to_string(m) + " distinct values from " +
                    std::to_string(set_size));
  }
  std::vector<std::uint64_t> reservoir(m);
  for (std::uint64_t k = 0; k < m; ++k) reservoir[k] = k;

  if (m > 0 && m < set_size) {
    // Algorithm L: jump straight to the next stream element that enters the
    // reservoir instead of visiting every integer of the implicit range.
    const double inv_m = 1.0 / static_cast<double>(m);
    std::uniform_int_distribution<std::uint64_t> slot(0, m - 1);
    double w = std::exp(std::log(open_unit(rng)) * inv_m);
    std::uint64_t pos = m - 1;
    for (;;) {
      const double skip = std::floor(std::log(open_unit(rng)) / std::log1p(-w));
      const std::uint64_t remaining = set_size - 1 - pos;
      if (!(skip < static_cast<double>(remaining))) break;
      pos += static_cast<std::uint64_t>(skip) + 1;
      reservoir[slot(rng)] = pos;
      w *= std::exp(std::log(open_unit(rng)) * inv_m);
    }
  }
  std::shuffle(reservoir.begin(), reservoir.end(), rng);
  return reservoir;
}

VectorSet generate_betas(const RandMethod& method, int m, Rng& rng) {
  if (m < 0) throw SizeError("negative vector count");
  VectorSet out(m, method.d_beta);
  if (!method.discrete()) {
    std::normal_distribution<float> normal(0.0f, 1.0f);
    for (auto& x : out.data) x = normal(rng);
    return out;
  }
  if (!method.enforce_unique) {
    for (int r = 0; r < m; ++r) {
      const auto v = random_discrete_vector(method.kind, method.d_beta, rng);
      std::copy(v.begin(), v.end(), out.row(r).begin());
    }
    return out;
  }
  const std::uint64_t size = sampling_set_size(method.kind, method.d_beta);
  const auto codes = reservoir_sample_unique(static_cast<std::uint64_t>(m), size, rng);
  for (int r = 0; r < m; ++r) {
    const auto code = codes[static_cast<std::size_t>(r)];
    const auto v = method.kind == RandKind::HypercubeVertices
                       ? int_to_hypercube(code, method.d_beta)
                       : int_to_neighbor(code, method.d_beta);
    std::copy(v.begin(), v.end(), out.row(r).begin());
  }
  return out;
}

VectorSet generate_betas_by_rejection(const RandMethod& method, int m, Rng& rng) {
  if (!method.discrete() || !method.enforce_unique) return generate_betas(method, m, rng);
  if (static_cast<std::uint64_t>(m) > sampling_set_size(method.kind, method.d_beta)) {
    throw SizeError("not enough distinct vectors in the sampling set");
  }
  VectorSet out(m, method.d_beta);
  std::set<std::vector<float>> seen;
  for (int r = 0; r < m;) {
    auto v = random_discrete_vector(method.kind, method.d_beta, rng);
    if (!seen.insert(v).second) continue;
    std::copy(v.begin(), v.end(), out.row(r).begin());
    ++r;
  }
  return out;
}

}  // namespace alphaembed
