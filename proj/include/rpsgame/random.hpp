#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

#include "rpsgame/simplex.hpp"

namespace rpsgame {

/// Name of the seeded generator, so runs can be reproduced elsewhere.
///
/// v1: std::mt19937_64 seeded with the 64-bit seed. A uniform u in [0, 1)
/// is built from the top 53 bits of one draw, u = (g() >> 11) * 2^-53, and
/// an exponential variate is -log1p(-u). A simplex sample is n exponentials
/// divided by their sum; the whole vector is redrawn while any coordinate is
/// below kMinRandomCoordinate. x is drawn first, then w.
inline constexpr const char* kGeneratorSpec = "mt19937_64/top53-uniform/exp-normalize v1";

inline constexpr double kMinRandomCoordinate = 1e-6;

class SeededSampler {
 public:
  explicit SeededSampler(std::uint64_t seed) : engine_(seed) {}

  double uniform();
  double exponential();
  /// Flat-Dirichlet point on the open simplex.
  SimplexPoint simplex_point(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

/// Flat-Dirichlet (x, w), deterministic in `seed`.
SystemState random_interior_state(std::uint64_t seed, std::size_t n);

}  // namespace rpsgame
