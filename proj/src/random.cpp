#include "rpsgame/random.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace rpsgame {

double SeededSampler::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double SeededSampler::exponential() { return -std::log1p(-uniform()); }

SimplexPoint SeededSampler::simplex_point(std::size_t n) {
  if (n < 3) throw ValidationError("random state: n must be >= 3");
  std::vector<double> v(n);
  while (true) {
    double total = 0.0;
    for (auto& e : v) {
      e = exponential();
      total += e;
    }
    for (auto& e : v) e /= total;
    if (*std::min_element(v.begin(), v.end()) >= kMinRandomCoordinate) break;
  }
  return SimplexPoint(std::move(v), "random point");
}

SystemState random_interior_state(std::uint64_t seed, std::size_t n) {
  SeededSampler sampler(seed);
  auto x = sampler.simplex_point(n);
  auto w = sampler.simplex_point(n);
  return SystemState(std::move(x), std::move(w));
}

}  // namespace rpsgame
