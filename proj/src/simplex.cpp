#include "rpsgame/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rpsgame {

SimplexPoint::SimplexPoint(std::vector<double> coords, const std::string& what)
    : coords_(std::move(coords)) {
  if (coords_.size() < 3) {
    throw ValidationError(what + ": need at least 3 coordinates, got " +
                          std::to_string(coords_.size()));
  }
  for (std::size_t i = 0; i < coords_.size(); ++i) {
    if (!std::isfinite(coords_[i]) || coords_[i] <= 0.0) {
      throw ValidationError(what + "[" + std::to_string(i) +
                            "]: coordinate must be finite and > 0, got " +
                            std::to_string(coords_[i]));
    }
  }
  const double sum = std::accumulate(coords_.begin(), coords_.end(), 0.0);
  if (std::abs(sum - 1.0) > kSimplexRenormalizeTolerance) {
    throw ValidationError(what + ": coordinates must sum to 1, got " + std::to_string(sum));
  }
  if (sum != 1.0) {
    for (auto& c : coords_) c /= sum;
  }
}

SimplexPoint SimplexPoint::uniform(std::size_t n) {
  return SimplexPoint(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

double SimplexPoint::min_coord() const { return *std::min_element(coords_.begin(), coords_.end()); }

SystemState::SystemState(SimplexPoint x_, SimplexPoint w_) : x(std::move(x_)), w(std::move(w_)) {
  if (x.size() != w.size()) {
    throw ValidationError("state: x has " + std::to_string(x.size()) + " coordinates but w has " +
                          std::to_string(w.size()));
  }
}

SystemState SystemState::uniform(std::size_t n) {
  return SystemState(SimplexPoint::uniform(n), SimplexPoint::uniform(n));
}

TransformedState::TransformedState(std::vector<double> y_, std::vector<double> z_)
    : y(std::move(y_)), z(std::move(z_)) {
  if (y.size() != z.size()) throw ValidationError("transformed state: y and z lengths differ");
  if (y.size() < 2) throw ValidationError("transformed state: need n-1 >= 2 entries");
  auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(y.begin(), y.end(), finite) || !std::all_of(z.begin(), z.end(), finite)) {
    throw ValidationError("transformed state: entries must be finite");
  }
}

void ModelParams::validate() const {
  if (n < 3) throw ValidationError("model.n: must be >= 3, got " + std::to_string(n));
  if (!std::isfinite(mu) || mu < 0.0) {
    throw ValidationError("model.mu: must be finite and >= 0, got " + std::to_string(mu));
  }
  if (!std::isfinite(amplitude) || amplitude <= 0.0) {
    throw ValidationError("model.amplitude: must be finite and > 0, got " +
                          std::to_string(amplitude));
  }
  if (mu_per_matrix) {
    if (mu_per_matrix->size() != n) {
      throw ValidationError("model.mu_per_matrix: expected " + std::to_string(n) +
                            " entries, got " + std::to_string(mu_per_matrix->size()));
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double m = (*mu_per_matrix)[i];
      if (!std::isfinite(m) || m < 0.0) {
        throw ValidationError("model.mu_per_matrix[" + std::to_string(i) +
                              "]: must be finite and >= 0");
      }
    }
  }
}

}  // namespace rpsgame
