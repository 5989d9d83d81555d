#include "rpsgame/payoff.hpp"

#include <cmath>
#include <string>

namespace rpsgame {

PayoffMatrix::PayoffMatrix(std::size_t n, std::vector<double> entries)
    : n_(n), entries_(std::move(entries)) {
  if (entries_.size() != n_ * n_) {
    throw ValidationError("payoff matrix: expected " + std::to_string(n_ * n_) + " entries");
  }
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i; j < n_; ++j) {
      if (std::abs((*this)(i, j) + (*this)(j, i)) > kAntisymmetryTolerance) {
        throw ValidationError("payoff matrix: not antisymmetric at (" + std::to_string(i) + "," +
                              std::to_string(j) + ")");
      }
    }
  }
}

std::vector<double> PayoffMatrix::apply(std::span<const double> v) const {
  if (v.size() != n_) throw ValidationError("payoff matrix: vector dimension mismatch");
  std::vector<double> out(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n_; ++j) acc += entries_[i * n_ + j] * v[j];
    out[i] = acc;
  }
  return out;
}

namespace {

std::vector<double> base_entries(const ModelParams& params) {
  params.validate();
  const std::size_t n = params.n;
  std::vector<double> e(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    e[i * n + (i + n - 1) % n] = params.amplitude;
    e[i * n + (i + 1) % n] = -params.amplitude;
  }
  return e;
}

}  // namespace

PayoffMatrix rps_base_matrix(const ModelParams& params) {
  return PayoffMatrix(params.n, base_entries(params));
}

PayoffMatrix favor_matrix(std::size_t i, const ModelParams& params) {
  auto e = base_entries(params);
  const std::size_t n = params.n;
  if (i >= n) {
    throw ValidationError("favor_matrix: index " + std::to_string(i) + " out of range for n=" +
                          std::to_string(n));
  }
  const double m = params.mu_for(i);
  for (std::size_t j = 0; j < n; ++j) {
    if (j == i) continue;
    e[i * n + j] += m;
    e[j * n + i] -= m;
  }
  return PayoffMatrix(n, std::move(e));
}

PayoffMatrix payoff_matrix(const SimplexPoint& w, const ModelParams& params) {
  return payoff_matrix(w.coords(), params);
}

PayoffMatrix payoff_matrix(std::span<const double> w, const ModelParams& params) {
  auto e = base_entries(params);
  const std::size_t n = params.n;
  if (w.size() != n) {
    throw ValidationError("payoff_matrix: w has " + std::to_string(w.size()) +
                          " coordinates, model.n=" + std::to_string(n));
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) e[i * n + j] += params.mu_for(i) * w[i] - params.mu_for(j) * w[j];
    }
  }
  return PayoffMatrix(n, std::move(e));
}

}  // namespace rpsgame
