#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rpsgame/simplex.hpp"

namespace rpsgame {

/// Antisymmetric n x n payoff matrix, row-major.
class PayoffMatrix {
 public:
  static constexpr double kAntisymmetryTolerance = 1e-14;

  /// Throws ValidationError unless `entries` is n*n and antisymmetric.
  PayoffMatrix(std::size_t n, std::vector<double> entries);

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return entries_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const { return {entries_.data() + i * n_, n_}; }
  std::span<const double> entries() const { return entries_; }

  /// Returns P v.
  std::vector<double> apply(std::span<const double> v) const;

 private:
  std::size_t n_;
  std::vector<double> entries_;
};

/// Cyclic rock-paper-scissors matrix: P[i][i-1] = +a, P[i][i+1] = -a (mod n).
PayoffMatrix rps_base_matrix(const ModelParams& params);

/// P_i: the base matrix plus mu_i on row i and -mu_i on column i (off the
/// diagonal). Uses params.mu_for(i).
PayoffMatrix favor_matrix(std::size_t i, const ModelParams& params);

/// Environment-weighted matrix P^w = sum_i w_i P_i, assembled entrywise as
/// P[i][j] + (mu_i w_i - mu_j w_j).
PayoffMatrix payoff_matrix(const SimplexPoint& w, const ModelParams& params);

/// Same assembly for an arbitrary weight vector (e.g. a boundary vertex);
/// only the dimension is checked.
PayoffMatrix payoff_matrix(std::span<const double> w, const ModelParams& params);

}  // namespace rpsgame
