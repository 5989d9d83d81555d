#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rpsgame {

/// Thrown when a value violates a documented precondition. The message names
/// the offending field.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a state touches (or numerically crosses) the simplex boundary.
class BoundaryError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Largest deviation of the coordinate sum from 1 that is silently fixed by
/// dividing through by the sum.
inline constexpr double kSimplexRenormalizeTolerance = 1e-9;

/// A point in the open probability simplex: n >= 3 strictly positive
/// coordinates summing to 1. Holds both population shares and environment
/// weights.
class SimplexPoint {
 public:
  /// Validates and, when the sum is within kSimplexRenormalizeTolerance of 1,
  /// renormalizes. `what` prefixes error messages (e.g. "x0").
  explicit SimplexPoint(std::vector<double> coords, const std::string& what = "simplex point");

  static SimplexPoint uniform(std::size_t n);

  std::size_t size() const { return coords_.size(); }
  double operator[](std::size_t i) const { return coords_[i]; }
  std::span<const double> coords() const { return coords_; }
  double min_coord() const;

  friend bool operator==(const SimplexPoint&, const SimplexPoint&) = default;

 private:
  std::vector<double> coords_;
};

/// Phase-space state (x, w) in int(simplex) x int(simplex).
struct SystemState {
  SystemState(SimplexPoint x_, SimplexPoint w_);

  static SystemState uniform(std::size_t n);

  std::size_t size() const { return x.size(); }

  SimplexPoint x;
  SimplexPoint w;

  friend bool operator==(const SystemState&, const SystemState&) = default;
};

/// Image (y, z) of a SystemState under the log-ratio map, each of length n-1.
struct TransformedState {
  TransformedState(std::vector<double> y_, std::vector<double> z_);

  std::size_t strategies() const { return y.size() + 1; }

  std::vector<double> y;
  std::vector<double> z;
};

struct ModelParams {
  std::size_t n = 3;
  double mu = 0.1;
  double amplitude = 1.0;
  /// Per-matrix feedback strengths (exploration mode). When set, `mu` is
  /// only the reference value used for the barrier diagnostic.
  std::optional<std::vector<double>> mu_per_matrix;

  bool exploration() const { return mu_per_matrix.has_value(); }
  /// Feedback strength attached to favoring matrix i.
  double mu_for(std::size_t i) const { return mu_per_matrix ? (*mu_per_matrix)[i] : mu; }

  /// Throws ValidationError naming the first invalid field.
  void validate() const;
};

}  // namespace rpsgame
