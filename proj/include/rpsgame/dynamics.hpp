#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rpsgame/simplex.hpp"

namespace rpsgame {

/// Time derivative of (x, w).
struct SimplexTangent {
  std::vector<double> dx;
  std::vector<double> dw;
};

/// Time derivative of (y, z).
struct TransformedTangent {
  std::vector<double> dy;
  std::vector<double> dz;
};

// ---------------------------------------------------------------------------
// Game algebra

/// Fitness s = P^w x via the O(n) closed form
///   s_i = a (x_{i-1} - x_{i+1}) + mu_i w_i - sum_k mu_k w_k x_k.
std::vector<double> fitness(const SystemState& state, const ModelParams& params);

/// Replicator field of the coupled game:
///   dx_i = x_i s_i,   dw_i = w_i (<w,x> - x_i).
SimplexTangent simplex_field(const SystemState& state, const ModelParams& params);

/// simplex_field divided by (|f| + 1), |.| the Euclidean norm of (dx, dw).
SimplexTangent renormalized_field(const SystemState& state, const ModelParams& params);

// ---------------------------------------------------------------------------
// Log-ratio coordinates

/// v_i = log(p_i / p_n), i < n-1. Throws BoundaryError on non-positive input.
std::vector<double> transform(const SimplexPoint& p);
std::vector<double> transform(std::span<const double> p);

/// Normalized exponential with an implicit zero for the last coordinate,
/// max-shifted so large entries do not overflow. Throws ValidationError on
/// non-finite input and BoundaryError if a coordinate underflows to zero.
SimplexPoint inverse_transform(std::span<const double> v);

TransformedState to_transformed(const SystemState& state);
SystemState from_transformed(const TransformedState& ts);

/// Field in (y, z) coordinates, obtained by mapping back through the inverse
/// transform:
///   dy_i = s_i - s_n,   dz_i = x_n - x_i.
TransformedTangent transformed_field(const TransformedState& ts, const ModelParams& params);

// ---------------------------------------------------------------------------
// Barrier

/// C = -sum log x_i - mu sum log w_i, with mu = params.mu (the reference
/// value in exploration mode, where C is only a diagnostic). Constant along
/// orbits of the uniform-mu system.
double conserved_quantity(const SystemState& state, const ModelParams& params);

/// Same, on raw coordinates. Throws BoundaryError ("barrier divergence") when
/// any coordinate is <= 0.
double conserved_quantity(std::span<const double> x, std::span<const double> w, double mu);

/// Same, evaluated directly from log-ratio coordinates:
/// -sum log x_i = n L(y) - sum y_i with L(y) = log(1 + sum exp y_j).
double conserved_quantity_transformed(std::span<const double> y, std::span<const double> z,
                                      double mu);

// ---------------------------------------------------------------------------
// Flat kernels used by the integrators. State layouts are [x | w] (length 2n)
// and [y | z] (length 2(n-1)). Buffers are caller-owned.

namespace kernels {

/// Writes softmax-with-implicit-last of v (length n-1) into out (length n).
void inverse_transform_into(std::span<const double> v, std::span<double> out);

/// log(1 + sum_j exp v_j), max-shifted.
double log_partition(std::span<const double> v);

/// s = P^w x, closed form.
void fitness_into(std::span<const double> x, std::span<const double> w, const ModelParams& params,
                  std::span<double> s);

/// Stateful evaluator with scratch buffers; not shareable across threads.
class SimplexFieldEval {
 public:
  explicit SimplexFieldEval(const ModelParams& params);
  void operator()(std::span<const double> xw, std::span<double> dxw);

 private:
  ModelParams params_;
  std::vector<double> s_;
};

class TransformedFieldEval {
 public:
  explicit TransformedFieldEval(const ModelParams& params);
  void operator()(std::span<const double> yz, std::span<double> dyz);

 private:
  ModelParams params_;
  std::vector<double> x_, w_, s_;
};

}  // namespace kernels

}  // namespace rpsgame
