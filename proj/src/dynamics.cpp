#include "rpsgame/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace rpsgame {

namespace kernels {

void inverse_transform_into(std::span<const double> v, std::span<double> out) {
  const std::size_t m = v.size();
  double shift = 0.0;  // the implicit last entry
  for (double e : v) shift = std::max(shift, e);
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    out[i] = std::exp(v[i] - shift);
    total += out[i];
  }
  out[m] = std::exp(-shift);
  total += out[m];
  for (std::size_t i = 0; i <= m; ++i) out[i] /= total;
}

double log_partition(std::span<const double> v) {
  double shift = 0.0;
  for (double e : v) shift = std::max(shift, e);
  double total = std::exp(-shift);
  for (double e : v) total += std::exp(e - shift);
  return shift + std::log(total);
}

void fitness_into(std::span<const double> x, std::span<const double> w, const ModelParams& params,
                  std::span<double> s) {
  const std::size_t n = x.size();
  const double a = params.amplitude;
  double mean_boost = 0.0;
  for (std::size_t k = 0; k < n; ++k) mean_boost += params.mu_for(k) * w[k] * x[k];
  for (std::size_t i = 0; i < n; ++i) {
    const double cyclic = x[(i + n - 1) % n] - x[(i + 1) % n];
    s[i] = a * cyclic + (params.mu_for(i) * w[i] - mean_boost);
  }
}

SimplexFieldEval::SimplexFieldEval(const ModelParams& params) : params_(params), s_(params.n) {
  params_.validate();
}

void SimplexFieldEval::operator()(std::span<const double> xw, std::span<double> dxw) {
  const std::size_t n = params_.n;
  auto x = xw.first(n);
  auto w = xw.subspan(n, n);
  fitness_into(x, w, params_, s_);
  double wx = 0.0;
  for (std::size_t i = 0; i < n; ++i) wx += w[i] * x[i];
  for (std::size_t i = 0; i < n; ++i) {
    dxw[i] = x[i] * s_[i];
    dxw[n + i] = w[i] * (wx - x[i]);
  }
}

TransformedFieldEval::TransformedFieldEval(const ModelParams& params)
    : params_(params), x_(params.n), w_(params.n), s_(params.n) {
  params_.validate();
}

void TransformedFieldEval::operator()(std::span<const double> yz, std::span<double> dyz) {
  const std::size_t n = params_.n;
  const std::size_t m = n - 1;
  inverse_transform_into(yz.first(m), x_);
  inverse_transform_into(yz.subspan(m, m), w_);
  fitness_into(x_, w_, params_, s_);
  for (std::size_t i = 0; i < m; ++i) {
    dyz[i] = s_[i] - s_[m];
    dyz[m + i] = x_[m] - x_[i];
  }
}

}  // namespace kernels

namespace {

void check_dims(const SystemState& state, const ModelParams& params) {
  params.validate();
  if (state.size() != params.n) {
    throw ValidationError("state has " + std::to_string(state.size()) +
                          " strategies, model.n=" + std::to_string(params.n));
  }
}

std::vector<double> concat(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

}  // namespace

std::vector<double> fitness(const SystemState& state, const ModelParams& params) {
  check_dims(state, params);
  std::vector<double> s(params.n);
  kernels::fitness_into(state.x.coords(), state.w.coords(), params, s);
  return s;
}

SimplexTangent simplex_field(const SystemState& state, const ModelParams& params) {
  check_dims(state, params);
  const std::size_t n = params.n;
  const auto xw = concat(state.x.coords(), state.w.coords());
  std::vector<double> d(2 * n);
  kernels::SimplexFieldEval{params}(xw, d);
  return {std::vector<double>(d.begin(), d.begin() + n), std::vector<double>(d.begin() + n, d.end())};
}

SimplexTangent renormalized_field(const SystemState& state, const ModelParams& params) {
  auto f = simplex_field(state, params);
  double sq = 0.0;
  for (double v : f.dx) sq += v * v;
  for (double v : f.dw) sq += v * v;
  const double scale = 1.0 / (std::sqrt(sq) + 1.0);
  for (double& v : f.dx) v *= scale;
  for (double& v : f.dw) v *= scale;
  return f;
}

std::vector<double> transform(std::span<const double> p) {
  if (p.size() < 3) throw ValidationError("transform: need at least 3 coordinates");
  for (double c : p) {
    if (!(c > 0.0)) throw BoundaryError("transform: boundary point maps to infinity");
  }
  const double last = std::log(p.back());
  std::vector<double> out(p.size() - 1);
  for (std::size_t i = 0; i + 1 < p.size(); ++i) out[i] = std::log(p[i]) - last;
  return out;
}

std::vector<double> transform(const SimplexPoint& p) { return transform(p.coords()); }

SimplexPoint inverse_transform(std::span<const double> v) {
  if (v.size() < 2) throw ValidationError("inverse_transform: need at least 2 entries");
  for (double e : v) {
    if (!std::isfinite(e)) throw ValidationError("inverse_transform: non-finite entry");
  }
  std::vector<double> out(v.size() + 1);
  kernels::inverse_transform_into(v, out);
  for (double c : out) {
    if (!(c > 0.0)) throw BoundaryError("inverse_transform: coordinate underflowed to zero");
  }
  return SimplexPoint(std::move(out), "inverse_transform");
}

TransformedState to_transformed(const SystemState& state) {
  return TransformedState(transform(state.x), transform(state.w));
}

SystemState from_transformed(const TransformedState& ts) {
  return SystemState(inverse_transform(ts.y), inverse_transform(ts.z));
}

TransformedTangent transformed_field(const TransformedState& ts, const ModelParams& params) {
  params.validate();
  if (ts.strategies() != params.n) {
    throw ValidationError("transformed state has " + std::to_string(ts.strategies()) +
                          " strategies, model.n=" + std::to_string(params.n));
  }
  const std::size_t m = params.n - 1;
  const auto yz = concat(ts.y, ts.z);
  std::vector<double> d(2 * m);
  kernels::TransformedFieldEval{params}(yz, d);
  return {std::vector<double>(d.begin(), d.begin() + m), std::vector<double>(d.begin() + m, d.end())};
}

double conserved_quantity(std::span<const double> x, std::span<const double> w, double mu) {
  double c = 0.0;
  for (double v : x) {
    if (!(v > 0.0)) throw BoundaryError("barrier divergence: x has a non-positive coordinate");
    c -= std::log(v);
  }
  if (mu == 0.0) return c;
  double dw = 0.0;
  for (double v : w) {
    if (!(v > 0.0)) throw BoundaryError("barrier divergence: w has a non-positive coordinate");
    dw -= std::log(v);
  }
  return c + mu * dw;
}

double conserved_quantity(const SystemState& state, const ModelParams& params) {
  check_dims(state, params);
  return conserved_quantity(state.x.coords(), state.w.coords(), params.mu);
}

double conserved_quantity_transformed(std::span<const double> y, std::span<const double> z,
                                      double mu) {
  auto barrier = [](std::span<const double> v) {
    const double n = static_cast<double>(v.size() + 1);
    return n * kernels::log_partition(v) - std::accumulate(v.begin(), v.end(), 0.0);
  };
  return barrier(y) + mu * barrier(z);
}

}  // namespace rpsgame
