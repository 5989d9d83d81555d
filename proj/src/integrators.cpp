#include "rpsgame/integrators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

namespace rpsgame {

std::string to_string(Method m) { return m == Method::FixedRk4 ? "fixed-rk4" : "adaptive-rk45"; }

std::string to_string(Space s) { return s == Space::Simplex ? "simplex" : "transformed"; }

Method parse_method(const std::string& s) {
  if (s == "fixed-rk4") return Method::FixedRk4;
  if (s == "adaptive-rk45") return Method::AdaptiveRk45;
  throw ValidationError("integrator.method: expected fixed-rk4 or adaptive-rk45, got '" + s + "'");
}

Space parse_space(const std::string& s) {
  if (s == "simplex") return Space::Simplex;
  if (s == "transformed") return Space::Transformed;
  throw ValidationError("integrator.space: expected simplex or transformed, got '" + s + "'");
}

void IntegratorConfig::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(t_end)) throw ValidationError("integrator.t_end: must be > 0");
  if (!positive(max_step)) throw ValidationError("integrator.max_step: must be > 0");
  if (!positive(dt) || dt > max_step) {
    throw ValidationError("integrator.dt: must satisfy 0 < dt <= max_step");
  }
  if (!(rtol > 0.0 && rtol < 1.0)) throw ValidationError("integrator.rtol: must lie in (0, 1)");
  if (!(atol > 0.0 && atol < 1.0)) throw ValidationError("integrator.atol: must lie in (0, 1)");
  if (!positive(sample_interval)) throw ValidationError("integrator.sample_interval: must be > 0");
  if (!(boundary_floor >= 0.0 && boundary_floor < 1.0)) {
    throw ValidationError("integrator.boundary_floor: must lie in [0, 1)");
  }
}

// ---------------------------------------------------------------------------

std::vector<double> step_rk4(const OdeField& field, std::span<const double> y, double h) {
  const std::size_t d = y.size();
  std::vector<double> k1(d), k2(d), k3(d), k4(d), tmp(d);
  field(y, k1);
  for (std::size_t i = 0; i < d; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
  field(tmp, k2);
  for (std::size_t i = 0; i < d; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
  field(tmp, k3);
  for (std::size_t i = 0; i < d; ++i) tmp[i] = y[i] + h * k3[i];
  field(tmp, k4);
  std::vector<double> out(d);
  for (std::size_t i = 0; i < d; ++i) {
    out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return out;
}

namespace {

void renormalize_halves(std::span<double> xw) {
  const std::size_t n = xw.size() / 2;
  for (auto half : {xw.first(n), xw.subspan(n)}) {
    const double sum = std::accumulate(half.begin(), half.end(), 0.0);
    for (double& v : half) v /= sum;
  }
}

void check_floor(std::span<const double> coords, double floor, const std::string& where) {
  for (double v : coords) {
    if (!(v >= floor)) {
      throw BoundaryError("boundary approach " + where + ": coordinate " +
                          std::to_string(v) + " below floor " + std::to_string(floor));
    }
  }
}

// Dormand-Prince 5(4) tableau. The fields are autonomous, so the stage
// times are not needed.
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                 b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
// Fifth- minus fourth-order weights.
constexpr double e1 = b1 - 5179.0 / 57600.0, e3 = b3 - 7571.0 / 16695.0, e4 = b4 - 393.0 / 640.0,
                 e5 = b5 - -92097.0 / 339200.0, e6 = b6 - 187.0 / 2100.0, e7 = -1.0 / 40.0;

constexpr double kSafety = 0.9;
constexpr double kMinFactor = 0.2;
constexpr double kMaxFactor = 5.0;

class DormandPrince {
 public:
  DormandPrince(const OdeField& f, std::size_t d)
      : f_(f), k1_(d), k2_(d), k3_(d), k4_(d), k5_(d), k6_(d), k7_(d), tmp_(d), y_new_(d) {}

  void prime(std::span<const double> y) { f_(y, k1_); }

  /// Attempts a step of size h from y; returns the scaled error norm.
  double attempt(std::span<const double> y, double h, double rtol, double atol) {
    const std::size_t d = y.size();
    for (std::size_t i = 0; i < d; ++i) tmp_[i] = y[i] + h * a21 * k1_[i];
    f_(tmp_, k2_);
    for (std::size_t i = 0; i < d; ++i) tmp_[i] = y[i] + h * (a31 * k1_[i] + a32 * k2_[i]);
    f_(tmp_, k3_);
    for (std::size_t i = 0; i < d; ++i) {
      tmp_[i] = y[i] + h * (a41 * k1_[i] + a42 * k2_[i] + a43 * k3_[i]);
    }
    f_(tmp_, k4_);
    for (std::size_t i = 0; i < d; ++i) {
      tmp_[i] = y[i] + h * (a51 * k1_[i] + a52 * k2_[i] + a53 * k3_[i] + a54 * k4_[i]);
    }
    f_(tmp_, k5_);
    for (std::size_t i = 0; i < d; ++i) {
      tmp_[i] = y[i] + h * (a61 * k1_[i] + a62 * k2_[i] + a63 * k3_[i] + a64 * k4_[i] +
                            a65 * k5_[i]);
    }
    f_(tmp_, k6_);
    for (std::size_t i = 0; i < d; ++i) {
      y_new_[i] = y[i] + h * (b1 * k1_[i] + b3 * k3_[i] + b4 * k4_[i] + b5 * k5_[i] + b6 * k6_[i]);
    }
    f_(y_new_, k7_);
    double err = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double est =
          h * (e1 * k1_[i] + e3 * k3_[i] + e4 * k4_[i] + e5 * k5_[i] + e6 * k6_[i] + e7 * k7_[i]);
      const double scale = atol + rtol * std::max(std::abs(y[i]), std::abs(y_new_[i]));
      const double e = std::abs(est) / scale;
      if (!std::isfinite(e) || !std::isfinite(y_new_[i])) {
        return std::numeric_limits<double>::infinity();
      }
      err = std::max(err, e);
    }
    return err;
  }

  /// Commits the last attempt into y (first-same-as-last reuse of k7).
  void accept(std::span<double> y) {
    std::copy(y_new_.begin(), y_new_.end(), y.begin());
    std::swap(k1_, k7_);
  }

 private:
  const OdeField& f_;
  std::vector<double> k1_, k2_, k3_, k4_, k5_, k6_, k7_, tmp_, y_new_;
};

bool feedback_active(const ModelParams& params) {
  for (std::size_t i = 0; i < params.n; ++i) {
    if (params.mu_for(i) > 0.0) return true;
  }
  return false;
}

double sample_time(std::size_t k, std::size_t count, const IntegratorConfig& cfg) {
  return k + 1 >= count ? cfg.t_end : static_cast<double>(k) * cfg.sample_interval;
}

}  // namespace

SystemState step_rk4(const SystemState& state, const ModelParams& params, double h, Space space,
                     double floor) {
  if (!(h > 0.0)) throw ValidationError("step_rk4: h must be > 0");
  const auto field = make_field(params, space);
  auto next = step_rk4(field, pack_state(state, space), h);
  const std::size_t n = params.n;
  std::vector<double> x(n), w(n);
  if (space == Space::Simplex) {
    renormalize_halves(next);
    std::copy(next.begin(), next.begin() + n, x.begin());
    std::copy(next.begin() + n, next.end(), w.begin());
  } else {
    kernels::inverse_transform_into(std::span(next).first(n - 1), x);
    kernels::inverse_transform_into(std::span(next).subspan(n - 1), w);
  }
  check_floor(x, floor, "after rk4 step");
  if (feedback_active(params)) check_floor(w, floor, "after rk4 step");
  return SystemState(SimplexPoint(std::move(x), "x"), SimplexPoint(std::move(w), "w"));
}

void integrate_ode(const OdeField& field, std::vector<double> y, const IntegratorConfig& cfg,
                   const SampleObserver& observe, const PostStepHook& post) {
  cfg.validate();
  const std::size_t d = y.size();
  // Sample k sits at k * sample_interval; the final one is pinned to t_end.
  const auto count =
      static_cast<std::size_t>(std::ceil(cfg.t_end / cfg.sample_interval - 1e-9)) + 1;

  double t = 0.0;
  double last_h = 0.0;
  observe(0.0, y, 0.0);

  if (cfg.method == Method::FixedRk4) {
    for (std::size_t k = 1; k < count; ++k) {
      const double target = sample_time(k, count, cfg);
      while (t < target) {
        double h = cfg.dt;
        bool lands = false;
        if (t + 1.01 * h >= target) {
          h = target - t;
          lands = true;
        }
        y = step_rk4(field, y, h);
        if (post) post(y);
        t = lands ? target : t + h;
        last_h = h;
      }
      observe(t, y, last_h);
    }
    return;
  }

  DormandPrince dp(field, d);
  dp.prime(y);
  double h = cfg.dt;
  for (std::size_t k = 1; k < count; ++k) {
    const double target = sample_time(k, count, cfg);
    while (t < target) {
      double h_try = std::min(h, cfg.max_step);
      bool lands = false;
      if (t + 1.01 * h_try >= target) {
        h_try = target - t;
        lands = true;
      }
      const double err = dp.attempt(y, h_try, cfg.rtol, cfg.atol);
      if (!std::isfinite(err)) {
        h = h_try * kMinFactor;
      } else if (err <= 1.0) {
        dp.accept(y);
        if (post && post(y)) dp.prime(y);
        t = lands ? target : t + h_try;
        last_h = h_try;
        const double factor =
            err == 0.0 ? kMaxFactor
                       : std::clamp(kSafety * std::pow(err, -0.2), kMinFactor, kMaxFactor);
        // A step shortened to hit a sample time says nothing about the
        // natural step size, so it never shrinks the proposal.
        h = lands ? std::max(h, h_try * factor) : h_try * factor;
        h = std::min(h, cfg.max_step);
        continue;
      } else {
        h = h_try * std::max(kMinFactor, kSafety * std::pow(err, -0.2));
      }
      if (h < kMinAdaptiveStep) {
        throw IntegrationError("step underflow at t=" + std::to_string(t) +
                               ": adaptive step fell below 1e-14");
      }
    }
    observe(t, y, last_h);
  }
}

// ---------------------------------------------------------------------------

Trajectory::Trajectory(ModelParams params, IntegratorConfig config, SystemState initial)
    : params_(std::move(params)), config_(config), initial_(std::move(initial)) {}

std::span<const double> Trajectory::x(std::size_t k) const {
  return std::span(x_).subspan(k * params_.n, params_.n);
}

std::span<const double> Trajectory::w(std::size_t k) const {
  return std::span(w_).subspan(k * params_.n, params_.n);
}

SystemState Trajectory::state(std::size_t k) const {
  const auto xs = x(k);
  const auto ws = w(k);
  return SystemState(SimplexPoint({xs.begin(), xs.end()}, "x"),
                     SimplexPoint({ws.begin(), ws.end()}, "w"));
}

void Trajectory::append(double t, std::span<const double> x, std::span<const double> w, double c,
                        double h) {
  if (x.size() != params_.n || w.size() != params_.n) {
    throw ValidationError("trajectory: sample dimension mismatch");
  }
  if (times_.empty() ? t != 0.0 : !(t > times_.back())) {
    throw ValidationError("trajectory: sample times must start at 0 and increase strictly");
  }
  times_.push_back(t);
  x_.insert(x_.end(), x.begin(), x.end());
  w_.insert(w_.end(), w.begin(), w.end());
  conserved_.push_back(c);
  steps_.push_back(h);
}

OdeField make_field(const ModelParams& params, Space space, bool renormalize) {
  OdeField base;
  if (space == Space::Simplex) {
    base = [eval = kernels::SimplexFieldEval(params)](std::span<const double> in,
                                                     std::span<double> out) mutable {
      eval(in, out);
    };
  } else {
    base = [eval = kernels::TransformedFieldEval(params)](std::span<const double> in,
                                                         std::span<double> out) mutable {
      eval(in, out);
    };
  }
  if (!renormalize) return base;
  return [base](std::span<const double> in, std::span<double> out) {
    base(in, out);
    double sq = 0.0;
    for (double v : out) sq += v * v;
    const double scale = 1.0 / (std::sqrt(sq) + 1.0);
    for (double& v : out) v *= scale;
  };
}

std::vector<double> pack_state(const SystemState& state, Space space) {
  std::vector<double> out;
  if (space == Space::Simplex) {
    out.assign(state.x.coords().begin(), state.x.coords().end());
    out.insert(out.end(), state.w.coords().begin(), state.w.coords().end());
  } else {
    out = transform(state.x);
    const auto z = transform(state.w);
    out.insert(out.end(), z.begin(), z.end());
  }
  return out;
}

Trajectory integrate(const SystemState& state0, const ModelParams& params,
                     const IntegratorConfig& cfg) {
  params.validate();
  cfg.validate();
  if (state0.size() != params.n) {
    throw ValidationError("initial state has " + std::to_string(state0.size()) +
                          " strategies, model.n=" + std::to_string(params.n));
  }
  const std::size_t n = params.n;
  Trajectory traj(params, cfg, state0);
  std::vector<double> x(n), w(n);
  // Without feedback the barrier does not involve w, so nothing keeps w
  // off the boundary (for even n it drifts there); only x is policed then.
  const bool police_w = feedback_active(params);

  SampleObserver observe = [&](double t, std::span<const double> y, double h) {
    double c = 0.0;
    if (cfg.space == Space::Simplex) {
      std::copy(y.begin(), y.begin() + n, x.begin());
      std::copy(y.begin() + n, y.end(), w.begin());
      check_floor(x, cfg.boundary_floor, "at t=" + std::to_string(t));
      if (police_w) check_floor(w, cfg.boundary_floor, "at t=" + std::to_string(t));
      c = conserved_quantity(x, w, params.mu);
    } else {
      kernels::inverse_transform_into(y.first(n - 1), x);
      kernels::inverse_transform_into(y.subspan(n - 1), w);
      check_floor(x, cfg.boundary_floor, "at t=" + std::to_string(t));
      if (police_w) check_floor(w, cfg.boundary_floor, "at t=" + std::to_string(t));
      c = conserved_quantity_transformed(y.first(n - 1), y.subspan(n - 1), params.mu);
      if (t == 0.0) {  // record the caller's state, not its round trip
        std::copy(state0.x.coords().begin(), state0.x.coords().end(), x.begin());
        std::copy(state0.w.coords().begin(), state0.w.coords().end(), w.begin());
      }
    }
    traj.append(t, x, w, c, h);
  };

  PostStepHook post;
  if (cfg.space == Space::Simplex) {
    post = [](std::span<double> y) {
      renormalize_halves(y);
      return true;
    };
  }

  integrate_ode(make_field(params, cfg.space, cfg.renormalize_field), pack_state(state0, cfg.space),
                cfg, observe, post);
  return traj;
}

// ---------------------------------------------------------------------------

double divergence_fd(const OdeField& field, std::span<const double> point, double h) {
  const std::size_t d = point.size();
  std::vector<double> probe(point.begin(), point.end()), plus(d), minus(d);
  double div = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    probe[i] = point[i] + h;
    field(probe, plus);
    probe[i] = point[i] - h;
    field(probe, minus);
    probe[i] = point[i];
    div += (plus[i] - minus[i]) / (2.0 * h);
  }
  return div;
}

double jacobian_trace_along(const Trajectory& traj, const OdeField& transformed) {
  const auto times = traj.times();
  double total = 0.0;
  double prev = 0.0;
  std::vector<double> p;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    p = transform(traj.x(k));
    const auto z = transform(traj.w(k));
    p.insert(p.end(), z.begin(), z.end());
    const double div = divergence_fd(transformed, p);
    if (k > 0) total += 0.5 * (times[k] - times[k - 1]) * (div + prev);
    prev = div;
  }
  return total;
}

double jacobian_trace_along(const Trajectory& traj, const ModelParams& params) {
  return jacobian_trace_along(traj, make_field(params, Space::Transformed));
}

}  // namespace rpsgame
