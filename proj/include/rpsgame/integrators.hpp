#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rpsgame/dynamics.hpp"
#include "rpsgame/simplex.hpp"

namespace rpsgame {

/// Runtime failure of a numerical integration (step underflow).
class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Method { FixedRk4, AdaptiveRk45 };
enum class Space { Simplex, Transformed };

std::string to_string(Method m);
std::string to_string(Space s);
Method parse_method(const std::string& s);
Space parse_space(const std::string& s);

struct IntegratorConfig {
  Method method = Method::AdaptiveRk45;
  Space space = Space::Transformed;
  double t_end = 100.0;
  /// Fixed step for rk4, initial step for the adaptive method.
  double dt = 1e-3;
  double rtol = 1e-10;
  double atol = 1e-10;
  double max_step = 0.5;
  double sample_interval = 0.01;
  /// Tripwire, never a projection: a recorded coordinate below it aborts.
  /// w is only checked when some feedback strength is positive.
  double boundary_floor = 1e-12;
  bool renormalize_field = false;

  void validate() const;
};

/// Smallest adaptive step before the integration is abandoned.
inline constexpr double kMinAdaptiveStep = 1e-14;

/// Autonomous vector field on a flat state vector.
using OdeField = std::function<void(std::span<const double>, std::span<double>)>;

/// Called at t = 0 and at every sample time with the state and the size of
/// the last accepted step (0 at t = 0).
using SampleObserver = std::function<void(double t, std::span<const double> y, double h)>;

/// Called after every accepted step; may modify the state in place and
/// returns true when it did.
using PostStepHook = std::function<bool(std::span<double> y)>;

/// One classical fourth-order Runge-Kutta step.
std::vector<double> step_rk4(const OdeField& field, std::span<const double> y, double h);

/// One RK4 step of the coupled game. In simplex space x and w are divided by
/// their sums afterwards; in transformed space the step is taken on (y, z)
/// and mapped back. Throws BoundaryError if a coordinate ends below `floor`.
SystemState step_rk4(const SystemState& state, const ModelParams& params, double h,
                     Space space = Space::Simplex, double floor = 1e-12);

/// Integrates `field` from t = 0 to cfg.t_end, landing exactly on every
/// sample time (multiples of cfg.sample_interval, plus t_end). The adaptive
/// method is Dormand-Prince 5(4) with max-norm error control against
/// atol + rtol |y_i|, safety 0.9 and step-ratio clamp [0.2, 5].
void integrate_ode(const OdeField& field, std::vector<double> y0, const IntegratorConfig& cfg,
                   const SampleObserver& observe, const PostStepHook& post = {});

/// Sampled orbit of the coupled game, always stored in simplex coordinates.
class Trajectory {
 public:
  Trajectory(ModelParams params, IntegratorConfig config, SystemState initial);

  std::size_t size() const { return times_.size(); }
  std::size_t strategies() const { return params_.n; }

  std::span<const double> times() const { return times_; }
  std::span<const double> conserved() const { return conserved_; }
  std::span<const double> steps() const { return steps_; }
  std::span<const double> x(std::size_t k) const;
  std::span<const double> w(std::size_t k) const;
  /// Validated copy of sample k.
  SystemState state(std::size_t k) const;

  const ModelParams& params() const { return params_; }
  const IntegratorConfig& config() const { return config_; }
  const SystemState& initial() const { return initial_; }

  /// Appends a sample; times must increase strictly.
  void append(double t, std::span<const double> x, std::span<const double> w, double c, double h);

 private:
  ModelParams params_;
  IntegratorConfig config_;
  SystemState initial_;
  std::vector<double> times_;
  std::vector<double> x_;
  std::vector<double> w_;
  std::vector<double> conserved_;
  std::vector<double> steps_;
};

/// Integrates the coupled game. Throws BoundaryError ("boundary approach")
/// when a recorded coordinate drops below cfg.boundary_floor and
/// IntegrationError on step underflow. The t=0 sample holds state0 itself.
Trajectory integrate(const SystemState& state0, const ModelParams& params,
                     const IntegratorConfig& cfg);

/// The field integrate() uses for the given space (renormalized if asked).
OdeField make_field(const ModelParams& params, Space space, bool renormalize = false);

/// Flat integration vector for a state: [x | w] or [y | z].
std::vector<double> pack_state(const SystemState& state, Space space);

/// Central-difference divergence of `field` at `point`, step h per coordinate.
double divergence_fd(const OdeField& field, std::span<const double> point, double h = 1e-6);

/// Trapezoidal integral over the samples of the finite-difference divergence
/// of the transformed field, i.e. the log phase-volume change along the orbit.
double jacobian_trace_along(const Trajectory& traj, const ModelParams& params);

/// Same estimator for an arbitrary field on transformed coordinates.
double jacobian_trace_along(const Trajectory& traj, const OdeField& transformed);

}  // namespace rpsgame
