#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "rpsgame/integrators.hpp"
#include "rpsgame/simplex.hpp"

namespace rpsgame {

/// Thrown when an ensemble cloud has a singular covariance.
class DegenerateEnsemble : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RecurrenceConfig {
  double epsilon = 0.05;
  double t_min = 1.0;
  std::size_t max_returns = 1000;

  void validate() const;
};

struct TimedDistance {
  double time = 0.0;
  double distance = 0.0;
};

struct DriftStats {
  double max_rel = 0.0;
  double rms_rel = 0.0;
};

struct RecurrenceReport {
  SystemState reference;
  /// One entry per maximal run of samples closer than epsilon, located at
  /// the run's closest sample.
  std::vector<TimedDistance> returns;
  /// Closest approach over t > t_min; empty only if no sample passes t_min.
  std::optional<TimedDistance> global_min;
  DriftStats drift;
};

/// Euclidean distance between (x, w) and (x', w'), concatenated.
double state_distance(std::span<const double> xa, std::span<const double> wa,
                      std::span<const double> xb, std::span<const double> wb);

/// Scans the samples after t_min for returns to the initial state.
RecurrenceReport recurrence_scan(const Trajectory& traj, const RecurrenceConfig& cfg);

/// Max and RMS of |C(t) - C(0)| / |C(0)|, with C re-evaluated from the
/// recorded states using params.mu.
DriftStats drift_stats(const Trajectory& traj, const ModelParams& params);

/// Same, using the C column recorded during integration.
DriftStats drift_stats(std::span<const double> conserved);

struct VolumeSeries {
  std::vector<double> times;
  std::vector<double> log_volume;
};

/// Integrates a cloud of nearby states jointly (one shared step sequence)
/// in transformed coordinates and returns log det of the cloud covariance at
/// each sample time. Requires at least 2(n-1)+1 points within 1e-3 of each
/// other in transformed coordinates.
VolumeSeries ensemble_spread(const std::vector<SystemState>& states0, const ModelParams& params,
                             const IntegratorConfig& cfg);

/// Same for an arbitrary field acting on points of dimension d; `cloud`
/// holds the points in the field's coordinates.
VolumeSeries ensemble_spread(const std::vector<std::vector<double>>& cloud, const OdeField& field,
                             const IntegratorConfig& cfg);

/// log det of the sample covariance of `points` (each of equal dimension).
/// Throws DegenerateEnsemble when it is not positive definite.
double log_covariance_volume(const std::vector<std::vector<double>>& points);

}  // namespace rpsgame
