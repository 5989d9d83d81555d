#include "rpsgame/analysis.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cmath>
#include <string>

#include "rpsgame/dynamics.hpp"

namespace rpsgame {

void RecurrenceConfig::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw ValidationError("recurrence.epsilon: must be > 0");
  }
  if (!(t_min > 0.0) || !std::isfinite(t_min)) {
    throw ValidationError("recurrence.t_min: must be > 0");
  }
}

double state_distance(std::span<const double> xa, std::span<const double> wa,
                      std::span<const double> xb, std::span<const double> wb) {
  double sq = 0.0;
  for (std::size_t i = 0; i < xa.size(); ++i) sq += (xa[i] - xb[i]) * (xa[i] - xb[i]);
  for (std::size_t i = 0; i < wa.size(); ++i) sq += (wa[i] - wb[i]) * (wa[i] - wb[i]);
  return std::sqrt(sq);
}

DriftStats drift_stats(std::span<const double> conserved) {
  if (conserved.empty()) throw ValidationError("drift_stats: empty trajectory");
  const double c0 = conserved.front();
  if (!(std::abs(c0) > 0.0) || !std::isfinite(c0)) {
    throw ValidationError("drift_stats: initial conserved quantity is zero or non-finite");
  }
  DriftStats out;
  double sq = 0.0;
  for (double c : conserved) {
    const double rel = std::abs(c - c0) / std::abs(c0);
    out.max_rel = std::max(out.max_rel, rel);
    sq += rel * rel;
  }
  out.rms_rel = std::sqrt(sq / static_cast<double>(conserved.size()));
  return out;
}

DriftStats drift_stats(const Trajectory& traj, const ModelParams& params) {
  std::vector<double> c(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    c[k] = conserved_quantity(traj.x(k), traj.w(k), params.mu);
  }
  return drift_stats(c);
}

RecurrenceReport recurrence_scan(const Trajectory& traj, const RecurrenceConfig& cfg) {
  cfg.validate();
  if (traj.size() == 0) throw ValidationError("recurrence_scan: empty trajectory");
  RecurrenceReport report{traj.state(0), {}, std::nullopt, drift_stats(traj.conserved())};
  const auto x0 = traj.x(0);
  const auto w0 = traj.w(0);
  const auto times = traj.times();

  std::optional<TimedDistance> open;  // closest sample of the current sub-epsilon run
  for (std::size_t k = 0; k < traj.size(); ++k) {
    if (!(times[k] > cfg.t_min)) continue;
    const TimedDistance here{times[k], state_distance(traj.x(k), traj.w(k), x0, w0)};
    if (!report.global_min || here.distance < report.global_min->distance) {
      report.global_min = here;
    }
    if (here.distance < cfg.epsilon) {
      if (!open || here.distance < open->distance) open = here;
    } else if (open) {
      if (report.returns.size() < cfg.max_returns) report.returns.push_back(*open);
      open.reset();
    }
  }
  if (open && report.returns.size() < cfg.max_returns) report.returns.push_back(*open);
  return report;
}

double log_covariance_volume(const std::vector<std::vector<double>>& points) {
  if (points.size() < 2) throw DegenerateEnsemble("degenerate ensemble: fewer than 2 points");
  const auto d = static_cast<Eigen::Index>(points.front().size());
  const auto m = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd data(m, d);
  for (Eigen::Index r = 0; r < m; ++r) {
    if (static_cast<Eigen::Index>(points[r].size()) != d) {
      throw ValidationError("ensemble: points have different dimensions");
    }
    data.row(r) = Eigen::Map<const Eigen::RowVectorXd>(points[r].data(), d);
  }
  const Eigen::MatrixXd centered = data.rowwise() - data.colwise().mean();
  const Eigen::MatrixXd cov = centered.adjoint() * centered / static_cast<double>(m - 1);
  const Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw DegenerateEnsemble("degenerate ensemble: covariance is not positive definite");
  }
  const Eigen::VectorXd diag = llt.matrixL().toDenseMatrix().diagonal();
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    if (!(diag(i) > 0.0)) throw DegenerateEnsemble("degenerate ensemble: singular covariance");
    logdet += 2.0 * std::log(diag(i));
  }
  return logdet;
}

VolumeSeries ensemble_spread(const std::vector<std::vector<double>>& cloud, const OdeField& field,
                             const IntegratorConfig& cfg) {
  if (cloud.empty()) throw ValidationError("ensemble: empty cloud");
  const std::size_t d = cloud.front().size();
  const std::size_t m = cloud.size();
  if (m < d + 1) {
    throw ValidationError("ensemble: need at least " + std::to_string(d + 1) + " points, got " +
                          std::to_string(m));
  }
  std::vector<double> joint;
  joint.reserve(m * d);
  for (const auto& p : cloud) {
    if (p.size() != d) throw ValidationError("ensemble: points have different dimensions");
    joint.insert(joint.end(), p.begin(), p.end());
  }
  log_covariance_volume(cloud);  // rejects degenerate clouds before integrating

  OdeField stacked = [&field, d, m](std::span<const double> in, std::span<double> out) {
    for (std::size_t k = 0; k < m; ++k) field(in.subspan(k * d, d), out.subspan(k * d, d));
  };

  VolumeSeries series;
  std::vector<std::vector<double>> points(m, std::vector<double>(d));
  SampleObserver observe = [&](double t, std::span<const double> y, double) {
    for (std::size_t k = 0; k < m; ++k) {
      std::copy(y.begin() + k * d, y.begin() + (k + 1) * d, points[k].begin());
    }
    series.times.push_back(t);
    series.log_volume.push_back(log_covariance_volume(points));
  };
  integrate_ode(stacked, std::move(joint), cfg, observe);
  return series;
}

VolumeSeries ensemble_spread(const std::vector<SystemState>& states0, const ModelParams& params,
                             const IntegratorConfig& cfg) {
  params.validate();
  const std::size_t needed = 2 * (params.n - 1) + 1;
  if (states0.size() < needed) {
    throw ValidationError("ensemble: need at least " + std::to_string(needed) +
                          " initial states, got " + std::to_string(states0.size()));
  }
  std::vector<std::vector<double>> cloud;
  for (const auto& s : states0) {
    if (s.size() != params.n) throw ValidationError("ensemble: state dimension mismatch");
    cloud.push_back(pack_state(s, Space::Transformed));
  }
  for (std::size_t a = 0; a < cloud.size(); ++a) {
    for (std::size_t b = a + 1; b < cloud.size(); ++b) {
      double sq = 0.0;
      for (std::size_t i = 0; i < cloud[a].size(); ++i) {
        sq += (cloud[a][i] - cloud[b][i]) * (cloud[a][i] - cloud[b][i]);
      }
      if (std::sqrt(sq) > 1e-3) {
        throw ValidationError("ensemble: initial points farther than 1e-3 apart in transformed "
                              "coordinates");
      }
    }
  }
  IntegratorConfig joint_cfg = cfg;
  joint_cfg.space = Space::Transformed;
  return ensemble_spread(cloud, make_field(params, Space::Transformed, cfg.renormalize_field),
                         joint_cfg);
}

}  // namespace rpsgame
