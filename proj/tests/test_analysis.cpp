#include <doctest.h>

#include <cmath>

#include "rpsgame/analysis.hpp"
#include "rpsgame/random.hpp"

using namespace rpsgame;

namespace {

ModelParams params(std::size_t n, double mu) {
  ModelParams p;
  p.n = n;
  p.mu = mu;
  return p;
}

IntegratorConfig cfg(double t_end, double tol = 1e-10) {
  IntegratorConfig c;
  c.t_end = t_end;
  c.rtol = c.atol = tol;
  c.sample_interval = 0.01;
  return c;
}

// Hand-built trajectory: x moves along a fixed path, w stays uniform.
Trajectory synthetic(const std::vector<double>& times, const std::vector<double>& first) {
  const auto p = params(3, 0.0);
  Trajectory t(p, IntegratorConfig{}, SystemState::uniform(3));
  const std::vector<double> w(3, 1.0 / 3.0);
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double a = first[k];
    const std::vector<double> x{a, (1.0 - a) / 2.0, (1.0 - a) / 2.0};
    t.append(times[k], x, w, conserved_quantity(x, w, 0.0), 0.1);
  }
  return t;
}

}  // namespace

TEST_CASE("recurrence config validation") {
  RecurrenceConfig rc;
  CHECK_NOTHROW(rc.validate());
  rc.epsilon = 0.0;
  CHECK_THROWS_WITH(rc.validate(), doctest::Contains("epsilon"));
  rc = {};
  rc.t_min = 0.0;
  CHECK_THROWS_WITH(rc.validate(), doctest::Contains("t_min"));
}

TEST_CASE("recurrence scan on synthetic trajectories") {
  // distance to the start is |a - a0| * sqrt(1.5)
  const std::vector<double> times{0, 1, 2, 3, 4, 5, 6, 7, 8};
  const std::vector<double> first{0.5, 0.7, 0.52, 0.505, 0.53, 0.7, 0.51, 0.7, 0.501};
  const auto traj = synthetic(times, first);
  RecurrenceConfig rc;
  rc.epsilon = 0.05;
  rc.t_min = 1.5;
  const auto r = recurrence_scan(traj, rc);
  const double s = std::sqrt(1.5);
  REQUIRE(r.returns.size() == 3);
  CHECK(r.returns[0].time == 3.0);  // run {2,3,4} collapses to its closest sample
  CHECK(r.returns[0].distance == doctest::Approx(0.005 * s));
  CHECK(r.returns[1].time == 6.0);
  CHECK(r.returns[2].time == 8.0);  // a run still open at the end counts
  REQUIRE(r.global_min);
  CHECK(r.global_min->time == 8.0);
  CHECK(r.global_min->distance == doctest::Approx(0.001 * s));

  // soundness: every reported distance is recomputable from the samples
  for (const auto& ret : r.returns) {
    const auto k = static_cast<std::size_t>(ret.time);
    CHECK(ret.distance == state_distance(traj.x(k), traj.w(k), traj.x(0), traj.w(0)));
    CHECK(ret.distance < rc.epsilon);
  }

  rc.max_returns = 2;
  CHECK(recurrence_scan(traj, rc).returns.size() == 2);

  rc = {};
  rc.epsilon = 0.0005;  // below the global minimum
  rc.t_min = 1.5;
  const auto none = recurrence_scan(traj, rc);
  CHECK(none.returns.empty());
  REQUIRE(none.global_min);
  CHECK(none.global_min->time == 8.0);
}

TEST_CASE("recurrence scan: equilibrium trajectory is one event") {
  IntegratorConfig c = cfg(10.0);
  c.sample_interval = 0.5;
  const auto traj = integrate(SystemState::uniform(3), params(3, 0.1), c);
  RecurrenceConfig rc;
  rc.t_min = 1.0;
  const auto r = recurrence_scan(traj, rc);
  REQUIRE(r.returns.size() == 1);
  CHECK(r.returns[0].time == 1.5);  // first sample after t_min
  CHECK(r.returns[0].distance == 0.0);
  CHECK(r.drift.max_rel == 0.0);
}

TEST_CASE("recurrence scan finds returns on the flagship problem") {
  const auto traj = integrate(random_interior_state(42, 3), params(3, 0.1), cfg(1000.0));
  RecurrenceConfig rc;
  const auto r = recurrence_scan(traj, rc);
  CHECK(r.returns.size() >= 1);
  CHECK(r.drift.max_rel < 1e-8);
  // identical input, identical report
  const auto again = recurrence_scan(traj, rc);
  REQUIRE(again.returns.size() == r.returns.size());
  for (std::size_t i = 0; i < r.returns.size(); ++i) {
    CHECK(again.returns[i].time == r.returns[i].time);
    CHECK(again.returns[i].distance == r.returns[i].distance);
  }
}

TEST_CASE("drift statistics") {
  const auto eq = integrate(SystemState::uniform(5), params(5, 0.4), cfg(20.0));
  const auto d0 = drift_stats(eq, params(5, 0.4));
  CHECK(d0.max_rel < 1e-15);
  CHECK(d0.rms_rel < 1e-15);

  const auto st = random_interior_state(8, 3);
  const auto loose = integrate(st, params(3, 0.1), cfg(200.0, 1e-6));
  const auto tight = integrate(st, params(3, 0.1), cfg(200.0, 1e-12));
  const auto dl = drift_stats(loose, params(3, 0.1));
  const auto dt = drift_stats(tight, params(3, 0.1));
  CHECK(dt.max_rel <= dl.max_rel);
  CHECK(dt.rms_rel <= dt.max_rel);

  // exploration mode: reported, not asserted
  auto e = params(3, 0.1);
  e.mu_per_matrix = std::vector<double>{0.05, 0.1, 0.15};
  const auto ex = integrate(st, e, cfg(100.0));
  const auto de = drift_stats(ex, e);
  CHECK(std::isfinite(de.max_rel));
  MESSAGE("exploration-mode drift of the reference barrier: " << de.max_rel);

  CHECK_THROWS_AS(drift_stats(std::vector<double>{}), ValidationError);
  CHECK_THROWS_AS(drift_stats(std::vector<double>{0.0, 1.0}), ValidationError);
}

TEST_CASE("ensemble spread") {
  const std::size_t n = 3;
  const auto p = params(n, 0.1);
  const auto center = random_interior_state(42, n);
  const auto c0 = pack_state(center, Space::Transformed);

  auto cloud_states = [&](double jitter, std::size_t count) {
    std::vector<SystemState> out;
    SeededSampler s(99);
    for (std::size_t k = 0; k < count; ++k) {
      std::vector<double> y(c0.begin(), c0.begin() + (n - 1)), z(c0.begin() + (n - 1), c0.end());
      for (auto& v : y) v += jitter * (s.uniform() - 0.5);
      for (auto& v : z) v += jitter * (s.uniform() - 0.5);
      out.push_back(from_transformed(TransformedState(y, z)));
    }
    return out;
  };

  SUBCASE("small cloud keeps its log volume") {
    IntegratorConfig c = cfg(5.0, 1e-12);
    c.sample_interval = 0.1;
    const auto series = ensemble_spread(cloud_states(1e-6, 8), p, c);
    REQUIRE(series.times.size() == series.log_volume.size());
    CHECK(series.times.size() == 51);
    for (std::size_t k = 0; k < series.times.size(); ++k) {
      CHECK(std::abs(series.log_volume[k] - series.log_volume[0]) <= 1e-3 * 5.0);
    }
  }
  SUBCASE("contracting field shrinks the cloud") {
    std::vector<std::vector<double>> cloud;
    for (const auto& s : cloud_states(1e-3, 6)) cloud.push_back(pack_state(s, Space::Transformed));
    const OdeField contract = [](std::span<const double> in, std::span<double> out) {
      for (std::size_t i = 0; i < in.size(); ++i) out[i] = -in[i];
    };
    IntegratorConfig c = cfg(1.0, 1e-10);
    c.sample_interval = 0.1;
    const auto series = ensemble_spread(cloud, contract, c);
    for (std::size_t k = 1; k < series.log_volume.size(); ++k) {
      CHECK(series.log_volume[k] < series.log_volume[k - 1]);
    }
    // exact for a linear flow: log det scales by 2 * trace * t
    CHECK(series.log_volume.back() - series.log_volume.front() ==
          doctest::Approx(-2.0 * 4.0).epsilon(1e-6));
  }
  SUBCASE("preconditions") {
    IntegratorConfig c = cfg(1.0);
    CHECK_THROWS_AS(ensemble_spread(cloud_states(1e-6, 4), p, c), ValidationError);
    CHECK_THROWS_AS(ensemble_spread(cloud_states(1e-2, 8), p, c), ValidationError);
    std::vector<SystemState> same(8, center);
    CHECK_THROWS_AS(ensemble_spread(same, p, c), DegenerateEnsemble);
  }
}
