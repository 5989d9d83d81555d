#include "rpsgame/commands.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "rpsgame/analysis.hpp"
#include "rpsgame/dynamics.hpp"
#include "rpsgame/random.hpp"
#include "rpsgame/trajectory_io.hpp"

namespace rpsgame {

using nlohmann::json;

namespace {

constexpr double kDriftThreshold = 1e-8;
constexpr double kDivergenceThreshold = 1e-6;
constexpr double kRoundTripThreshold = 1e-12;
constexpr double kEquilibriumThreshold = 1e-10;
constexpr double kTwoSpaceThreshold = 1e-6;
constexpr double kTwoSpaceHorizon = 10.0;
constexpr std::size_t kDivergenceSamples = 100;
constexpr std::size_t kRoundTripSamples = 1000;

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

json state_json(std::span<const double> x, std::span<const double> w) {
  return {{"x", std::vector<double>(x.begin(), x.end())},
          {"w", std::vector<double>(w.begin(), w.end())}};
}

json report_json(const RecurrenceReport& r, const RecurrenceConfig& rc) {
  json j;
  j["reference"] = state_json(r.reference.x.coords(), r.reference.w.coords());
  j["epsilon"] = rc.epsilon;
  j["t_min"] = rc.t_min;
  j["returns"] = json::array();
  for (const auto& ret : r.returns) j["returns"].push_back({{"t", ret.time}, {"distance", ret.distance}});
  j["return_count"] = r.returns.size();
  j["global_min"] = r.global_min ? json{{"t", r.global_min->time}, {"distance", r.global_min->distance}}
                                 : json(nullptr);
  j["drift"] = {{"max_rel", r.drift.max_rel}, {"rms_rel", r.drift.rms_rel}};
  return j;
}

void write_trajectory(const Trajectory& traj, const RunConfig& cfg, const std::string& path,
                      std::ostream& fallback) {
  const json meta = to_json(cfg);
  auto emit = [&](std::ostream& os) {
    if (cfg.output.format == OutputFormat::Csv) {
      write_csv(traj, os, meta);
    } else {
      write_jsonl(traj, os, meta);
    }
  };
  if (path.empty()) {
    emit(fallback);
    return;
  }
  std::ofstream out(path);
  if (!out) throw ValidationError("output.path: cannot write '" + path + "'");
  emit(out);
}

void write_json(const json& j, const std::string& path, std::ostream& fallback) {
  if (path.empty()) {
    fallback << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw ValidationError("output.path: cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

}  // namespace

json to_json(const CheckResult& c) {
  return {{"name", c.name},
          {"value", c.value},
          {"threshold", c.threshold},
          {"passed", c.passed},
          {"detail", c.detail}};
}

std::vector<CheckResult> run_verification(const RunConfig& cfg) {
  cfg.validate();
  const auto& params = cfg.model;
  const std::size_t n = params.n;
  const std::uint64_t seed = cfg.init.seed.value_or(0);
  std::vector<CheckResult> checks;

  {
    const auto traj = integrate(cfg.initial_state(), params, cfg.integrator);
    const auto drift = drift_stats(traj.conserved());
    CheckResult c{"conservation_drift", drift.max_rel, kDriftThreshold,
                  drift.max_rel < kDriftThreshold, "max relative drift of C over t_end"};
    if (params.exploration()) {
      c.passed = true;
      c.detail = "exploration mode: drift reported as a diagnostic only";
    }
    checks.push_back(c);
  }

  {
    SeededSampler sampler(seed);
    const auto field = make_field(params, Space::Transformed);
    double worst = 0.0;
    for (std::size_t k = 0; k < kDivergenceSamples; ++k) {
      SystemState s(sampler.simplex_point(n), sampler.simplex_point(n));
      worst = std::max(worst, std::abs(divergence_fd(field, pack_state(s, Space::Transformed))));
    }
    checks.push_back({"pointwise_divergence", worst, kDivergenceThreshold,
                      worst < kDivergenceThreshold, "max |div g| at random transformed states"});
  }

  {
    SeededSampler sampler(seed + 1);
    double worst = 0.0;
    for (std::size_t k = 0; k < kRoundTripSamples; ++k) {
      const auto p = sampler.simplex_point(n);
      const auto back = inverse_transform(transform(p));
      for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(back[i] - p[i]) / p[i]);
    }
    checks.push_back({"transform_round_trip", worst, kRoundTripThreshold,
                      worst < kRoundTripThreshold, "max relative coordinate error"});
  }

  {
    const auto uniform = SystemState::uniform(n);
    const auto traj = integrate(uniform, params, cfg.integrator);
    double worst = 0.0;
    for (std::size_t k = 0; k < traj.size(); ++k) {
      worst = std::max(worst, state_distance(traj.x(k), traj.w(k), uniform.x.coords(),
                                             uniform.w.coords()));
    }
    CheckResult c{"equilibrium_fixity", worst, kEquilibriumThreshold,
                  worst < kEquilibriumThreshold, "max distance from the uniform state"};
    if (params.exploration()) {
      c.passed = true;
      c.detail = "exploration mode: the uniform state is not an equilibrium; diagnostic only";
    }
    checks.push_back(c);
  }

  {
    IntegratorConfig ic = cfg.integrator;
    ic.t_end = kTwoSpaceHorizon;
    ic.rtol = std::min(ic.rtol, 1e-10);
    ic.atol = std::min(ic.atol, 1e-10);
    ic.sample_interval = kTwoSpaceHorizon;
    ic.space = Space::Simplex;
    const auto a = integrate(cfg.initial_state(), params, ic);
    ic.space = Space::Transformed;
    const auto b = integrate(cfg.initial_state(), params, ic);
    const std::size_t last = a.size() - 1;
    const double diff =
        std::max(max_abs_diff(a.x(last), b.x(last)), max_abs_diff(a.w(last), b.w(last)));
    checks.push_back({"two_space_consistency", diff, kTwoSpaceThreshold, diff < kTwoSpaceThreshold,
                      "max endpoint difference at t=10, simplex vs transformed"});
  }
  return checks;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const auto traj = integrate(cfg.initial_state(), cfg.model, cfg.integrator);
  write_trajectory(traj, cfg, cfg.output.path, log);
  if (!cfg.output.path.empty()) {
    const auto drift = drift_stats(traj.conserved());
    log << "wrote " << traj.size() << " samples to " << cfg.output.path
        << " (max relative C drift " << drift.max_rel << ")\n";
  }
  return kExitOk;
}

int cmd_verify(const RunConfig& cfg, std::ostream& log) {
  const auto checks = run_verification(cfg);
  json report{{"config", to_json(cfg)}, {"checks", json::array()}};
  bool all = true;
  for (const auto& c : checks) {
    report["checks"].push_back(to_json(c));
    all = all && c.passed;
  }
  report["passed"] = all;
  if (!cfg.output.path.empty()) {
    write_json(report, cfg.output.path, log);
    for (const auto& c : checks) {
      log << (c.passed ? "PASS " : "FAIL ") << c.name << " value=" << c.value
          << " threshold=" << c.threshold << '\n';
    }
  } else {
    write_json(report, "", log);
  }
  return all ? kExitOk : kExitVerifyFailed;
}

int cmd_recur(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const auto rc = cfg.recurrence_or_default();
  const auto traj = integrate(cfg.initial_state(), cfg.model, cfg.integrator);
  const auto report = recurrence_scan(traj, rc);
  json j = report_json(report, rc);
  j["config"] = to_json(cfg);
  write_json(j, cfg.output.path, log);
  if (!cfg.output.path.empty()) {
    log << report.returns.size() << " return event(s) within eps=" << rc.epsilon;
    if (report.global_min) {
      log << "; closest approach " << report.global_min->distance << " at t="
          << report.global_min->time;
    }
    log << '\n';
  }
  return kExitOk;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  if (cfg.sweep_mu.empty()) throw ValidationError("sweep.mu_values: must not be empty");
  const std::filesystem::path base(cfg.output.path.empty() ? "sweep" : cfg.output.path);
  const auto stem = (base.parent_path() / base.stem()).string();
  const std::string ext = cfg.output.format == OutputFormat::Csv ? ".csv" : ".jsonl";
  const auto rc = cfg.recurrence_or_default();
  const auto state0 = cfg.initial_state();
  for (double mu : cfg.sweep_mu) {
    RunConfig run = cfg;
    run.model.mu = mu;
    run.sweep_mu = {mu};
    const auto prefix = stem + "_mu" + format_double(mu);
    run.output.path = prefix + ext;
    const auto traj = integrate(state0, run.model, run.integrator);
    write_trajectory(traj, run, run.output.path, log);
    json j = report_json(recurrence_scan(traj, rc), rc);
    j["config"] = to_json(run);
    write_json(j, prefix + ".report.json", log);
    log << "mu=" << mu << ": " << traj.size() << " samples, max relative C drift "
        << j["drift"]["max_rel"].get<double>() << ", " << j["return_count"].get<std::size_t>()
        << " return event(s) -> " << run.output.path << '\n';
  }
  return kExitOk;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Coupled rock-paper-scissors replicator game with environmental feedback"};
  app.require_subcommand(1);

  struct Flags {
    std::string config;
    std::optional<std::size_t> n;
    std::optional<double> mu, amplitude, t_end, rtol, atol, eps, dt, sample_interval;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> space, method, out, format;
    std::vector<double> mu_grid;
  } flags;

  auto add_common = [&flags](CLI::App* sub) {
    sub->add_option("--config", flags.config, "JSON run configuration");
    sub->add_option("--n", flags.n, "number of strategies (>= 3)");
    sub->add_option("--mu", flags.mu, "feedback strength mu (>= 0)");
    sub->add_option("--amplitude", flags.amplitude, "payoff amplitude a (> 0)");
    sub->add_option("--t-end", flags.t_end, "integration horizon");
    sub->add_option("--rtol", flags.rtol, "adaptive relative tolerance");
    sub->add_option("--atol", flags.atol, "adaptive absolute tolerance");
    sub->add_option("--dt", flags.dt, "fixed / initial step");
    sub->add_option("--sample-interval", flags.sample_interval, "recording stride");
    sub->add_option("--space", flags.space, "integration space")
        ->check(CLI::IsMember({"simplex", "transformed"}));
    sub->add_option("--method", flags.method, "integration method")
        ->check(CLI::IsMember({"fixed-rk4", "adaptive-rk45"}));
    sub->add_option("--seed", flags.seed, "seed for the random initial state");
    sub->add_option("--eps", flags.eps, "recurrence radius");
    sub->add_option("--out", flags.out, "output path (stdout when omitted)");
    sub->add_option("--format", flags.format, "trajectory format")
        ->check(CLI::IsMember({"csv", "jsonl"}));
  };

  auto* simulate = app.add_subcommand("simulate", "integrate one trajectory and write it");
  auto* verify = app.add_subcommand("verify", "run the invariant checks");
  auto* recur = app.add_subcommand("recur", "integrate and scan for recurrences");
  auto* sweep = app.add_subcommand("sweep", "simulate + recurrence scan over a mu grid");
  for (auto* sub : {simulate, verify, recur, sweep}) add_common(sub);
  sweep->add_option("--mu-grid", flags.mu_grid, "mu values to sweep")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    RunConfig cfg = flags.config.empty() ? RunConfig{} : parse_config_file(flags.config);
    if (flags.n) cfg.model.n = *flags.n;
    if (flags.mu) cfg.model.mu = *flags.mu;
    if (flags.amplitude) cfg.model.amplitude = *flags.amplitude;
    if (flags.t_end) cfg.integrator.t_end = *flags.t_end;
    if (flags.rtol) cfg.integrator.rtol = *flags.rtol;
    if (flags.atol) cfg.integrator.atol = *flags.atol;
    if (flags.dt) cfg.integrator.dt = *flags.dt;
    if (flags.sample_interval) cfg.integrator.sample_interval = *flags.sample_interval;
    if (flags.space) cfg.integrator.space = parse_space(*flags.space);
    if (flags.method) cfg.integrator.method = parse_method(*flags.method);
    if (flags.seed) {
      cfg.init.seed = *flags.seed;
      cfg.init.x0.reset();
      cfg.init.w0.reset();
    }
    if (flags.eps) {
      auto rc = cfg.recurrence_or_default();
      rc.epsilon = *flags.eps;
      cfg.recurrence = rc;
    }
    if (flags.out) cfg.output.path = *flags.out;
    if (flags.format) cfg.output.format = parse_format(*flags.format);
    if (!flags.mu_grid.empty()) cfg.sweep_mu = flags.mu_grid;
    cfg.validate();

    if (*simulate) return cmd_simulate(cfg, out);
    if (*verify) return cmd_verify(cfg, out);
    if (*recur) return cmd_recur(cfg, out);
    return cmd_sweep(cfg, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const BoundaryError& e) {
    err << "integration failure: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const IntegrationError& e) {
    err << "integration failure: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const DegenerateEnsemble& e) {
    err << "integration failure: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace rpsgame
