#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <sys/wait.h>

#include "rpsgame/commands.hpp"
#include "rpsgame/config.hpp"
#include "rpsgame/random.hpp"
#include "rpsgame/trajectory_io.hpp"

using namespace rpsgame;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "rpsgame");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("rpsgame_tests_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

Trajectory short_run(std::size_t n, double mu) {
  ModelParams p;
  p.n = n;
  p.mu = mu;
  IntegratorConfig c;
  c.t_end = 2.0;
  c.sample_interval = 0.25;
  return integrate(random_interior_state(5, n), p, c);
}

}  // namespace

TEST_CASE("random initial states") {
  CHECK(std::string(kGeneratorSpec) == "mt19937_64/top53-uniform/exp-normalize v1");

  SUBCASE("deterministic in the seed") {
    const auto a = random_interior_state(42, 5);
    const auto b = random_interior_state(42, 5);
    const auto c = random_interior_state(43, 5);
    CHECK(std::ranges::equal(a.x.coords(), b.x.coords()));
    CHECK(std::ranges::equal(a.w.coords(), b.w.coords()));
    CHECK_FALSE(std::ranges::equal(a.x.coords(), c.x.coords()));
  }
  SUBCASE("matches an independent implementation of the documented generator") {
    std::mt19937_64 g(42);
    auto draw = [&g] {
      for (;;) {
        std::vector<double> v(4);
        double s = 0.0;
        for (auto& e : v) {
          const double u = std::ldexp(static_cast<double>(g() >> 11), -53);
          e = -std::log1p(-u);
          s += e;
        }
        for (auto& e : v) e /= s;
        if (*std::min_element(v.begin(), v.end()) >= kMinRandomCoordinate) return v;
      }
    };
    const auto x = draw();
    const auto w = draw();
    const auto s = random_interior_state(42, 4);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(s.x[i] == doctest::Approx(x[i]).epsilon(1e-15));
      CHECK(s.w[i] == doctest::Approx(w[i]).epsilon(1e-15));
    }
  }
  SUBCASE("interior and flat-Dirichlet distributed") {
    const std::size_t n = 4, draws = 10000;
    std::vector<double> mean(n, 0.0);
    for (std::uint64_t seed = 0; seed < draws; ++seed) {
      const auto s = random_interior_state(seed, n);
      CHECK(s.x.min_coord() >= kMinRandomCoordinate);
      CHECK(s.w.min_coord() >= kMinRandomCoordinate);
      double sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) sum += s.x[i];
      CHECK(std::abs(sum - 1.0) <= 1e-12);
      for (std::size_t i = 0; i < n; ++i) mean[i] += s.x[i] / draws;
    }
    // Dirichlet(1,..,1): mean 1/n, variance (n-1)/(n^2 (n+1))
    const double nd = static_cast<double>(n);
    const double se = std::sqrt((nd - 1.0) / (nd * nd * (nd + 1.0)) / draws);
    for (double m : mean) CHECK(std::abs(m - 1.0 / nd) < 3.0 * se);
  }
}

TEST_CASE("config parsing") {
  RunConfig cfg;
  apply_json(cfg, json::parse(R"({
    "model": {"n": 4, "mu": 0.3, "amplitude": 2.0},
    "integrator": {"method": "fixed-rk4", "space": "simplex", "t_end": 7, "dt": 0.01},
    "recurrence": {"epsilon": 0.02},
    "init": {"seed": 9},
    "output": {"path": "a.jsonl", "format": "jsonl"},
    "sweep": {"mu_values": [0.0, 0.5]}
  })"));
  CHECK(cfg.model.n == 4);
  CHECK(cfg.model.mu == 0.3);
  CHECK(cfg.model.amplitude == 2.0);
  CHECK(cfg.integrator.method == Method::FixedRk4);
  CHECK(cfg.integrator.space == Space::Simplex);
  CHECK(cfg.integrator.t_end == 7.0);
  CHECK(cfg.recurrence_or_default().epsilon == 0.02);
  CHECK(cfg.init.seed == 9u);
  CHECK(cfg.output.format == OutputFormat::Jsonl);
  CHECK(cfg.sweep_mu == std::vector<double>{0.0, 0.5});
  CHECK_NOTHROW(cfg.validate());

  // echo round trip
  RunConfig again;
  apply_json(again, to_json(cfg));
  CHECK(to_json(again) == to_json(cfg));

  SUBCASE("unknown keys name their path") {
    RunConfig c;
    CHECK_THROWS_WITH_AS(apply_json(c, json::parse(R"({"model": {"nn": 3}})")),
                         doctest::Contains("model.nn"), ValidationError);
    CHECK_THROWS_WITH_AS(apply_json(c, json::parse(R"({"extra": 1})")),
                         doctest::Contains("extra"), ValidationError);
  }
  SUBCASE("type mismatches name their path") {
    RunConfig c;
    CHECK_THROWS_WITH_AS(apply_json(c, json::parse(R"({"integrator": {"t_end": "long"}})")),
                         doctest::Contains("integrator.t_end"), ValidationError);
  }
  SUBCASE("per-edge amplitudes are rejected") {
    RunConfig c;
    CHECK_THROWS_WITH_AS(apply_json(c, json::parse(R"({"model": {"amplitudes": [1, 2, 3]}})")),
                         doctest::Contains("model.amplitudes"), ValidationError);
  }
  SUBCASE("range checks") {
    RunConfig c;
    c.model.n = 2;
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("model.n"), ValidationError);
    c = {};
    c.model.mu = -0.1;
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("model.mu"), ValidationError);
    c = {};
    c.integrator.t_end = 0.0;
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("integrator.t_end"), ValidationError);
    c = {};
    c.model.mu_per_matrix = std::vector<double>{0.1, 0.2};
    CHECK_THROWS_AS(c.validate(), ValidationError);
  }
  SUBCASE("explicit initial state: near-unit sums renormalized, others rejected") {
    RunConfig c;
    apply_json(c, json::parse(R"({"init": {"x0": [0.2, 0.3, 0.5000000001], "w0": [0.3, 0.3, 0.4]}})"));
    const auto s = c.initial_state();
    CHECK(std::abs(s.x[0] + s.x[1] + s.x[2] - 1.0) <= 1e-15);
    apply_json(c, json::parse(R"({"init": {"x0": [0.2, 0.3, 0.51], "w0": [0.3, 0.3, 0.4]}})"));
    CHECK_THROWS_AS(c.initial_state(), ValidationError);
    apply_json(c, json::parse(R"({"init": {"x0": [0.2, 0.3, 0.5], "w0": [0.0, 0.6, 0.4]}})"));
    CHECK_THROWS_AS(c.initial_state(), ValidationError);
    CHECK_THROWS_AS(apply_json(c, json::parse(R"({"init": {"x0": [0.2, 0.3, 0.5]}})")),
                    ValidationError);
  }
  SUBCASE("config files allow comments") {
    const auto dir = scratch_dir("config");
    write_text(dir / "c.json", "// run\n{\"model\": {\"mu\": 0.25} /* strong */}\n");
    CHECK(parse_config_file((dir / "c.json").string()).model.mu == 0.25);
    write_text(dir / "bad.json", "{\"model\": ");
    CHECK_THROWS_AS(parse_config_file((dir / "bad.json").string()), ValidationError);
    CHECK_THROWS_AS(parse_config_file((dir / "missing.json").string()), ValidationError);
  }
}

TEST_CASE("trajectory CSV round trip") {
  const auto traj = short_run(3, 0.1);
  RunConfig cfg;
  std::ostringstream out;
  write_csv(traj, out, to_json(cfg));
  std::istringstream in(out.str());
  const auto table = read_csv(in);
  REQUIRE(table.n == 3);
  REQUIRE(table.size() == traj.size());
  CHECK(table.meta.at("format") == kTrajectoryFormat);
  CHECK(table.meta.at("generator") == kGeneratorSpec);
  CHECK(table.meta.at("model.mu") == "0.1");
  CHECK(table.meta.at("integrator.space") == "transformed");
  for (std::size_t k = 0; k < traj.size(); ++k) {
    CHECK(table.times[k] == traj.times()[k]);
    CHECK(table.conserved[k] == traj.conserved()[k]);
    CHECK(table.steps[k] == traj.steps()[k]);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(table.x[k * 3 + i] == traj.x(k)[i]);
      CHECK(table.w[k * 3 + i] == traj.w(k)[i]);
    }
  }
  CHECK(out.str().find("t,x1,x2,x3,w1,w2,w3,C,h\n") != std::string::npos);
}

TEST_CASE("trajectory CSV schema errors carry a line number") {
  const std::string good = "# format=rpsgame-trajectory-v1\nt,x1,x2,x3,w1,w2,w3,C,h\n";
  {
    std::istringstream in(good + "0,0.2,0.3,0.5,0.3,0.3,0.4,1,0\n0.5,0.2,0.3\n");
    CHECK_THROWS_WITH_AS(read_csv(in), doctest::Contains("line 4"), ValidationError);
  }
  {
    std::istringstream in("# format=rpsgame-trajectory-v1\nt,x1,x2,w1,w2,C,h\n");
    CHECK_THROWS_WITH_AS(read_csv(in), doctest::Contains("line 2"), ValidationError);
  }
  {
    std::istringstream in(good + "0,0.2,abc,0.5,0.3,0.3,0.4,1,0\n");
    CHECK_THROWS_WITH_AS(read_csv(in), doctest::Contains("line 3"), ValidationError);
  }
}

TEST_CASE("format_double is shortest round trip") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 3.625420552604762, -2.5e17}) {
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.1) == "0.1");
}

TEST_CASE("trajectory JSONL layout") {
  const auto traj = short_run(4, 1.0);
  std::ostringstream out;
  write_jsonl(traj, out, to_json(RunConfig{}));
  std::istringstream in(out.str());
  std::string line;
  REQUIRE(std::getline(in, line));
  const auto head = json::parse(line);
  CHECK(head["format"] == kTrajectoryFormat);
  CHECK(head["generator"] == kGeneratorSpec);
  CHECK(head["meta"]["model"]["n"] == 3);  // meta is passed through verbatim
  std::size_t k = 0;
  while (std::getline(in, line)) {
    const auto row = json::parse(line);
    REQUIRE(k < traj.size());
    CHECK(row["t"].get<double>() == traj.times()[k]);
    CHECK(row["x"].size() == 4);
    CHECK(row["w"][3].get<double>() == traj.w(k)[3]);
    CHECK(row["C"].get<double>() == traj.conserved()[k]);
    CHECK(row.contains("h"));
    ++k;
  }
  CHECK(k == traj.size());
}

TEST_CASE("command line") {
  SUBCASE("verify on defaults passes") {
    const auto r = cli({"verify", "--t-end", "20"});
    CHECK(r.code == kExitOk);
    const auto report = json::parse(r.out);
    CHECK(report["passed"] == true);
    CHECK(report["checks"].size() == 5);
  }
  SUBCASE("verification failure exits 2") {
    // a sloppy integrator with long steps cannot hold the invariant to 1e-8
    const auto r = cli({"verify", "--t-end", "20", "--rtol", "1e-3", "--atol", "1e-3",
                        "--sample-interval", "5"});
    CHECK(r.code == kExitVerifyFailed);
  }
  SUBCASE("validation errors exit 1") {
    CHECK(cli({"simulate", "--t-end", "0"}).code == kExitValidation);
    CHECK(cli({"simulate", "--n", "2"}).code == kExitValidation);
    CHECK(cli({"simulate", "--mu", "-1"}).code == kExitValidation);
    CHECK(cli({"simulate", "--space", "polar"}).code == kExitValidation);
    CHECK(cli({"simulate", "--config", "/nonexistent/rpsgame.json"}).code == kExitValidation);
    CHECK(cli({}).code == kExitValidation);
    const auto r = cli({"simulate", "--t-end", "-3"});
    CHECK(r.err.find("integrator.t_end") != std::string::npos);
  }
  SUBCASE("integration failures exit 3") {
    const auto dir = scratch_dir("floor");
    write_text(dir / "c.json", R"({"integrator": {"boundary_floor": 0.2, "t_end": 50}})");
    const auto r = cli({"simulate", "--config", (dir / "c.json").string(), "--out",
                        (dir / "t.csv").string()});
    CHECK(r.code == kExitRuntime);
    CHECK(r.err.find("integration failure") != std::string::npos);
  }
  SUBCASE("simulate writes a readable trajectory") {
    const auto dir = scratch_dir("simulate");
    const auto path = (dir / "run.csv").string();
    const auto r = cli({"simulate", "--t-end", "5", "--seed", "3", "--out", path});
    REQUIRE(r.code == kExitOk);
    std::ifstream in(path);
    const auto table = read_csv(in);
    CHECK(table.size() == 501);
    CHECK(table.meta.at("init.seed") == "3");
    CHECK(table.times.back() == 5.0);
  }
  SUBCASE("simulate to stdout as jsonl") {
    const auto r = cli({"simulate", "--t-end", "1", "--format", "jsonl"});
    REQUIRE(r.code == kExitOk);
    CHECK(json::parse(r.out.substr(0, r.out.find('\n')))["format"] == kTrajectoryFormat);
  }
  SUBCASE("recur reports returns") {
    const auto r = cli({"recur", "--t-end", "200", "--eps", "0.05"});
    REQUIRE(r.code == kExitOk);
    const auto report = json::parse(r.out);
    CHECK(report["epsilon"] == 0.05);
    CHECK(report["return_count"].get<std::size_t>() >= 1);
    CHECK(report["drift"]["max_rel"].get<double>() < 1e-8);
  }
  SUBCASE("sweep writes one trajectory and report per mu") {
    const auto dir = scratch_dir("sweep");
    const auto r = cli({"sweep", "--t-end", "50", "--out", (dir / "grid.csv").string()});
    REQUIRE(r.code == kExitOk);
    for (const char* mu : {"0", "0.1", "1"}) {
      const auto stem = dir / (std::string("grid_mu") + mu);
      REQUIRE(fs::exists(stem.string() + ".csv"));
      REQUIRE(fs::exists(stem.string() + ".report.json"));
      std::ifstream in(stem.string() + ".csv");
      const auto table = read_csv(in);
      CHECK(std::stod(table.meta.at("model.mu")) == std::stod(mu));
      CHECK(drift_stats(table.conserved).max_rel < 1e-8);
      const auto report = json::parse(std::ifstream(stem.string() + ".report.json"));
      CHECK(report["config"]["model"]["mu"].get<double>() == std::stod(mu));
    }
  }
  SUBCASE("sweep honours a custom grid") {
    const auto dir = scratch_dir("grid");
    const auto r = cli({"sweep", "--t-end", "5", "--mu-grid", "0.5,2", "--format", "jsonl",
                        "--out", (dir / "g").string()});
    REQUIRE(r.code == kExitOk);
    CHECK(fs::exists(dir / "g_mu0.5.jsonl"));
    CHECK(fs::exists(dir / "g_mu2.jsonl"));
  }
}

TEST_CASE("the built executable matches the in-process entry point") {
  const std::string cmd = std::string(RPSGAME_CLI_PATH) + " simulate --t-end 0 2>/dev/null";
  const int status = std::system(cmd.c_str());
  CHECK(WEXITSTATUS(status) == kExitValidation);
}
