#include "rpsgame/config.hpp"

#include <fstream>
#include <set>

#include "rpsgame/random.hpp"

namespace rpsgame {

using nlohmann::json;

std::string to_string(OutputFormat f) { return f == OutputFormat::Csv ? "csv" : "jsonl"; }

OutputFormat parse_format(const std::string& s) {
  if (s == "csv") return OutputFormat::Csv;
  if (s == "jsonl") return OutputFormat::Jsonl;
  throw ValidationError("output.format: expected csv or jsonl, got '" + s + "'");
}

void RunConfig::validate() const {
  model.validate();
  integrator.validate();
  if (recurrence) recurrence->validate();
  if (init.x0.has_value() != init.w0.has_value()) {
    throw ValidationError("init: x0 and w0 must be given together");
  }
  if (!init.explicit_state() && !init.seed) {
    throw ValidationError("init.seed: required when no explicit x0/w0 is given");
  }
  if (init.explicit_state()) initial_state();
  for (std::size_t i = 0; i < sweep_mu.size(); ++i) {
    if (!(sweep_mu[i] >= 0.0) || !std::isfinite(sweep_mu[i])) {
      throw ValidationError("sweep.mu_values[" + std::to_string(i) + "]: must be finite and >= 0");
    }
  }
}

SystemState RunConfig::initial_state() const {
  if (init.explicit_state()) {
    SimplexPoint x(*init.x0, "init.x0");
    SimplexPoint w(*init.w0, "init.w0");
    if (x.size() != model.n || w.size() != model.n) {
      throw ValidationError("init.x0/init.w0: length must equal model.n=" +
                            std::to_string(model.n));
    }
    return SystemState(std::move(x), std::move(w));
  }
  if (!init.seed) throw ValidationError("init.seed: required when no explicit x0/w0 is given");
  return random_interior_state(*init.seed, model.n);
}

namespace {

void reject_unknown(const json& j, const std::string& section, const std::set<std::string>& keys) {
  if (!j.is_object()) throw ValidationError(section + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!keys.contains(key)) {
      throw ValidationError((section.empty() ? key : section + "." + key) + ": unknown field");
    }
  }
}

template <typename T>
void read(const json& j, const std::string& section, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(section + "." + key + ": wrong type (" + j.at(key).dump() + ")");
  }
}

}  // namespace

void apply_json(RunConfig& cfg, const json& j) {
  reject_unknown(j, "", {"model", "integrator", "recurrence", "init", "output", "sweep"});

  if (j.contains("model")) {
    const auto& m = j["model"];
    reject_unknown(m, "model", {"n", "mu", "amplitude", "mu_per_matrix", "amplitudes"});
    if (m.contains("amplitudes")) {
      throw ValidationError("model.amplitudes: per-edge amplitudes are not supported; use the "
                            "scalar model.amplitude");
    }
    read(m, "model", "n", cfg.model.n);
    read(m, "model", "mu", cfg.model.mu);
    read(m, "model", "amplitude", cfg.model.amplitude);
    if (m.contains("mu_per_matrix")) {
      if (m["mu_per_matrix"].is_null()) {
        cfg.model.mu_per_matrix.reset();
      } else {
        std::vector<double> mus;
        read(m, "model", "mu_per_matrix", mus);
        cfg.model.mu_per_matrix = std::move(mus);
      }
    }
  }

  if (j.contains("integrator")) {
    const auto& g = j["integrator"];
    reject_unknown(g, "integrator",
                   {"method", "space", "t_end", "dt", "rtol", "atol", "max_step",
                    "sample_interval", "boundary_floor", "renormalize_field"});
    std::string text;
    if (g.contains("method")) {
      read(g, "integrator", "method", text);
      cfg.integrator.method = parse_method(text);
    }
    if (g.contains("space")) {
      read(g, "integrator", "space", text);
      cfg.integrator.space = parse_space(text);
    }
    read(g, "integrator", "t_end", cfg.integrator.t_end);
    read(g, "integrator", "dt", cfg.integrator.dt);
    read(g, "integrator", "rtol", cfg.integrator.rtol);
    read(g, "integrator", "atol", cfg.integrator.atol);
    read(g, "integrator", "max_step", cfg.integrator.max_step);
    read(g, "integrator", "sample_interval", cfg.integrator.sample_interval);
    read(g, "integrator", "boundary_floor", cfg.integrator.boundary_floor);
    read(g, "integrator", "renormalize_field", cfg.integrator.renormalize_field);
  }

  if (j.contains("recurrence")) {
    const auto& r = j["recurrence"];
    if (r.is_null()) {
      cfg.recurrence.reset();
    } else {
      reject_unknown(r, "recurrence", {"epsilon", "t_min", "max_returns"});
      RecurrenceConfig rc = cfg.recurrence_or_default();
      read(r, "recurrence", "epsilon", rc.epsilon);
      read(r, "recurrence", "t_min", rc.t_min);
      read(r, "recurrence", "max_returns", rc.max_returns);
      cfg.recurrence = rc;
    }
  }

  if (j.contains("init")) {
    const auto& i = j["init"];
    reject_unknown(i, "init", {"seed", "x0", "w0"});
    if (i.contains("x0") || i.contains("w0")) {
      std::vector<double> x0, w0;
      read(i, "init", "x0", x0);
      read(i, "init", "w0", w0);
      if (!i.contains("x0") || !i.contains("w0")) {
        throw ValidationError("init: x0 and w0 must be given together");
      }
      cfg.init.x0 = std::move(x0);
      cfg.init.w0 = std::move(w0);
      cfg.init.seed.reset();
    }
    if (i.contains("seed")) {
      std::uint64_t seed = 0;
      read(i, "init", "seed", seed);
      cfg.init.seed = seed;
      if (!i.contains("x0")) {
        cfg.init.x0.reset();
        cfg.init.w0.reset();
      }
    }
  }

  if (j.contains("output")) {
    const auto& o = j["output"];
    reject_unknown(o, "output", {"path", "format"});
    read(o, "output", "path", cfg.output.path);
    if (o.contains("format")) {
      std::string text;
      read(o, "output", "format", text);
      cfg.output.format = parse_format(text);
    }
  }

  if (j.contains("sweep")) {
    const auto& s = j["sweep"];
    reject_unknown(s, "sweep", {"mu_values"});
    read(s, "sweep", "mu_values", cfg.sweep_mu);
  }
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("--config: cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ValidationError("--config: " + path + ": " + e.what());
  }
  RunConfig cfg;
  apply_json(cfg, j);
  return cfg;
}

json to_json(const RunConfig& cfg) {
  json j;
  j["model"] = {{"n", cfg.model.n},
                {"mu", cfg.model.mu},
                {"amplitude", cfg.model.amplitude},
                {"mu_per_matrix", cfg.model.mu_per_matrix ? json(*cfg.model.mu_per_matrix)
                                                          : json(nullptr)}};
  const auto& g = cfg.integrator;
  j["integrator"] = {{"method", to_string(g.method)},
                     {"space", to_string(g.space)},
                     {"t_end", g.t_end},
                     {"dt", g.dt},
                     {"rtol", g.rtol},
                     {"atol", g.atol},
                     {"max_step", g.max_step},
                     {"sample_interval", g.sample_interval},
                     {"boundary_floor", g.boundary_floor},
                     {"renormalize_field", g.renormalize_field}};
  const auto rc = cfg.recurrence_or_default();
  j["recurrence"] = {{"epsilon", rc.epsilon}, {"t_min", rc.t_min}, {"max_returns", rc.max_returns}};
  j["init"] = json::object();
  if (cfg.init.explicit_state()) {
    j["init"]["x0"] = *cfg.init.x0;
    j["init"]["w0"] = *cfg.init.w0;
  } else if (cfg.init.seed) {
    j["init"]["seed"] = *cfg.init.seed;
  }
  j["output"] = {{"path", cfg.output.path}, {"format", to_string(cfg.output.format)}};
  j["sweep"] = {{"mu_values", cfg.sweep_mu}};
  return j;
}

}  // namespace rpsgame
