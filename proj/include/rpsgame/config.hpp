#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rpsgame/analysis.hpp"
#include "rpsgame/integrators.hpp"
#include "rpsgame/simplex.hpp"

namespace rpsgame {

enum class OutputFormat { Csv, Jsonl };

std::string to_string(OutputFormat f);
OutputFormat parse_format(const std::string& s);

/// Initial condition: explicit (x0, w0) or a seeded random draw.
struct InitSpec {
  std::optional<std::uint64_t> seed = 42;
  std::optional<std::vector<double>> x0;
  std::optional<std::vector<double>> w0;

  bool explicit_state() const { return x0.has_value(); }
};

struct OutputSpec {
  std::string path;
  OutputFormat format = OutputFormat::Csv;
};

/// Fully resolved run configuration. JSON files use exactly these field
/// names, grouped as {model, integrator, recurrence, init, output, sweep}.
struct RunConfig {
  ModelParams model;
  IntegratorConfig integrator;
  std::optional<RecurrenceConfig> recurrence;
  InitSpec init;
  OutputSpec output;
  /// mu grid for the sweep command.
  std::vector<double> sweep_mu = {0.0, 0.1, 1.0};

  /// Checks every section; throws ValidationError naming the field.
  void validate() const;

  /// Builds the initial state (validated, 1e-9 renormalization rule).
  SystemState initial_state() const;

  RecurrenceConfig recurrence_or_default() const { return recurrence.value_or(RecurrenceConfig{}); }
};

/// Merges `j` into `base`. Unknown keys and type mismatches raise
/// ValidationError with the dotted field path.
void apply_json(RunConfig& base, const nlohmann::json& j);

RunConfig parse_config_file(const std::string& path);

nlohmann::json to_json(const RunConfig& cfg);

}  // namespace rpsgame
