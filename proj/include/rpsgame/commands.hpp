#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "rpsgame/config.hpp"

namespace rpsgame {

/// Process exit statuses of the CLI.
enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 1,
  kExitVerifyFailed = 2,
  kExitRuntime = 3,
};

struct CheckResult {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool passed = false;
  std::string detail;
};

/// The invariant bundle run by `verify`: conservation drift, pointwise
/// divergence, transform round trip, equilibrium fixity, and agreement of
/// simplex- and transformed-space integration.
std::vector<CheckResult> run_verification(const RunConfig& cfg);

nlohmann::json to_json(const CheckResult& check);

int cmd_simulate(const RunConfig& cfg, std::ostream& log);
int cmd_verify(const RunConfig& cfg, std::ostream& log);
int cmd_recur(const RunConfig& cfg, std::ostream& log);
int cmd_sweep(const RunConfig& cfg, std::ostream& log);

/// Entry point shared by the executable and the tests. Maps exceptions to
/// exit codes: validation 1, failed verification 2, integration failure 3.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rpsgame
