#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "rpsgame/integrators.hpp"

namespace rpsgame {

inline constexpr const char* kTrajectoryFormat = "rpsgame-trajectory-v1";

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

/// CSV layout:
///   # key=value            (metadata; dotted keys from `meta`)
///   t,x1,...,xn,w1,...,wn,C,h
///   one row per sample
void write_csv(const Trajectory& traj, std::ostream& out, const nlohmann::json& meta);

/// JSONL layout: first line {"format", "meta"}, then one {t, x, w, C, h}
/// object per sample.
void write_jsonl(const Trajectory& traj, std::ostream& out, const nlohmann::json& meta);

/// Parsed contents of a trajectory CSV.
struct TrajectoryTable {
  std::size_t n = 0;
  std::map<std::string, std::string> meta;
  std::vector<double> times;
  std::vector<double> x;  // samples x n, row-major
  std::vector<double> w;
  std::vector<double> conserved;
  std::vector<double> steps;

  std::size_t size() const { return times.size(); }
};

/// Throws ValidationError with a line number on schema mismatch.
TrajectoryTable read_csv(std::istream& in);

}  // namespace rpsgame
