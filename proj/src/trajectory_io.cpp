#include "rpsgame/trajectory_io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include "rpsgame/random.hpp"

namespace rpsgame {

using nlohmann::json;

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

namespace {

void flatten(const json& j, const std::string& prefix, std::ostream& out) {
  if (j.is_object()) {
    for (const auto& [key, value] : j.items()) {
      flatten(value, prefix.empty() ? key : prefix + "." + key, out);
    }
    return;
  }
  out << "# " << prefix << '=' << (j.is_string() ? j.get<std::string>() : j.dump()) << '\n';
}

std::string header(std::size_t n) {
  std::string h = "t";
  for (std::size_t i = 1; i <= n; ++i) h += ",x" + std::to_string(i);
  for (std::size_t i = 1; i <= n; ++i) h += ",w" + std::to_string(i);
  return h + ",C,h";
}

}  // namespace

void write_csv(const Trajectory& traj, std::ostream& out, const json& meta) {
  out << "# format=" << kTrajectoryFormat << '\n';
  out << "# generator=" << kGeneratorSpec << '\n';
  flatten(meta, "", out);
  const std::size_t n = traj.strategies();
  out << header(n) << '\n';
  for (std::size_t k = 0; k < traj.size(); ++k) {
    out << format_double(traj.times()[k]);
    for (double v : traj.x(k)) out << ',' << format_double(v);
    for (double v : traj.w(k)) out << ',' << format_double(v);
    out << ',' << format_double(traj.conserved()[k]) << ',' << format_double(traj.steps()[k])
        << '\n';
  }
}

void write_jsonl(const Trajectory& traj, std::ostream& out, const json& meta) {
  out << json{{"format", kTrajectoryFormat}, {"generator", kGeneratorSpec}, {"meta", meta}}.dump()
      << '\n';
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto x = traj.x(k);
    const auto w = traj.w(k);
    json row{{"t", traj.times()[k]},
             {"x", std::vector<double>(x.begin(), x.end())},
             {"w", std::vector<double>(w.begin(), w.end())},
             {"C", traj.conserved()[k]},
             {"h", traj.steps()[k]}};
    out << row.dump() << '\n';
  }
}

TrajectoryTable read_csv(std::istream& in) {
  TrajectoryTable table;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  std::vector<double> row;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto fail = [&](const std::string& why) {
      throw ValidationError("trajectory csv line " + std::to_string(lineno) + ": " + why);
    };
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (have_header) fail("metadata after the header");
      const auto eq = line.find('=');
      if (eq == std::string::npos || line.size() < 2) fail("metadata line without key=value");
      const auto start = line.find_first_not_of(' ', 1);
      table.meta[line.substr(start, eq - start)] = line.substr(eq + 1);
      continue;
    }
    if (!have_header) {
      const auto cols = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
      if (cols < 3 + 2 * 3 || (cols - 3) % 2 != 0) fail("bad header '" + line + "'");
      table.n = (cols - 3) / 2;
      if (line != header(table.n)) fail("bad header '" + line + "'");
      have_header = true;
      continue;
    }
    row.clear();
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (p <= end) {
      double v = 0.0;
      const auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc()) fail("malformed number in column " + std::to_string(row.size() + 1));
      row.push_back(v);
      p = res.ptr;
      if (p == end) break;
      if (*p != ',') fail("expected ',' after column " + std::to_string(row.size()));
      ++p;
    }
    if (row.size() != 2 * table.n + 3) {
      fail("expected " + std::to_string(2 * table.n + 3) + " columns, got " +
           std::to_string(row.size()));
    }
    table.times.push_back(row[0]);
    table.x.insert(table.x.end(), row.begin() + 1, row.begin() + 1 + table.n);
    table.w.insert(table.w.end(), row.begin() + 1 + table.n, row.begin() + 1 + 2 * table.n);
    table.conserved.push_back(row[2 * table.n + 1]);
    table.steps.push_back(row[2 * table.n + 2]);
  }
  if (!have_header) throw ValidationError("trajectory csv: missing header line");
  return table;
}

}  // namespace rpsgame
