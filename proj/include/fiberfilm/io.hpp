#pragma once

#include "json.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fiberfilm/diagnostics.hpp"
#include "fiberfilm/errors.hpp"
#include "fiberfilm/grid.hpp"
#include "fiberfilm/stepper.hpp"

namespace fiberfilm {

/// Profile samples (x, h) at one time.
struct Snapshot {
  double t = 0.0;
  Field x;
  Field h;
};

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// snapshot_<t>.csv with t at 17 significant digits.
inline std::string snapshot_filename(double t) { return "snapshot_" + format_double(t) + ".csv"; }

/// Writes columns x,h with 17 significant digits so that reading back is exact.
inline void write_snapshot(const std::filesystem::path& path, const PeriodicGrid& grid, std::span<const double> h) {
  grid.check(h, "write_snapshot");
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << "x,h\n";
  for (std::size_t i = 0; i < h.size(); ++i) os << format_double(grid.x(i)) << ',' << format_double(h[i]) << '\n';
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

/// Reads a two-column CSV with a one-line header.
inline std::pair<Field, Field> read_xy_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error(path.string() + ": empty file");
  Field xs, hs;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": expected two columns");
    try {
      xs.push_back(std::stod(line.substr(0, comma)));
      hs.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::logic_error&) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": not a number");
    }
  }
  return {std::move(xs), std::move(hs)};
}

inline Snapshot read_snapshot(const std::filesystem::path& path, double t = 0.0) {
  auto [x, h] = read_xy_csv(path);
  return Snapshot{t, std::move(x), std::move(h)};
}

/// diag.csv: t, mass, entropy, entropy_bound, min_h, lipschitz, dt, newton_iters.
/// Entropy is left empty on records where it was not evaluated.
inline void write_diagnostics_csv(const std::filesystem::path& path, std::span<const DiagnosticsRecord> records) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << "t,mass,entropy,entropy_bound,min_h,lipschitz,dt,newton_iters\n";
  for (const auto& r : records) {
    os << format_double(r.t) << ',' << format_double(r.mass) << ',' << (r.entropy ? format_double(*r.entropy) : "")
       << ',' << format_double(r.entropy_bound) << ',' << format_double(r.min_height) << ','
       << format_double(r.lipschitz) << ',' << format_double(r.dt) << ',' << r.newton_iters << '\n';
  }
}

struct RunSummary {
  std::string scenario;
  std::string scheme;
  std::string stepping;
  std::size_t points = 0;
  double t_end = 0.0;
  double final_time = 0.0;
  std::string status;
  bool aborted = false;
  std::optional<double> first_negative_time;
  double min_height = 0.0;
  std::size_t accepted_steps = 0;
  std::size_t newton_failures = 0;
  int growth_events = 0;
  double final_dt = 0.0;
  double mass_drift = 0.0;
  double wall_seconds = 0.0;
};

inline RunSummary summarize(const std::string& scenario, const std::string& scheme, const RunOutcome& run,
                            std::size_t points, double t_end, double mass0, double mass1, StepMode mode) {
  RunSummary s;
  s.scenario = scenario;
  s.scheme = scheme;
  s.stepping = std::string(to_string(mode));
  s.points = points;
  s.t_end = t_end;
  s.final_time = run.t;
  s.status = std::string(to_string(run.status));
  s.aborted = run.aborted();
  s.first_negative_time = run.first_negative_time;
  s.min_height = run.min_height;
  s.accepted_steps = run.accepted_steps;
  s.newton_failures = run.newton_failures;
  s.growth_events = run.growth_events;
  s.final_dt = run.final_dt;
  s.mass_drift = mass0 != 0.0 ? std::abs(mass1 - mass0) / std::abs(mass0) : std::abs(mass1 - mass0);
  s.wall_seconds = run.wall_seconds;
  return s;
}

inline std::string to_key_value(const RunSummary& s) {
  std::ostringstream os;
  os << "scenario: " << s.scenario << '\n'
     << "scheme: " << s.scheme << '\n'
     << "stepping: " << s.stepping << '\n'
     << "points: " << s.points << '\n'
     << "t_end: " << format_double(s.t_end) << '\n'
     << "final_time: " << format_double(s.final_time) << '\n'
     << "status: " << s.status << '\n'
     << "aborted: " << (s.aborted ? "true" : "false") << '\n'
     << "first_negative_time: " << (s.first_negative_time ? format_double(*s.first_negative_time) : "none") << '\n'
     << "min_h: " << format_double(s.min_height) << '\n'
     << "accepted_steps: " << s.accepted_steps << '\n'
     << "newton_failures: " << s.newton_failures << '\n'
     << "growth_events: " << s.growth_events << '\n'
     << "final_dt: " << format_double(s.final_dt) << '\n'
     << "mass_drift: " << format_double(s.mass_drift) << '\n'
     << "wall_seconds: " << s.wall_seconds << '\n';
  return os.str();
}

inline nlohmann::json to_json(const RunSummary& s) {
  nlohmann::json j;
  j["scenario"] = s.scenario;
  j["scheme"] = s.scheme;
  j["stepping"] = s.stepping;
  j["points"] = s.points;
  j["t_end"] = s.t_end;
  j["final_time"] = s.final_time;
  j["status"] = s.status;
  j["aborted"] = s.aborted;
  j["first_negative_time"] = s.first_negative_time ? nlohmann::json(*s.first_negative_time) : nlohmann::json(nullptr);
  j["min_h"] = s.min_height;
  j["accepted_steps"] = s.accepted_steps;
  j["newton_failures"] = s.newton_failures;
  j["growth_events"] = s.growth_events;
  j["final_dt"] = s.final_dt;
  j["mass_drift"] = s.mass_drift;
  j["wall_seconds"] = s.wall_seconds;
  return j;
}

}  // namespace fiberfilm
