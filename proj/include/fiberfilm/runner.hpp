#pragma once

#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "fiberfilm/config.hpp"
#include "fiberfilm/diagnostics.hpp"
#include "fiberfilm/io.hpp"
#include "fiberfilm/scenarios.hpp"
#include "fiberfilm/stepper.hpp"

namespace fiberfilm {

struct RunArtifacts {
  RunOutcome outcome;
  RunSummary summary;
  std::vector<DiagnosticsRecord> records;
};

/// Runs a configured scenario. With write_files set, the output directory
/// receives snapshot_<t>.csv files (initial, strided and final states),
/// diag.csv, summary.txt and, optionally, summary.json.
inline RunArtifacts execute_run(const RunConfig& rc, bool write_files = true, std::ostream* progress = nullptr) {
  const Scenario& sc = rc.scenario;
  const PeriodicGrid& grid = sc.grid;
  const Field initial = sc.initial_state();
  const double t_end = sc.horizon();

  if (write_files) {
    std::filesystem::create_directories(rc.output_dir);
    write_snapshot(rc.output_dir / snapshot_filename(sc.t_start), grid, initial);
  }

  DiagnosticsRecorder recorder(grid, sc.model, EntropySpec{}, sc.entropy_stride, rc.track_entropy);
  recorder.start(sc.t_start, initial);

  double next_snapshot_t = sc.snapshot_interval > 0.0 ? sc.t_start + sc.snapshot_interval : 0.0;
  std::size_t last_report = 0;
  auto observer = [&](const AcceptedStep& step) {
    recorder.observe(step);
    if (!write_files) return;
    bool snap = sc.snapshot_every > 0 && step.index % sc.snapshot_every == 0;
    if (sc.snapshot_interval > 0.0 && step.t >= next_snapshot_t) {
      snap = true;
      while (next_snapshot_t <= step.t) next_snapshot_t += sc.snapshot_interval;
    }
    if (snap) write_snapshot(rc.output_dir / snapshot_filename(step.t), grid, step.state);
    if (progress && step.index >= last_report + 1000) {
      last_report = step.index;
      *progress << "  t = " << step.t << "  dt = " << step.dt_used << "  min_h = " << min_value(step.state) << '\n';
    }
  };

  RunArtifacts art;
  art.outcome = integrate(sc.stepping, sc.scheme, sc.newton, grid, initial, sc.t_start, t_end, observer);
  art.records = recorder.records();
  const double m0 = mass(grid, initial, sc.model.alpha());
  const double m1 = mass(grid, art.outcome.state, sc.model.alpha());
  art.summary = summarize(sc.name, std::string(to_string(sc.scheme.scheme)), art.outcome, grid.size(), t_end, m0, m1,
                          sc.stepping.mode);

  if (write_files) {
    write_snapshot(rc.output_dir / snapshot_filename(art.outcome.t), grid, art.outcome.state);
    write_diagnostics_csv(rc.output_dir / "diag.csv", art.records);
    std::ofstream(rc.output_dir / "summary.txt") << to_key_value(art.summary);
    if (rc.write_json) std::ofstream(rc.output_dir / "summary.json") << to_json(art.summary).dump(2) << '\n';
  }
  return art;
}

}  // namespace fiberfilm
