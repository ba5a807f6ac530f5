// fiberfilm: run scenarios, compare schemes, measure convergence, benchmark.
//
//   fiberfilm run --scenario adaptive_smooth --out out/smooth
//   fiberfilm run --config configs/cpu_benchmark_gm.ini --t-end 0.5
//   fiberfilm compare --scenario cpu_benchmark --scheme-a bem --scheme-b gm --t-check 1 --run-until 1.2
//   fiberfilm convergence --scenario adaptive_smooth --ladder 64,128,256 --t-check 0.05 --dt 1e-5
//   fiberfilm bench --builtin

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fiberfilm/fiberfilm.hpp"

using namespace fiberfilm;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRun = 1;

struct Overrides {
  std::string config;
  std::string scenario;
  std::string out;
  std::optional<std::size_t> snapshot_every;
  std::optional<double> t_end;
  std::string scheme;
};

void add_source_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "INI run configuration");
  cmd->add_option("--scenario", o.scenario, "built-in scenario name");
}

void add_override_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--scheme", o.scheme, "bem | gm");
  cmd->add_option("--t-end", o.t_end, "final time");
}

RunConfig resolve(const Overrides& o) {
  if (!o.config.empty() && !o.scenario.empty()) throw ConfigError("give either --config or --scenario, not both");
  RunConfig rc = !o.config.empty() ? load_run_config(o.config)
                                   : run_config_for_scenario(o.scenario.empty() ? "adaptive_smooth" : o.scenario);
  Scenario& s = rc.scenario;
  if (!o.scheme.empty()) s.set_scheme(parse_time_scheme(o.scheme));
  if (o.t_end) {
    s.t_end = *o.t_end;
    s.t_end_by_scheme.clear();
    if (!(s.t_end > s.t_start)) throw ConfigError("--t-end must exceed t_start");
  }
  if (!o.out.empty()) rc.output_dir = o.out;
  if (o.snapshot_every) s.snapshot_every = *o.snapshot_every;
  return rc;
}

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string describe_positivity(const RunOutcome& r) {
  if (r.first_negative_time) return "fails at t = " + short_num(*r.first_negative_time);
  if (r.aborted()) return std::string(to_string(r.status));
  return "success";
}

int cmd_run(const Overrides& o, bool quiet) {
  const RunConfig rc = resolve(o);
  if (!quiet)
    std::cout << "run " << rc.scenario.name << " [" << to_string(rc.scenario.scheme.scheme) << ", "
              << to_string(rc.scenario.stepping.mode) << ", N=" << rc.scenario.grid.size() << "] to t = "
              << rc.scenario.horizon() << " -> " << rc.output_dir.string() << '\n';
  const RunArtifacts art = execute_run(rc, true, quiet ? nullptr : &std::cout);
  if (!quiet) std::cout << to_key_value(art.summary);
  return art.outcome.status == RunStatus::Completed ? 0 : kExitRun;
}

struct ComparisonSide {
  std::string label;
  Field at_check;
  bool reached = false;
  RunOutcome run;
};

ComparisonSide run_side(const RunConfig& rc, double t_check, double run_until) {
  const Scenario& s = rc.scenario;
  StepController ctrl = s.stepping;
  ctrl.clamp_to_end = true;
  ComparisonSide side;
  side.label = s.name + "/" + std::string(to_string(s.scheme.scheme)) + "/N=" + std::to_string(s.grid.size());
  side.run = integrate(ctrl, s.scheme, s.newton, s.grid, s.initial_state(), s.t_start, t_check);
  side.at_check = side.run.state;
  side.reached = side.run.status == RunStatus::Completed;
  if (side.reached && run_until > t_check) {
    RunOutcome tail = integrate(ctrl, s.scheme, s.newton, s.grid, side.run.state, t_check, run_until);
    tail.first_negative_time = side.run.first_negative_time ? side.run.first_negative_time : tail.first_negative_time;
    tail.min_height = std::min(tail.min_height, side.run.min_height);
    side.run = std::move(tail);
  }
  return side;
}

int cmd_compare(const Overrides& a, const Overrides& b, double t_check, double run_until) {
  const RunConfig ra = resolve(a);
  const RunConfig rb = resolve(b);
  const auto& ga = ra.scenario.grid;
  const auto& gb = rb.scenario.grid;
  if (std::abs(ga.length() - gb.length()) > 1e-12 * ga.length())
    throw ConfigError("compare: domains differ (L = " + format_double(ga.length()) + " vs " +
                      format_double(gb.length()) + ")");
  const bool same = ga.size() == gb.size();
  if (!same && gb.size() != 2 * ga.size() && ga.size() != 2 * gb.size())
    throw ConfigError("compare: grids must be equal or 2:1");
  if (!(t_check > ra.scenario.t_start) || !(t_check > rb.scenario.t_start))
    throw ConfigError("compare: t_check must exceed t_start");

  const ComparisonSide sa = run_side(ra, t_check, run_until);
  const ComparisonSide sb = run_side(rb, t_check, run_until);
  std::cout << "t_check = " << short_num(t_check) << ", run until " << short_num(std::max(run_until, t_check)) << '\n';
  std::printf("%-36s %-34s %s\n", "run", "positivity", "min_h");
  for (const auto* s : {&sa, &sb})
    std::printf("%-36s %-34s %.6g\n", s->label.c_str(), describe_positivity(s->run).c_str(), s->run.min_height);

  if (!sa.reached || !sb.reached) {
    std::cout << "l2 error at t_check: unavailable (a run stopped before t_check)\n";
    return kExitRun;
  }
  Field coarse = sa.at_check;
  Field fine = sb.at_check;
  if (ga.size() > gb.size()) std::swap(coarse, fine);
  const Field restricted = same ? fine : restrict_fine_to_coarse(fine, coarse.size());
  std::cout << "l2 error at t_check: " << format_double(l2_error(coarse, restricted, ga.length())) << '\n';
  const bool ok = !sa.run.aborted() && !sb.run.aborted();
  return ok ? 0 : kExitRun;
}

std::vector<std::size_t> parse_ladder(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(static_cast<std::size_t>(std::stoul(item)));
    } catch (const std::exception&) {
      throw ConfigError("bad ladder entry '" + item + "'");
    }
  }
  return out;
}

int cmd_convergence(const Overrides& o, const std::string& ladder_text, double t_check, std::optional<double> dt,
                    std::optional<double> newton_tol, bool extended) {
  const RunConfig rc = resolve(o);
  const Scenario& s = rc.scenario;
  if (s.initial.profile || s.initial.snapshot)
    throw ConfigError("convergence: needs a perturbed-flat initial condition");
  const auto ladder = parse_ladder(ladder_text);
  NewtonConfig newton = s.newton;
  if (newton_tol) newton.tolerance = *newton_tol;
  newton.extended_precision = newton.extended_precision || extended;
  const double hbar = s.initial.hbar;
  const double amp = s.initial.amplitude;
  ConvergenceReport rep;
  try {
    rep = convergence_order(s.scheme, newton, s.grid.length(), ladder,
                            [&](const PeriodicGrid& g) { return ic_perturbed_flat(g, hbar, amp); },
                            dt.value_or(s.stepping.dt), t_check);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  std::printf("%-8s %-16s %s\n", "N", "||u_N - R u_2N||", "order");
  for (std::size_t k = 0; k + 1 < rep.points.size(); ++k) {
    const std::string order = k >= 1 ? short_num(rep.orders[k - 1]) : "-";
    std::printf("%-8zu %-16.6e %s\n", rep.points[k], rep.difference_norms[k], order.c_str());
  }
  std::printf("observed order %.4f%s\n", rep.observed_order, rep.unstable ? " (order unstable)" : "");
  if (rep.unstable && !rep.note.empty()) std::cout << "note: " << rep.note << '\n';
  return rep.unstable ? kExitRun : 0;
}

struct BenchRow {
  std::string method;
  std::string stepping;
  std::string positivity;
  double seconds;
  double final_time;
};

BenchRow bench_one(const Scenario& s) {
  const RunOutcome r = integrate(s.stepping, s.scheme, s.newton, s.grid, s.initial_state(), s.t_start, s.horizon());
  BenchRow row;
  const std::string dx = short_num(s.grid.dx());
  row.method = std::string(s.scheme.scheme == TimeScheme::SemiImplicitBEM ? "BEM" : "GM") + " with dx = " + dx;
  row.stepping = s.stepping.mode == StepMode::Fixed ? "Fixed" : "Adaptive";
  if (r.first_negative_time) row.positivity = "Fails at t = " + short_num(*r.first_negative_time);
  else if (r.aborted()) row.positivity = std::string(to_string(r.status));
  else row.positivity = "Success";
  row.seconds = r.wall_seconds;
  row.final_time = r.t;
  return row;
}

int cmd_bench(const std::vector<std::string>& configs, bool builtin, bool quiet) {
  std::vector<Scenario> set;
  for (const auto& c : configs) set.push_back(load_run_config(c).scenario);
  if (builtin) {
    for (double dx : {0.01, 0.005, 0.0025}) {
      set.push_back(cpu_benchmark_case(dx, TimeScheme::ImplicitGM, StepMode::Fixed));
      set.push_back(cpu_benchmark_case(dx, TimeScheme::SemiImplicitBEM, StepMode::Fixed));
      set.push_back(cpu_benchmark_case(dx, TimeScheme::SemiImplicitBEM, StepMode::Adaptive));
    }
  }
  std::printf("%-22s %-9s %-22s %s\n", "Method", "Stepping", "Positivity", "CPU time");
  bool ok = true;
  for (const auto& s : set) {
    const BenchRow row = bench_one(s);
    ok = ok && row.positivity.rfind("aborted", 0) != 0;
    std::printf("%-22s %-9s %-22s %.3fs until t = %s\n", row.method.c_str(), row.stepping.c_str(),
                row.positivity.c_str(), row.seconds, short_num(row.final_time).c_str());
    if (!quiet) std::fflush(stdout);
  }
  return ok ? 0 : kExitRun;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thin film on a vertical fiber: BEM and GM solvers"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("--quiet,-q", quiet, "suppress progress output");
  bool list = false;
  app.add_flag("--list", list, "list built-in scenarios");

  Overrides run_o;
  auto* run = app.add_subcommand("run", "run a scenario or config file");
  add_source_flags(run, run_o);
  add_override_flags(run, run_o);
  run->add_option("--out", run_o.out, "output directory");
  run->add_option("--snapshot-every", run_o.snapshot_every, "snapshot stride in accepted steps");
  run->add_flag("--quiet,-q", quiet, "suppress progress output");

  Overrides cmp_a, cmp_b;
  double t_check = 1.0;
  double run_until = 0.0;
  auto* compare = app.add_subcommand("compare", "compare two runs at t_check");
  add_source_flags(compare, cmp_a);
  compare->add_option("--config-b", cmp_b.config, "second config (defaults to the first)");
  compare->add_option("--scenario-b", cmp_b.scenario, "second scenario (defaults to the first)");
  compare->add_option("--scheme-a", cmp_a.scheme, "scheme of the first run");
  compare->add_option("--scheme-b", cmp_b.scheme, "scheme of the second run");
  compare->add_option("--t-check", t_check, "comparison time")->required();
  compare->add_option("--run-until", run_until, "keep integrating to this time for the positivity verdict");

  Overrides conv_o;
  std::string ladder = "64,128,256";
  double conv_t = 0.05;
  std::optional<double> conv_dt, conv_tol;
  bool extended = false;
  auto* convergence = app.add_subcommand("convergence", "self-convergence study on a 2:1 grid ladder");
  add_source_flags(convergence, conv_o);
  convergence->add_option("--scheme", conv_o.scheme, "bem | gm");
  convergence->add_option("--ladder", ladder, "comma-separated grid sizes, each twice the previous");
  convergence->add_option("--t-check", conv_t, "comparison time");
  convergence->add_option("--dt", conv_dt, "fixed time step");
  convergence->add_option("--newton-tol", conv_tol, "Newton tolerance");
  convergence->add_flag("--extended", extended, "extended-precision residuals");

  std::vector<std::string> bench_configs;
  bool builtin = false;
  auto* bench = app.add_subcommand("bench", "wall-clock and positivity table");
  bench->add_option("--config", bench_configs, "run configurations (repeatable)");
  bench->add_flag("--builtin", builtin, "the nine built-in benchmark rows");

  if (std::find(argv + 1, argv + argc, std::string("--list")) != argv + argc) {
    for (const auto& n : builtin_scenario_names()) std::cout << n << '\n';
    return 0;
  }
  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_o, quiet);
    if (*compare) {
      if (cmp_b.config.empty() && cmp_b.scenario.empty()) {
        cmp_b.config = cmp_a.config;
        cmp_b.scenario = cmp_a.scenario;
      }
      return cmd_compare(cmp_a, cmp_b, t_check, run_until);
    }
    if (*convergence) return cmd_convergence(conv_o, ladder, conv_t, conv_dt, conv_tol, extended);
    if (*bench) return cmd_bench(bench_configs, builtin, quiet);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRun;
  }
  return 0;
}
