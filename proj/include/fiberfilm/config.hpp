#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <filesystem>
#include <optional>
#include <string>

#include "fiberfilm/errors.hpp"
#include "fiberfilm/scenarios.hpp"

namespace fiberfilm {

/// A resolved run: the scenario plus output plumbing.
struct RunConfig {
  Scenario scenario;
  std::filesystem::path output_dir = "out";
  bool write_json = true;
  bool track_entropy = true;
  unsigned long seed = 0;  // reserved
};

namespace detail {

template <class T>
std::optional<T> get_opt(const boost::property_tree::ptree& pt, const std::string& key) {
  const auto node = pt.get_child_optional(boost::property_tree::ptree::path_type(key, '.'));
  if (!node) return std::nullopt;
  try {
    return node->get_value<T>();
  } catch (const boost::property_tree::ptree_bad_data&) {
    throw ConfigError("config: bad value for '" + key + "': '" + node->data() + "'");
  }
}

template <class T>
void assign_if(const boost::property_tree::ptree& pt, const std::string& key, T& target) {
  if (auto v = get_opt<T>(pt, key)) target = *v;
}

}  // namespace detail

/// Builds a run from an INI tree.
///
/// Sections: run, model, grid, initial, scheme, stepping, output. Keys left
/// out keep the values of [run] scenario (default adaptive_smooth).
inline RunConfig run_config_from_tree(const boost::property_tree::ptree& pt) {
  using detail::assign_if;
  using detail::get_opt;
  const std::string base = get_opt<std::string>(pt, "run.scenario").value_or("adaptive_smooth");
  RunConfig rc{builtin_scenario(base)};
  Scenario& s = rc.scenario;

  assign_if(pt, "run.name", s.name);
  assign_if(pt, "run.t_start", s.t_start);
  if (auto t = get_opt<double>(pt, "run.t_end")) {
    s.t_end = *t;
    s.t_end_by_scheme.clear();
  }
  assign_if(pt, "run.seed", rc.seed);

  // Model.
  ModelParams p = s.model.params();
  ModelFamily family = s.model.family();
  if (auto f = get_opt<std::string>(pt, "model.family")) family = parse_model_family(*f);
  assign_if(pt, "model.alpha", p.alpha);
  assign_if(pt, "model.eta", p.eta);
  assign_if(pt, "model.a_h", p.a_h);
  assign_if(pt, "model.lambda", p.lambda);
  assign_if(pt, "model.mobility_order", p.mobility_order);
  assign_if(pt, "model.fsm_pressures", p.power_law_fsm_pressures);
  try {
    s.model = PhysicalModel(family, p);
  } catch (const std::logic_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  // Grid.
  std::size_t points = s.grid.size();
  double length = s.grid.length();
  assign_if(pt, "grid.points", points);
  assign_if(pt, "grid.length", length);
  if (auto dx = get_opt<double>(pt, "grid.dx")) points = static_cast<std::size_t>(std::llround(length / *dx));
  try {
    s.grid = PeriodicGrid(points, length);
  } catch (const std::logic_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  // Initial condition.
  assign_if(pt, "initial.hbar", s.initial.hbar);
  assign_if(pt, "initial.amplitude", s.initial.amplitude);
  if (auto f = get_opt<std::string>(pt, "initial.profile")) s.initial.profile = *f;
  if (auto f = get_opt<std::string>(pt, "initial.snapshot")) s.initial.snapshot = *f;
  assign_if(pt, "initial.crop_tolerance", s.initial.profile_options.crop_tolerance);
  assign_if(pt, "initial.smoothing_window", s.initial.profile_options.window);
  assign_if(pt, "initial.fourier_modes", s.initial.profile_options.modes);

  // Scheme.
  assign_if(pt, "scheme.subintervals", s.subintervals);
  TimeScheme scheme = s.scheme.scheme;
  if (auto n = get_opt<std::string>(pt, "scheme.name")) scheme = parse_time_scheme(*n);
  s.set_scheme(scheme);
  if (auto m = get_opt<std::string>(pt, "scheme.mobility")) s.scheme.mobility.variant = parse_mobility_variant(*m);
  assign_if(pt, "scheme.max_log_step", s.scheme.mobility.max_log_step);

  // Stepping and Newton.
  StepController& c = s.stepping;
  if (auto m = get_opt<std::string>(pt, "stepping.mode")) c.mode = parse_step_mode(*m);
  assign_if(pt, "stepping.dt", c.dt);
  assign_if(pt, "stepping.tol1", c.tol1);
  assign_if(pt, "stepping.count_max", c.count_max);
  assign_if(pt, "stepping.bad_limit", c.bad_limit);
  if (auto v = get_opt<double>(pt, "stepping.dt_min")) c.dt_min = *v;
  if (auto v = get_opt<double>(pt, "stepping.dt_max")) c.dt_max = *v;
  assign_if(pt, "stepping.clamp_to_end", c.clamp_to_end);
  assign_if(pt, "stepping.stop_at_first_negative", c.stop_at_first_negative);
  assign_if(pt, "stepping.newton_tolerance", s.newton.tolerance);
  assign_if(pt, "stepping.newton_max_iterations", s.newton.max_iterations);

  // Output.
  if (auto d = get_opt<std::string>(pt, "output.dir")) rc.output_dir = *d;
  assign_if(pt, "output.snapshot_every", s.snapshot_every);
  assign_if(pt, "output.snapshot_interval", s.snapshot_interval);
  assign_if(pt, "output.entropy_stride", s.entropy_stride);
  assign_if(pt, "output.entropy", rc.track_entropy);
  assign_if(pt, "output.json", rc.write_json);

  try {
    c.validate();
    s.scheme.mobility.validate();
  } catch (const std::logic_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (!(s.horizon() > s.t_start)) throw ConfigError("config: t_end must exceed t_start");
  if (!(s.newton.tolerance > 0.0)) throw ConfigError("config: newton_tolerance must be positive");
  return rc;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  boost::property_tree::ptree pt;
  try {
    boost::property_tree::read_ini(path.string(), pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return run_config_from_tree(pt);
}

inline RunConfig run_config_for_scenario(const std::string& name) { return RunConfig{builtin_scenario(name)}; }

}  // namespace fiberfilm
