#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "fiberfilm/fiberfilm.hpp"

using namespace fiberfilm;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "fiberfilm_tests";
  fs::create_directories(dir);
  return dir / name;
}

RunConfig config_from(const std::string& ini) {
  boost::property_tree::ptree pt;
  std::istringstream is(ini);
  boost::property_tree::read_ini(is, pt);
  return run_config_from_tree(pt);
}

}  // namespace

TEST(InitialCondition, PerturbedFlat) {
  const PeriodicGrid g(24, 24.0);
  const Field h = ic_perturbed_flat(g, 1.471);
  EXPECT_NEAR(h[12], 1.471 * 1.01, 1e-15);
  for (double v : h) EXPECT_GE(v, 1.471 * 0.99);
  for (double v : ic_perturbed_flat(g, 0.7, 0.0)) EXPECT_EQ(v, 0.7);
  EXPECT_THROW(ic_perturbed_flat(g, 0.0), std::invalid_argument);
  EXPECT_THROW(ic_perturbed_flat(g, 1.0, 1.0), std::invalid_argument);
}

TEST(Builtin, AdaptiveScenarios) {
  const Scenario s = builtin_scenario("adaptive_smooth");
  EXPECT_EQ(s.model.params().alpha, 5.0);
  EXPECT_EQ(s.model.params().eta, 0.02);
  EXPECT_EQ(s.model.params().a_h, 1e-5);
  EXPECT_EQ(s.grid.size(), 100u);
  EXPECT_EQ(s.grid.length(), 1.0);
  EXPECT_EQ(s.stepping.mode, StepMode::Adaptive);
  EXPECT_EQ(s.stepping.dt, 1e-3);
  EXPECT_EQ(s.stepping.tol1, 1e-1);
  EXPECT_EQ(s.stepping.count_max, 3);
  EXPECT_EQ(s.horizon(), 1.0);
  const Scenario q = builtin_scenario("adaptive_singular");
  EXPECT_EQ(q.model.params().eta, 0.005);
  EXPECT_EQ(q.model.params().a_h, 0.0);
  EXPECT_EQ(q.grid.size(), 100u);
}

TEST(Builtin, CpuBenchmark) {
  const Scenario s = builtin_scenario("cpu_benchmark");
  EXPECT_EQ(s.initial.hbar, 0.45);
  EXPECT_EQ(s.stepping.mode, StepMode::Fixed);
  EXPECT_EQ(s.stepping.dt, 1e-3);
  const std::pair<double, double> rows[] = {{0.01, 0.299}, {0.005, 1.09594}, {0.0025, 3.4765}};
  for (auto [dx, t] : rows) {
    const Scenario c = cpu_benchmark_case(dx, TimeScheme::ImplicitGM, StepMode::Fixed);
    EXPECT_EQ(c.grid.size(), static_cast<std::size_t>(std::lround(1.0 / dx)));
    EXPECT_EQ(c.horizon(), t);
    EXPECT_EQ(c.scheme.mobility.variant, MobilityVariant::Midpoint);
  }
  EXPECT_THROW(cpu_benchmark_case(0.003, TimeScheme::ImplicitGM, StepMode::Fixed), ConfigError);
}

TEST(Builtin, AllNamesResolve) {
  for (const auto& n : builtin_scenario_names()) EXPECT_EQ(builtin_scenario(n).name, n);
  EXPECT_THROW(builtin_scenario("nope"), ConfigError);
  const Scenario droplet = builtin_scenario("isolated_droplet");
  EXPECT_THROW(droplet.initial_state(), ConfigError);
  Scenario d = droplet;
  d.set_scheme(TimeScheme::ImplicitGM);
  EXPECT_EQ(d.horizon(), 807.107);
  EXPECT_EQ(droplet.horizon(), 827.807);
  const Scenario cc = builtin_scenario("coarse_comparison");
  EXPECT_EQ(cc.grid.size(), 3072u);
  EXPECT_EQ(cc.t_start, 610.0);
  EXPECT_EQ(cc.stepping.dt, 0.1);
}

TEST(LoadProfile, RoundTripWithoutSmoothing) {
  const std::size_t m = 200;
  const double len = 3.0;
  Field xs(m), hs(m);
  for (std::size_t i = 0; i < m; ++i) {
    xs[i] = len * static_cast<double>(i) / static_cast<double>(m - 1);
    hs[i] = 1.2 + 0.1 * std::sin(2 * std::numbers::pi * xs[i] / len);
  }
  const PeriodicGrid g(64, 7.0);
  ProfileOptions opt;
  opt.window = 1;
  const Field out = load_profile(xs, hs, g, opt);
  for (std::size_t i = 0; i < g.size(); ++i)
    EXPECT_NEAR(out[i], 1.2 + 0.1 * std::sin(2 * std::numbers::pi * g.x(i) / g.length()), 1e-6);
}

TEST(LoadProfile, RoundTripDenseSamplesDefaultWindow) {
  const std::size_t m = 20000;
  Field xs(m), hs(m);
  for (std::size_t i = 0; i < m; ++i) {
    xs[i] = static_cast<double>(i) / static_cast<double>(m - 1);
    hs[i] = 0.8 + 0.1 * std::cos(2 * std::numbers::pi * xs[i]);
  }
  const PeriodicGrid g(32, 1.0);
  const Field out = load_profile(xs, hs, g);
  for (std::size_t i = 0; i < g.size(); ++i)
    EXPECT_NEAR(out[i], 0.8 + 0.1 * std::cos(2 * std::numbers::pi * g.x(i)), 1e-6);
}

TEST(LoadProfile, CropsToMatchingEndpoints) {
  // One clean period followed by a ramp that breaks periodicity.
  Field xs, hs;
  for (std::size_t i = 0; i <= 100; ++i) {
    xs.push_back(0.01 * static_cast<double>(i));
    hs.push_back(1.0 + 0.2 * std::sin(2 * std::numbers::pi * xs.back()));
  }
  for (std::size_t i = 1; i <= 30; ++i) {
    xs.push_back(1.0 + 0.01 * static_cast<double>(i));
    hs.push_back(1.0 + 0.1 * static_cast<double>(i));
  }
  const auto [a, b] = detail::crop_window(hs, 1e-9, 8);
  EXPECT_EQ(b - a, 100u);
}

TEST(LoadProfile, ConstantInput) {
  const Field xs{0, 1, 2, 3, 4, 5, 6, 7, 8, 9}, hs(10, 0.5);
  for (std::size_t w : {1u, 3u, 5u})
    for (std::size_t modes : {0u, 1u, 4u}) {
      ProfileOptions opt;
      opt.window = w;
      opt.modes = modes;
      for (double v : load_profile(xs, hs, PeriodicGrid(16, 2.0), opt)) EXPECT_NEAR(v, 0.5, 1e-12);
    }
}

TEST(LoadProfile, Failures) {
  const PeriodicGrid g(16, 1.0);
  Field xs(20), hs(20);
  for (std::size_t i = 0; i < 20; ++i) {
    xs[i] = static_cast<double>(i);
    hs[i] = 1.0 + static_cast<double>(i);  // strictly increasing: no matching endpoints
  }
  EXPECT_THROW(load_profile(xs, hs, g), std::invalid_argument);
  EXPECT_THROW(load_profile(Field(5, 1.0), Field(5, 1.0), g), std::invalid_argument);
  Field neg(20, 1.0);
  neg[3] = -1.0;
  EXPECT_THROW(load_profile(xs, neg, g), std::invalid_argument);
  ProfileOptions even;
  even.window = 4;
  EXPECT_THROW(load_profile(xs, Field(20, 1.0), g, even), std::invalid_argument);
}

TEST(LoadProfile, FromFileViaScenario) {
  const fs::path p = scratch("profile.csv");
  {
    std::ofstream os(p);
    os << "x,h\n";
    for (int i = 0; i <= 400; ++i) {
      const double x = 0.1 * i;
      os << x << ',' << 1.0 + 0.3 * std::sin(2 * std::numbers::pi * x / 40.0) << '\n';
    }
  }
  Scenario s = builtin_scenario("isolated_droplet");
  s.initial.profile = p;
  const Field h = s.initial_state();
  EXPECT_EQ(h.size(), 1999u);
  for (double v : h) EXPECT_GT(v, 0.6);
}

TEST(Dimensionalize, Examples) {
  const Snapshot s{2.0, {0.0, 0.5}, {1.0, 0.25}};
  const Snapshot same = dimensionalize(s, {});
  EXPECT_EQ(same.h, s.h);
  EXPECT_EQ(same.x, s.x);
  EXPECT_EQ(same.t, s.t);
  const DimensionalScaling sc{1.7, 0.55, 0.3};
  const Snapshot d = dimensionalize(s, sc);
  EXPECT_DOUBLE_EQ(d.h[0], 0.55);
  EXPECT_DOUBLE_EQ(d.x[1], 0.85);
  EXPECT_DOUBLE_EQ(d.t, 0.6);
  const Snapshot back = nondimensionalize(d, sc);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_NEAR(back.h[i], s.h[i], 1e-15);
    EXPECT_NEAR(back.x[i], s.x[i], 1e-15);
  }
  EXPECT_EQ(dimensionalize(std::vector<Snapshot>{s, s}, sc).size(), 2u);
  EXPECT_THROW(dimensionalize(s, DimensionalScaling{0.0, 1.0, 1.0}), std::invalid_argument);
}

TEST(Snapshot, BitExactRoundTrip) {
  const PeriodicGrid g(64, 24.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(1e-6, 3.0);
  Field h(64);
  for (auto& v : h) v = d(rng);
  const fs::path p = scratch(snapshot_filename(1.0 / 3.0));
  write_snapshot(p, g, h);
  const Snapshot s = read_snapshot(p);
  EXPECT_EQ(s.h, h);
  EXPECT_EQ(s.x, g.nodes());
  EXPECT_EQ(snapshot_filename(0.5), "snapshot_0.5.csv");
}

TEST(Snapshot, MalformedFile) {
  const fs::path p = scratch("bad.csv");
  std::ofstream(p) << "x,h\n0.0,abc\n";
  EXPECT_THROW(read_snapshot(p), std::runtime_error);
  EXPECT_THROW(read_snapshot(scratch("missing.csv")), std::runtime_error);
}

TEST(Config, DefaultsAndOverrides) {
  const RunConfig rc = config_from(R"(
[run]
scenario = cpu_benchmark
t_end = 0.05
[grid]
dx = 0.005
[scheme]
name = gm
[stepping]
mode = adaptive
tol1 = 0.01
newton_tolerance = 1e-5
[output]
dir = somewhere
snapshot_every = 7
json = false
)");
  const Scenario& s = rc.scenario;
  EXPECT_EQ(s.grid.size(), 200u);
  EXPECT_EQ(s.scheme.scheme, TimeScheme::ImplicitGM);
  EXPECT_EQ(s.scheme.mobility.variant, MobilityVariant::Midpoint);
  EXPECT_EQ(s.stepping.mode, StepMode::Adaptive);
  EXPECT_EQ(s.stepping.tol1, 0.01);
  EXPECT_EQ(s.newton.tolerance, 1e-5);
  EXPECT_EQ(s.horizon(), 0.05);
  EXPECT_EQ(s.initial.hbar, 0.45);
  EXPECT_EQ(rc.output_dir, fs::path("somewhere"));
  EXPECT_EQ(s.snapshot_every, 7u);
  EXPECT_FALSE(rc.write_json);
}

TEST(Config, ModelBlock) {
  const RunConfig rc = config_from(R"(
[model]
family = power_law
mobility_order = 2.5
[grid]
points = 48
length = 3
[initial]
hbar = 0.3
amplitude = 0.2
)");
  EXPECT_EQ(rc.scenario.model.family(), ModelFamily::PowerLaw);
  EXPECT_EQ(rc.scenario.model.params().mobility_order, 2.5);
  EXPECT_EQ(rc.scenario.grid.size(), 48u);
  EXPECT_NEAR(rc.scenario.initial_state()[12], 0.3 * (1 + 0.2 * std::sin(std::numbers::pi / 4)), 1e-15);
}

TEST(Config, Errors) {
  EXPECT_THROW(config_from("[run]\nscenario = nope\n"), ConfigError);
  EXPECT_THROW(config_from("[model]\nalpha = -1\n"), ConfigError);
  EXPECT_THROW(config_from("[grid]\npoints = 3\n"), ConfigError);
  EXPECT_THROW(config_from("[stepping]\ndt = abc\n"), ConfigError);
  EXPECT_THROW(config_from("[stepping]\nmode = sometimes\n"), ConfigError);
  EXPECT_THROW(config_from("[run]\nt_end = 0\n"), ConfigError);
  EXPECT_THROW(config_from("[scheme]\nsubintervals = 7\n"), ConfigError);
  EXPECT_THROW(load_run_config(scratch("no_such.ini")), ConfigError);
}

TEST(Runner, WritesOutputs) {
  RunConfig rc = run_config_for_scenario("adaptive_smooth");
  rc.scenario.t_end = 0.02;
  rc.scenario.snapshot_every = 5;
  rc.output_dir = scratch("run_out");
  fs::remove_all(rc.output_dir);
  const RunArtifacts art = execute_run(rc);
  EXPECT_EQ(art.outcome.status, RunStatus::Completed);
  EXPECT_TRUE(fs::exists(rc.output_dir / "diag.csv"));
  EXPECT_TRUE(fs::exists(rc.output_dir / "summary.txt"));
  EXPECT_TRUE(fs::exists(rc.output_dir / "summary.json"));
  EXPECT_TRUE(fs::exists(rc.output_dir / snapshot_filename(0.0)));
  EXPECT_TRUE(fs::exists(rc.output_dir / snapshot_filename(art.outcome.t)));
  std::ifstream js(rc.output_dir / "summary.json");
  const auto j = nlohmann::json::parse(js);
  EXPECT_EQ(j["status"], "completed");
  EXPECT_EQ(j["aborted"], false);
  EXPECT_TRUE(j["first_negative_time"].is_null());
  std::ifstream diag(rc.output_dir / "diag.csv");
  std::string header;
  std::getline(diag, header);
  EXPECT_EQ(header, "t,mass,entropy,entropy_bound,min_h,lipschitz,dt,newton_iters");
  EXPECT_EQ(art.records.size(), art.outcome.accepted_steps + 1);
  EXPECT_LT(art.summary.mass_drift, 1e-6);
}

TEST(Runner, FirstNegativeMatchesDiagnostics) {
  RunConfig rc{cpu_benchmark_case(0.01, TimeScheme::ImplicitGM, StepMode::Fixed)};
  rc.scenario.t_end = 0.2;
  const RunArtifacts art = execute_run(rc, false);
  ASSERT_TRUE(art.summary.first_negative_time.has_value());
  for (const auto& r : art.records) {
    if (r.min_height < 0.0) {
      EXPECT_EQ(r.t, *art.summary.first_negative_time);
      break;
    }
  }
}
