#include <gtest/gtest.h>

#include <cmath>

#include "fiberfilm/scenarios.hpp"
#include "fiberfilm/stepper.hpp"

using namespace fiberfilm;

TEST(Newton, ConstantStateIsFixedPoint) {
  const PeriodicGrid g(32, 1.0);
  const Field c(32, 0.6);
  for (const auto& cfg : {SchemeConfig::bem(PhysicalModel::fsm(5.0, 0.02, 1e-5)),
                          SchemeConfig::gm(PhysicalModel::fsm(5.0, 0.02, 1e-5))}) {
    const NewtonOutcome r = newton_solve(NewtonConfig{}, cfg, g, c, 1e-3);
    ASSERT_TRUE(r.success);
    EXPECT_LE(r.iterations, 1);
    for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR((*r.solution)[i], 0.6, 1e-12);
  }
}

TEST(Newton, ConvergesOnPerturbedState) {
  const PeriodicGrid g(100, 1.0);
  const Field u = ic_perturbed_flat(g, 0.95, 0.01);
  NewtonConfig cfg;
  cfg.tolerance = 1e-6;
  const NewtonOutcome r = newton_solve(cfg, SchemeConfig::bem(PhysicalModel::fsm(5.0, 0.02, 1e-5)), g, u, 1e-3);
  ASSERT_TRUE(r.success);
  EXPECT_LT(r.final_residual_norm, 1e-6);
  EXPECT_LE(r.iterations, 6);
}

TEST(Newton, ExtendedPrecisionReachesTightTolerance) {
  const PeriodicGrid g(100, 1.0);
  const Field u = ic_perturbed_flat(g, 0.95, 0.01);
  const auto scheme = SchemeConfig::bem(PhysicalModel::fsm(5.0, 0.02, 1e-5));
  NewtonConfig cfg;
  cfg.tolerance = 1e-9;
  cfg.extended_precision = true;
  const NewtonOutcome r = newton_solve(cfg, scheme, g, u, 1e-3);
  ASSERT_TRUE(r.success) << r.failure_reason;
  EXPECT_LT(r.final_residual_norm, 1e-9);
}

TEST(Newton, HugeStepDoesNotSucceedSilently) {
  const PeriodicGrid g(64, 1.0);
  const Field u = ic_perturbed_flat(g, 0.45, 0.3);
  NewtonConfig cfg;
  cfg.tolerance = 1e-12;
  const NewtonOutcome r = newton_solve(cfg, SchemeConfig::bem(PhysicalModel::fsm(5.0, 0.005, 0.0)), g, u, 1e6);
  EXPECT_LE(r.iterations, 15);
  if (r.success) EXPECT_LT(r.final_residual_norm, cfg.tolerance);
  else EXPECT_FALSE(r.solution.has_value());
  EXPECT_FALSE(std::isnan(r.final_residual_norm) && r.success);
}

TEST(Newton, RejectsBadArguments) {
  const PeriodicGrid g(16, 1.0);
  const auto s = SchemeConfig::gm(PhysicalModel::power_law(3.0));
  EXPECT_THROW(newton_solve(NewtonConfig{}, s, g, Field(16, 1.0), 0.0), std::invalid_argument);
  EXPECT_THROW(newton_solve(NewtonConfig{}, s, g, Field(10, 1.0), 1e-3), std::invalid_argument);
}

TEST(Lte, Examples) {
  const Field one(8, 1.0), next(8, 1.1);
  for (double e : lte(one, one, one, 1e-3, 1e-3)) EXPECT_EQ(e, 0.0);
  for (double e : lte(next, one, one, 1e-3, 1e-3)) EXPECT_NEAR(e, 0.1, 1e-15);
  // Constant relative rate with equal steps.
  const Field a(8, 1.0), b(8, 1.05), c(8, 1.05 * 1.05);
  for (double e : lte(c, b, a, 2e-3, 2e-3)) EXPECT_NEAR(e, 0.0, 1e-14);
  // Step ratio scales the previous increment.
  for (double e : lte(c, b, a, 4e-3, 2e-3)) EXPECT_NEAR(e, 0.05, 1e-14);
  EXPECT_THROW(lte(one, Field(8, 0.0), one, 1e-3, 1e-3), PositivityViolation);
  EXPECT_THROW(lte(one, one, Field(7, 1.0), 1e-3, 1e-3), std::invalid_argument);
}

TEST(StepFixed, ConstantStateStaysPut) {
  const PeriodicGrid g(32, 1.0);
  StepController ctrl;
  ctrl.dt = 1e-2;
  const auto r = step_fixed(ctrl, SchemeConfig::bem(PhysicalModel::fsm(5.0, 0.02, 1e-5)), NewtonConfig{}, g,
                            Field(32, 0.8), 0.1);
  EXPECT_EQ(r.status, RunStatus::Completed);
  EXPECT_EQ(r.accepted_steps, 10u);
  EXPECT_NEAR(r.t, 0.1, 1e-12);
  for (double v : r.state) EXPECT_NEAR(v, 0.8, 1e-10);
}

TEST(StepFixed, ClampToEnd) {
  const PeriodicGrid g(32, 1.0);
  StepController ctrl;
  ctrl.dt = 0.03;
  ctrl.clamp_to_end = true;
  const auto r = step_fixed(ctrl, SchemeConfig::gm(PhysicalModel::power_law(3.0)), NewtonConfig{}, g,
                            Field(32, 1.0), 0.1);
  EXPECT_EQ(r.accepted_steps, 4u);
  EXPECT_EQ(r.t, 0.1);
  EXPECT_NEAR(r.log.back().dt_used, 0.01, 1e-12);
}

TEST(StepFixed, AbortsAfterFiveFailuresHalvingEachTime) {
  const PeriodicGrid g(32, 1.0);
  StepController ctrl;
  ctrl.dt = 1e-3;
  NewtonConfig never;
  never.tolerance = 1e-300;
  const auto r = step_fixed(ctrl, SchemeConfig::bem(PhysicalModel::fsm(5.0, 0.02, 1e-5)), never, g,
                            ic_perturbed_flat(g, 0.9, 0.05), 1.0);
  EXPECT_EQ(r.status, RunStatus::AbortedNewton);
  EXPECT_TRUE(r.aborted());
  EXPECT_EQ(r.newton_failures, 5u);
  ASSERT_EQ(r.log.size(), 5u);
  for (std::size_t k = 0; k < 5; ++k) EXPECT_DOUBLE_EQ(r.log[k].dt_used, 1e-3 / std::pow(2.0, double(k)));
  EXPECT_EQ(r.accepted_steps, 0u);
  EXPECT_EQ(r.t, 0.0);
}

TEST(StepFixed, BemStopsOnPositivityBreachGmRecordsFirstNegative) {
  const Scenario gm = cpu_benchmark_case(0.01, TimeScheme::ImplicitGM, StepMode::Fixed);
  StepController ctrl = gm.stepping;
  ctrl.stop_at_first_negative = true;
  const auto r = integrate(ctrl, gm.scheme, gm.newton, gm.grid, gm.initial_state(), 0.0, 1.0);
  ASSERT_TRUE(r.first_negative_time.has_value());
  EXPECT_EQ(r.status, RunStatus::StoppedAtNegative);
  EXPECT_LT(r.min_height, 0.0);
  EXPECT_EQ(*r.first_negative_time, r.t);
}

TEST(StepAdaptive, FirstStepGrowsByOnePercent) {
  const PeriodicGrid g(32, 1.0);
  StepController ctrl;
  ctrl.dt = 1e-3;
  const auto r = step_adaptive(ctrl, SchemeConfig::bem(PhysicalModel::fsm(5.0, 0.02, 1e-5)), NewtonConfig{}, g,
                               ic_perturbed_flat(g, 0.9), 1e-3);
  EXPECT_EQ(r.accepted_steps, 1u);
  EXPECT_DOUBLE_EQ(r.final_dt, 1e-3 * 1.01);
  EXPECT_FALSE(r.log[0].lte_max.has_value());
}

TEST(StepAdaptive, DtBounds) {
  const PeriodicGrid g(32, 1.0);
  StepController ctrl;
  ctrl.dt = 1e-3;
  ctrl.dt_max = 1.005e-3;
  const auto r = step_adaptive(ctrl, SchemeConfig::bem(PhysicalModel::fsm(5.0, 0.02, 1e-5)), NewtonConfig{}, g,
                               Field(32, 0.9), 1e-2);
  EXPECT_DOUBLE_EQ(r.final_dt, 1.005e-3);
  StepController bad;
  bad.dt_min = 1.0;
  bad.dt_max = 0.5;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(StepAdaptive, SmoothScenarioGrowthPattern) {
  const Scenario s = builtin_scenario("adaptive_smooth");
  int max_iters = 0;
  const auto r = integrate(s.stepping, s.scheme, s.newton, s.grid, s.initial_state(), 0.0, s.horizon(),
                           [&](const AcceptedStep& st) { max_iters = std::max(max_iters, st.newton_iterations); });
  EXPECT_EQ(r.status, RunStatus::Completed);
  EXPECT_EQ(r.newton_failures, 0u);
  EXPECT_LE(max_iters, 6);
  int events = 0;
  std::size_t last = 0;
  for (std::size_t k = 0; k < r.log.size(); ++k) {
    if (!r.log[k].growth_event) continue;
    const double t_after = r.log[k].t_before + r.log[k].dt_used;
    if (t_after <= 1.0) ++events;
    if (last == 0) EXPECT_EQ(k + 1, 4u);
    else EXPECT_EQ(k - last, 3u);
    last = k;
  }
  EXPECT_NEAR(events, 20, 2);
}

TEST(StepMode, Names) {
  EXPECT_EQ(parse_step_mode("fixed"), StepMode::Fixed);
  EXPECT_EQ(parse_step_mode("adaptive"), StepMode::Adaptive);
  EXPECT_THROW(parse_step_mode("rk"), ConfigError);
}
