#include <gtest/gtest.h>

#include <cmath>

#include "fiberfilm/model.hpp"

using namespace fiberfilm;

TEST(Phi, LimitAtZero) {
  EXPECT_DOUBLE_EQ(phi(0.0), 1.0);
  EXPECT_NEAR(phi(1e-12), 1.0, 1e-11);
}

TEST(Phi, HighPrecisionReferences) {
  // 50-digit evaluations of the closed formula.
  EXPECT_NEAR(phi(1.0) / 2.130266166719343713 - 1.0, 0.0, 1e-13);
  EXPECT_NEAR(phi(10.6) / 19.479195381524008159 - 1.0, 0.0, 1e-12);
  EXPECT_NEAR(phi(5.0) / 8.3152216327173556863 - 1.0, 0.0, 1e-12);
  EXPECT_NEAR(phi(0.05) / 1.0503719188239520559 - 1.0, 0.0, 1e-14);
  EXPECT_NEAR(phi(0.2) / 1.2058106407447793356 - 1.0, 0.0, 1e-13);
}

TEST(Phi, ContinuousAcrossSeriesSwitch) {
  const double x = detail::kPhiSeriesSwitch;
  EXPECT_NEAR(detail::phi_series(x), detail::phi_closed(x), 1e-10);
  EXPECT_NEAR(detail::phi_series_derivative(x), detail::phi_closed_derivative(x), 1e-8);
}

TEST(Phi, DerivativeMatchesDifferenceQuotient) {
  for (double x : {0.01, 0.3, 1.0, 5.0, 10.6}) {
    const double h = 1e-6 * std::max(1.0, x);
    EXPECT_NEAR(phi_derivative(x), (phi(x + h) - phi(x - h)) / (2 * h), 1e-6 * std::max(1.0, phi_derivative(x)));
  }
}

TEST(Phi, RejectsNegative) { EXPECT_THROW(phi(-0.1), DomainError); }

TEST(Mobility, Examples) {
  EXPECT_EQ(PhysicalModel::fsm(5.0, 0.02, 0.0).mobility(0.0), 0.0);
  EXPECT_EQ(PhysicalModel::fsm(0.0, 1.0, 0.0).mobility(0.0), 0.0);
  EXPECT_DOUBLE_EQ(PhysicalModel::power_law(3.0).mobility(2.0), 8.0);
  const auto fsm = PhysicalModel::fsm(5.0, 0.02, 0.0);
  const double h = 1e-10;
  EXPECT_NEAR(fsm.mobility(h) / (h * h * h), 1.0 / (3.0 * phi(5.0)), 1e-10);
}

TEST(Mobility, SlipTermAddsPositiveContribution) {
  const auto no_slip = PhysicalModel::fsm(2.0, 1.0, 0.0, 0.0);
  const auto slip = PhysicalModel::fsm(2.0, 1.0, 0.0, 0.1);
  EXPECT_GT(slip.mobility(0.5), no_slip.mobility(0.5));
}

TEST(Mobility, DerivativeMatchesDifferenceQuotient) {
  const auto m = PhysicalModel::fsm(10.6, 0.223227, 0.001, 0.05);
  for (double h : {0.05, 0.5, 1.471}) {
    const double e = 1e-6;
    EXPECT_NEAR(m.mobility_derivative(h), (m.mobility(h + e) - m.mobility(h - e)) / (2 * e),
                1e-6 * m.mobility_derivative(h));
  }
}

TEST(Mobility, RejectsNegativeThickness) {
  EXPECT_THROW(PhysicalModel::fsm(5.0, 0.02, 0.0).mobility(-1e-3), DomainError);
}

TEST(Model, ParameterValidation) {
  EXPECT_THROW(PhysicalModel::fsm(-1.0, 1.0, 0.0), DomainError);
  EXPECT_THROW(PhysicalModel::fsm(1.0, 0.0, 0.0), DomainError);
  EXPECT_THROW(PhysicalModel::fsm(1.0, 1.0, -1.0), DomainError);
  EXPECT_THROW(PhysicalModel::power_law(1.5), DomainError);
  EXPECT_NO_THROW(PhysicalModel::power_law(2.5));
}

TEST(Model, FamilyNames) {
  EXPECT_EQ(parse_model_family(to_string(ModelFamily::FSM)), ModelFamily::FSM);
  EXPECT_EQ(parse_model_family(to_string(ModelFamily::CM)), ModelFamily::CM);
  EXPECT_EQ(parse_model_family(to_string(ModelFamily::PowerLaw)), ModelFamily::PowerLaw);
}

TEST(PressureTerms, Examples) {
  const auto z = PhysicalModel::fsm(5.0, 0.02, 0.0).pressure_terms(1e-14);
  EXPECT_NEAR(z.z_minus, 250.0, 1e-9);
  EXPECT_DOUBLE_EQ(PhysicalModel::fsm(1.0, 1.0, 0.001).pressure_terms(1.0).z_plus, -0.001);
  EXPECT_NEAR(PhysicalModel::fsm(3.092621559, 0.123, 0.04).pressure_terms(1.0).z_minus, 6.1435596584846786638, 1e-12);
}

TEST(PressureTerms, CrasterMatarHasNoStabilization) {
  const auto cm = PhysicalModel::craster_matar(1.0, 1.0);
  EXPECT_EQ(cm.pressure_terms(0.5).z_plus, 0.0);
  EXPECT_GT(cm.pressure_terms(0.5).z_minus, 0.0);
}

TEST(PressureTerms, SlopesAreCancellationFree) {
  const auto m = PhysicalModel::fsm(10.6, 0.223227, 0.001);
  EXPECT_NEAR(m.z_plus_slope(0.7, 0.7), m.dz_plus(0.7), 1e-12 * std::abs(m.dz_plus(0.7)));
  EXPECT_NEAR(m.z_minus_slope(0.7, 0.7), m.dz_minus(0.7), 1e-12 * std::abs(m.dz_minus(0.7)));
  EXPECT_NEAR(m.z_plus_slope(0.7, 0.9), (m.z_plus(0.7) - m.z_plus(0.9)) / (0.7 - 0.9), 1e-10);
  EXPECT_THROW(m.pressure_terms(0.0), DomainError);
}
