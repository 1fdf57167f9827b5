#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "mqnd/pulses.hpp"

using namespace mqnd::pulses;

TEST(Envelope, PeakWidthAndWindow) {
  const GaussianPulse p{2.0, 100e-9, 40e-9};
  EXPECT_DOUBLE_EQ(p(100e-9), 2.0);
  EXPECT_NEAR(p(120e-9), 2.0 * std::exp(-std::numbers::pi / 4.0), 1e-12);
  EXPECT_DOUBLE_EQ(p(p.window_end() + 1e-12), 0.0);
  EXPECT_DOUBLE_EQ(p(p.window_start() - 1e-12), 0.0);
  EXPECT_GT(p(p.window_end() - 1e-12), 0.0);
}

TEST(Envelope, AnalyticPiAmplitudeGivesAreaPi) {
  const double tau = 200e-9;
  const GaussianPulse p{analytic_pi_amplitude(tau), 0.0, tau};
  // Rabi angle 2 * integral(Omega dt); trapezoid over the window.
  const int n = 20000;
  const double a = p.window_start(), b = p.window_end(), h = (b - a) / n;
  double area = 0.5 * (p(a) + p(b));
  for (int k = 1; k < n; ++k) area += p(a + k * h);
  area *= h;
  EXPECT_NEAR(2.0 * area, std::numbers::pi * std::erf(1.5 * std::sqrt(std::numbers::pi)), 1e-9);
}

TEST(Schedule, ProtocolTiming) {
  ProtocolTiming t;
  t.tau_pi = 120e-9;
  const auto s = make_protocol_schedule(t, 1.0, 2.0);
  EXPECT_DOUBLE_EQ(s.magnon.center, 1.5 * t.tau_d);
  EXPECT_DOUBLE_EQ(s.magnon.window_start(), 0.0);
  EXPECT_DOUBLE_EQ(s.qubit.center - s.magnon.center, 0.5 * (t.tau_pi + t.tau_d));
  EXPECT_DOUBLE_EQ(s.readout_start, s.qubit.center + 0.5 * t.tau_pi + t.readout_gap);
  EXPECT_DOUBLE_EQ(s.readout_time(), s.readout_start + t.delta_t_r);
  EXPECT_EQ(s.qubit.amplitude, 1.0);
  EXPECT_EQ(s.magnon.amplitude, 2.0);
  const auto bp = s.breakpoints();
  EXPECT_FALSE(bp.empty());
  for (std::size_t i = 1; i < bp.size(); ++i) EXPECT_LT(bp[i - 1], bp[i]);
}

TEST(Calibration, FindsInteriorMinimum) {
  const auto r = calibrate_pi_amplitude([](double x) { return (x - 1.3) * (x - 1.3); }, 1.0, 2.0, 1e-8);
  EXPECT_NEAR(r.amplitude, 1.3, 1e-6);
  EXPECT_GT(r.evaluations, 0);
}

TEST(Calibration, EdgeMinimumThrows) {
  EXPECT_THROW(calibrate_pi_amplitude([](double x) { return x; }, 1.0, 2.0, 1e-6), std::runtime_error);
}

TEST(Calibration, DefaultBracketAroundAnalyticAmplitude) {
  const double tau = 50e-9;
  const double target = 1.1 * analytic_pi_amplitude(tau);
  const auto r = calibrate_pi_amplitude_near(
      [&](double x) { return std::pow(std::sin(x * tau - target * tau), 2); }, tau, 1e-8);
  EXPECT_NEAR(r.amplitude / target, 1.0, 1e-6);
}

TEST(Displacement, PopulationIsSquaredProduct) {
  EXPECT_DOUBLE_EQ(displacement_amplitude_for_population(9.3, 0.1), 9.3 * 9.3 * 0.01);
}

TEST(Envelope, PlugInValuesAndFullArea) {
  const double a = 3.0, c = 1e-6, d = 50e-9;
  EXPECT_NEAR(gaussian_envelope(c + d, a, c, d), a * std::exp(-std::numbers::pi), 1e-15);
  EXPECT_NEAR(gaussian_envelope(c - d, a, c, d), a * std::exp(-std::numbers::pi), 1e-15);
  const int n = 100000;
  const double lo = c - 5 * d, h = 10 * d / n;
  double area = 0.5 * (gaussian_envelope(lo, a, c, d) + gaussian_envelope(lo + 10 * d, a, c, d));
  for (int k = 1; k < n; ++k) area += gaussian_envelope(lo + k * h, a, c, d);
  EXPECT_NEAR(area * h / (a * d), 1.0, 1e-6);
}

TEST(Displacement, QuadraticInDriveAmplitude) {
  EXPECT_EQ(displacement_amplitude_for_population(5.0, 0.0), 0.0);
  EXPECT_NEAR(displacement_amplitude_for_population(5.0, 0.2), 1.0, 1e-12);
  EXPECT_NEAR(displacement_amplitude_for_population(5.0, 0.4), 4.0, 1e-12);
}
