#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "mqnd/readout.hpp"

using namespace mqnd::readout;

TEST(Correction, LinearMixOfIdealProbabilities) {
  const ReadoutModel m{0.043, 0.040, 31e-9};
  EXPECT_DOUBLE_EQ(apply_readout_correction(1.0, m), 1.0 - 0.043);
  EXPECT_DOUBLE_EQ(apply_readout_correction(0.0, m), 0.040);
  EXPECT_NEAR(m.fidelity(), 0.917, 1e-12);
  // Inverting the affine map recovers the ideal value.
  for (double p : {0.0, 0.13, 0.5, 0.87, 1.0}) {
    const double c = apply_readout_correction(p, m);
    EXPECT_NEAR((c - m.eps_e) / (1.0 - m.eps_g - m.eps_e), p, 1e-12);
  }
  EXPECT_THROW(apply_readout_correction(1.1, m), std::invalid_argument);
}

TEST(Errors, ForwardAndInverseRoundTrip) {
  const double eg = 0.03, ee = 0.06, ini = 0.04, epi = 0.02;
  const auto [peg, pee] = predicted_probabilities(eg, ee, ini, epi);
  const MeasuredProbabilities m{peg, pee, ini};
  const auto r = solve_readout_errors(m, epi, 5e-9);
  EXPECT_NEAR(r.eps_g, eg, 1e-12);
  EXPECT_NEAR(r.eps_e, ee, 1e-12);
  EXPECT_EQ(r.delta_t_r, 5e-9);
}

TEST(Errors, InconsistentMeasurementThrows) {
  // Visibility above what any control error allows.
  const MeasuredProbabilities m{0.01, 0.999, 0.04};
  EXPECT_THROW(solve_readout_errors(m, 0.0), InconsistentReadoutError);
  EXPECT_THROW(solve_readout_errors(MeasuredProbabilities{0.5, 0.2, 0.04}, 0.0),
               std::invalid_argument);
}

namespace {

// Control error at which eps_e of the default measurement reaches zero.
double eps_pi_at_zero_eps_e(const MeasuredProbabilities& m) {
  double lo = 0.0, hi = 0.5;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (solve_readout_errors_raw(m, mid).second > 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST(Bounds, LinearControlErrorGivesInterpolatedCrossing) {
  const MeasuredProbabilities m;
  const double e0 = 0.01, e_star = eps_pi_at_zero_eps_e(m), t_star = 40.5e-9;
  const auto eps_pi = [&](std::span<const double> d) {
    std::vector<double> v;
    for (double x : d) v.push_back(e0 + (e_star - e0) * x / t_star);
    return v;
  };
  const auto b = bound_readout_fidelity(eps_pi, m, 1e-9, 100e-9);
  EXPECT_NEAR(b.crossing_delay, t_star, 1e-12);
  EXPECT_NEAR(b.max_delay, 41e-9, 1e-15);
  EXPECT_NEAR(b.midrange.delta_t_r, 20e-9, 1e-15);
  EXPECT_EQ(b.at_max_delay.eps_e, 0.0);
  EXPECT_GT(b.fidelity_max(), b.fidelity_min());
  const auto direct = solve_readout_errors(m, e0);
  EXPECT_NEAR(b.at_min_delay.eps_g, direct.eps_g, 1e-15);
}

TEST(Bounds, ConstantControlErrorGivesCoincidingBounds) {
  const auto flat = [](std::span<const double> d) { return std::vector<double>(d.size(), 0.01); };
  const auto b = bound_readout_fidelity(flat, MeasuredProbabilities{}, 1e-9, 20e-9);
  EXPECT_EQ(b.max_delay, 0.0);
  EXPECT_DOUBLE_EQ(b.fidelity_min(), b.fidelity_max());
  EXPECT_DOUBLE_EQ(b.midrange.eps_g, b.at_min_delay.eps_g);
}

TEST(Bounds, NoCrossingWithinCapThrows) {
  const auto slow = [](std::span<const double> d) {
    std::vector<double> v;
    for (double x : d) v.push_back(0.01 + 1e3 * x);  // +2e-5 over the scan
    return v;
  };
  EXPECT_THROW(bound_readout_fidelity(slow, MeasuredProbabilities{}, 1e-9, 20e-9),
               std::runtime_error);
}

TEST(Correction, ZeroErrorsAreIdentity) {
  const ReadoutModel m{0.0, 0.0, 0.0};
  for (double p : {0.0, 0.3, 1.0}) EXPECT_EQ(apply_readout_correction(p, m), p);
  EXPECT_NEAR(apply_readout_correction(1.0, ReadoutModel{0.043, 0.040, 0.0}), 0.957, 1e-15);
  EXPECT_NEAR(apply_readout_correction(0.5, ReadoutModel{0.043, 0.040, 0.0}), 0.4985, 1e-15);
}

TEST(Errors, DecoupledSystemRecoversInputs) {
  const double eg = 0.043, ee = 0.040;
  const MeasuredProbabilities m{eg, 1.0 - ee, 0.0};
  const auto r = solve_readout_errors(m, 0.0);
  EXPECT_NEAR(r.eps_g, eg, 1e-15);
  EXPECT_NEAR(r.eps_e, ee, 1e-15);
}

TEST(Shots, AverageIsUnbiasedWithinBinomialError) {
  const VoltageModel vm;
  const double p = 0.3;
  const std::size_t n = 100000;
  const auto s = sample_shots(p, n, vm, 42);
  const double se = std::sqrt(p * (1 - p) / n);
  EXPECT_NEAR(s.p_e_average, p, 5 * se + 1e-3);
  EXPECT_NEAR(s.p_e_thresholded, p, 5 * se);
  EXPECT_EQ(s.shots.size(), n);
  EXPECT_DOUBLE_EQ(s.threshold, 0.037);
}

TEST(Shots, SeedDeterminism) {
  const VoltageModel vm;
  const auto a = sample_shots(0.5, 1000, vm, 7);
  const auto b = sample_shots(0.5, 1000, vm, 7);
  const auto c = sample_shots(0.5, 1000, vm, 8);
  std::ostringstream sa, sb, sc;
  write_shots_csv(sa, a);
  write_shots_csv(sb, b);
  write_shots_csv(sc, c);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_NE(sa.str(), sc.str());
}

TEST(Shots, RotationAlignsTheStateSeparation) {
  VoltageModel vm;
  vm.v_g = {0.01, 0.02};
  vm.v_e = {0.01 + 0.05 * std::cos(1.0), 0.02 + 0.05 * std::sin(1.0)};
  EXPECT_NEAR(rotation_angle(vm), 1.0, 1e-12);
  EXPECT_NEAR(corrected_signal(vm.v_e, vm), 0.05, 1e-12);
  EXPECT_NEAR(corrected_signal(vm.v_g, vm), 0.0, 1e-12);
  vm.sigma = 0.0;
  const auto s = sample_shots(1.0, 10, vm, 1);
  EXPECT_DOUBLE_EQ(s.p_e_thresholded, 1.0);
}

TEST(Shots, MisassignmentForWellSeparatedStatesIsNegligible) {
  const VoltageModel vm;
  EXPECT_LT(misassignment_probability(vm), 1e-50);
  VoltageModel close = vm;
  close.v_e = {2 * vm.sigma, 0.0};
  EXPECT_NEAR(misassignment_probability(close), 0.5 * std::erfc(1.0 / std::sqrt(2.0)), 1e-12);
}

TEST(Shots, GroundStateWithoutNoiseAveragesToZero) {
  VoltageModel vm;
  vm.sigma = 0.0;
  const auto s = sample_shots(0.0, 500, vm, 3);
  EXPECT_EQ(s.p_e_average, 0.0);
  EXPECT_EQ(s.p_e_thresholded, 0.0);
}
