#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "mqnd/spectra.hpp"
#include "mqnd/units.hpp"

using namespace mqnd;
using namespace mqnd::spectra;

namespace {

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
  return v;
}

TransmissionModelParams cavity() {
  TransmissionModelParams p;
  p.omega_c = ghz(8.4);
  p.kappa_c = mhz(2.0);
  p.kappa_in = mhz(0.5);
  p.kappa_out = mhz(0.5);
  p.omega_m = ghz(8.4);
  p.gamma_m = mhz(1.6);
  p.g_mc = 0.0;
  return p;
}

GambettaSpectrumParams device_spectrum(double nbar) {
  GambettaSpectrumParams p;
  p.gamma_q = 2.0 / 0.97e-6;
  p.gamma_m = mhz(1.61);
  p.chi_qm = mhz(-1.91);
  p.delta_d = mhz(-0.01);
  p.omega_ref = mhz(4.0);
  p.omega_d = drive_for_population(nbar, p.gamma_m, p.delta_d);
  return p;
}

// Local maxima of a sampled curve.
std::vector<std::size_t> maxima(const std::vector<double>& y) {
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i + 1 < y.size(); ++i)
    if (y[i] > y[i - 1] && y[i] >= y[i + 1]) out.push_back(i);
  return out;
}

}  // namespace

TEST(Transmission, BareCavityPeaksAtUnity) {
  const auto p = cavity();
  EXPECT_NEAR(cavity_transmission(p.omega_c, p), 1.0, 1e-12);
  EXPECT_NEAR(cavity_transmission(p.omega_c + 0.5 * p.kappa_c, p), 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(std::abs(transmission_coefficient(p.omega_c, p)), 2 * std::sqrt(p.kappa_in * p.kappa_out) / p.kappa_c, 1e-12);
}

TEST(Transmission, ResonantCouplingSplitsByTwoG) {
  auto p = cavity();
  p.g_mc = mhz(15.0);
  for (double d : {mhz(3.0), mhz(17.0)}) {
    EXPECT_NEAR(cavity_transmission(p.omega_c + d, p), cavity_transmission(p.omega_c - d, p), 1e-12);
  }
  const auto w = linspace(p.omega_c - mhz(30), p.omega_c + mhz(30), 6001);
  std::vector<double> t;
  for (double x : w) t.push_back(cavity_transmission(x, p));
  const auto pk = maxima(t);
  ASSERT_EQ(pk.size(), 2u);
  EXPECT_NEAR(to_mhz(w[pk[1]] - w[pk[0]]), 30.0, 0.1);
}

TEST(Transmission, InvalidRatesThrow) {
  auto p = cavity();
  p.kappa_in = p.kappa_out = p.kappa_c;
  EXPECT_THROW(cavity_transmission(p.omega_c, p), std::invalid_argument);
}

TEST(Transmission, CoilFitRecoversTuningAndCoupling) {
  auto model = cavity();
  const double w0 = ghz(8.35), xi = mhz(44.2) / 1e-3, g = mhz(12.0);
  TransmissionMap map;
  map.currents = linspace(0.0, 2.2e-3, 12);
  map.omegas = linspace(model.omega_c - mhz(40), model.omega_c + mhz(40), 81);
  map.magnitude.resize(12, 81);
  auto p = model;
  p.g_mc = g;
  for (int a = 0; a < 12; ++a) {
    p.omega_m = w0 + xi * map.currents[a];
    for (int b = 0; b < 81; ++b) map.magnitude(a, b) = cavity_transmission(map.omegas[b], p);
  }
  const auto fit = fit_avoided_crossing(map, model, w0 + mhz(2), xi * 0.97, g * 1.1);
  EXPECT_NEAR(fit.omega_m0 / w0, 1.0, 1e-9);
  EXPECT_NEAR(fit.xi / xi, 1.0, 1e-6);
  EXPECT_NEAR(fit.g_mc / g, 1.0, 1e-6);
  EXPECT_TRUE(fit.fit.converged);
}

TEST(Transmission, CoilTransferRate) {
  EXPECT_NEAR(to_mhz(coil_transfer(1e-3, ghz(7.7), 3e-3, ghz(7.7) + mhz(88.4))) * 1e-3, 44.2, 1e-9);
  EXPECT_THROW(coil_transfer(1.0, 0.0, 1.0, 1.0), std::invalid_argument);
}

TEST(Gambetta, UndrivenSpectrumIsTheBareLorentzian) {
  auto p = device_spectrum(0.0);
  const auto d = gambetta_derived(p);
  EXPECT_EQ(d.D, 0.0);
  const auto weights = fock_weights(d);
  EXPECT_EQ(weights[0], 1.0);
  for (std::size_t n = 1; n < weights.size(); ++n) EXPECT_EQ(weights[n], 0.0);
  for (double x : {-mhz(2.0), 0.0, mhz(0.3)}) {
    const double w = p.omega_ref + x;
    const double hw = 0.5 * p.gamma_q;
    EXPECT_NEAR(gambetta_spectrum(w, p), hw / (std::numbers::pi * (x * x + hw * hw)), 1e-20);
  }
}

TEST(Gambetta, SpectralWeightIsConserved) {
  const auto p = device_spectrum(1.2);
  const double width = 30.0 * (p.gamma_q + p.gamma_m * 10);
  const auto w = linspace(p.omega_ref - width, p.omega_ref + width, 200001);
  const auto s = gambetta_spectrum(w, p);
  double total = 0.0;
  for (std::size_t i = 1; i < w.size(); ++i) total += 0.5 * (s[i] + s[i - 1]) * (w[i] - w[i - 1]);
  EXPECT_NEAR(total, 1.0, 0.01);
}

TEST(Gambetta, FockComponentsAreSpacedByTheDispersiveShift) {
  const auto p = device_spectrum(0.53);
  const auto d = gambetta_derived(p);
  EXPECT_NEAR(d.omega_q(p, 1) - d.omega_q(p, 0), 2 * p.chi_qm + p.delta_d, 1e-6);
  EXPECT_NEAR(d.gamma_q(p, 2) - d.gamma_q(p, 1), p.gamma_m, 1e-6);
  EXPECT_NEAR(d.nbar_g, 0.53, 1e-12);
  EXPECT_GT(d.nbar_g, d.nbar_e);
}

TEST(Gambetta, ResolvedPeaksSitAtTheComponentFrequencies) {
  auto p = device_spectrum(0.8);
  p.gamma_m = mhz(0.2);
  p.gamma_q = mhz(0.2);
  p.omega_d = drive_for_population(0.8, p.gamma_m, p.delta_d);
  const auto d = gambetta_derived(p);
  const auto w = linspace(d.omega_q(p, 3) - mhz(1), d.omega_q(p, 0) + mhz(1), 20001);
  const auto s = gambetta_spectrum(w, p);
  auto pk = maxima(s);
  ASSERT_GE(pk.size(), 3u);
  std::sort(pk.begin(), pk.end(), [&](auto a, auto b) { return s[a] > s[b]; });
  const double sep = std::abs(w[pk[0]] - w[pk[1]]);
  EXPECT_NEAR(sep / std::abs(2 * p.chi_qm + p.delta_d), 1.0, 0.01);
}

TEST(Gambetta, DeepDispersiveWeightsArePoissonian) {
  GambettaSpectrumParams p;
  p.gamma_q = mhz(0.1);
  p.gamma_m = mhz(0.1);
  p.chi_qm = mhz(-50.0);
  p.delta_d = 0.0;
  const double nbar = 1.0;
  p.omega_d = drive_for_population(nbar, p.gamma_m, p.delta_d);
  const auto w = fock_weights(gambetta_derived(p));
  ASSERT_GE(w.size(), 4u);
  for (int n = 0; n < 4; ++n) {
    const double poisson = std::pow(nbar, n) * std::exp(-nbar) / std::tgamma(n + 1.0);
    EXPECT_NEAR(w[n] / poisson, 1.0, 0.05) << n;
  }
}

TEST(Fft, DampedCosinePeaksAtItsFrequency) {
  const double f = 3.0e6;
  std::vector<double> t, y;
  for (int k = 0; k < 300; ++k) {
    t.push_back(20e-9 + 10e-9 * k);
    y.push_back(0.5 + 0.5 * std::exp(-t.back() / 1e-6) * std::cos(kTwoPi * f * t.back()));
  }
  const auto s = normalized_fft_spectrum(t, y, true, 4096);
  const auto it = std::max_element(s.value.begin(), s.value.end());
  EXPECT_DOUBLE_EQ(*it, 1.0);
  const double bin = s.frequency_hz[1];
  EXPECT_NEAR(s.frequency_hz[it - s.value.begin()], f, bin);
  EXPECT_LT(bin, 1.0 / (300 * 10e-9));
}

TEST(Fft, RejectsConstantAndNonUniformSeries) {
  const std::vector<double> t{0, 1e-8, 2e-8, 3e-8}, flat(4, 0.3);
  EXPECT_THROW(normalized_fft_spectrum(t, flat, true), std::invalid_argument);
  const auto plain = normalized_fft_spectrum(t, flat, false);
  EXPECT_DOUBLE_EQ(plain.value[0], 1.0);
  const std::vector<double> uneven{0, 1e-8, 2.5e-8, 3e-8};
  EXPECT_THROW(normalized_fft_spectrum(uneven, flat), std::invalid_argument);
}

TEST(SpectrumFit, RecoversGeneratingParameters) {
  const auto truth = device_spectrum(0.53);
  const auto w = linspace(truth.omega_ref - mhz(15), truth.omega_ref + mhz(5), 161);
  auto y = gambetta_spectrum(w, truth);
  for (auto& v : y) v = 2e6 * v + 0.01;
  SpectrumFitGuess g{truth.omega_ref + mhz(0.2), truth.gamma_m * 1.1, truth.chi_qm * 0.95, 0.45, 0.0, 0.0};
  const auto fit = fit_spectrum(w, y, truth, g);
  EXPECT_NEAR(fit.params.chi_qm / truth.chi_qm, 1.0, 1e-8);
  EXPECT_NEAR(fit.params.gamma_m / truth.gamma_m, 1.0, 1e-8);
  EXPECT_NEAR(fit.nbar, 0.53, 1e-8);
  EXPECT_NEAR(fit.amplitude / 2e6, 1.0, 1e-8);
  EXPECT_NEAR(fit.offset, 0.01, 1e-9);
}

TEST(SpectrumFit, NoiseRobustDispersiveShift) {
  const auto truth = device_spectrum(0.53);
  const auto w = linspace(truth.omega_ref - mhz(15), truth.omega_ref + mhz(5), 161);
  auto y = gambetta_spectrum(w, truth);
  const double peak = *std::max_element(y.begin(), y.end());
  std::mt19937 rng(11);
  std::normal_distribution<double> n(0.0, 0.01 * peak);
  for (auto& v : y) v += n(rng);
  SpectrumFitGuess g{truth.omega_ref, truth.gamma_m, truth.chi_qm * 1.05, 0.5, 0.0, 0.0};
  const auto fit = fit_spectrum(w, y, truth, g);
  EXPECT_NEAR(fit.params.chi_qm / truth.chi_qm, 1.0, 0.03);
}

TEST(SpectrumFit, UndrivenLineGivesTheDephasingTime) {
  const auto p = device_spectrum(0.0);
  const auto w = linspace(p.omega_ref - mhz(5), p.omega_ref + mhz(5), 101);
  const auto y = gambetta_spectrum(w, p);
  const auto fit = fit_lorentzian(w, y, p.omega_ref + mhz(0.1), mhz(0.5));
  EXPECT_NEAR(2.0 / fit.gamma * 1e6, 0.97, 1e-6);
  EXPECT_NEAR(fit.center, p.omega_ref, 1.0);
}

TEST(Calibration, NarrowPulseKernelReproducesTheSpectrum) {
  CalibrationSpectrumParams c;
  c.spectrum = device_spectrum(0.5);
  c.tau_tilde = 100e-6;
  c.visibility = 2e6;
  c.floor = 0.05;
  const auto w = linspace(c.spectrum.omega_ref - mhz(8), c.spectrum.omega_ref + mhz(2), 21);
  const auto conv = convolved_calibration_spectrum(w, c);
  const auto s = gambetta_spectrum(w, c.spectrum);
  const double top = c.visibility * *std::max_element(s.begin(), s.end());
  for (std::size_t i = 0; i < w.size(); ++i) {
    EXPECT_NEAR(conv[i], c.visibility * s[i] + c.floor, 1e-3 * top) << i;
  }
}

TEST(Calibration, FitRecoversPopulationAndPulseWidth) {
  CalibrationSpectrumParams c;
  c.spectrum = device_spectrum(0.4);
  c.tau_tilde = 400e-9;
  c.visibility = 3e6;
  c.floor = 0.08;
  const auto w = linspace(c.spectrum.omega_ref - mhz(10), c.spectrum.omega_ref + mhz(4), 57);
  const auto y = convolved_calibration_spectrum(w, c);
  auto guess = c;
  guess.tau_tilde = 350e-9;
  guess.visibility = 2.5e6;
  guess.floor = 0.07;
  const auto fit = fit_calibration_spectrum(w, y, guess, 0.3);
  EXPECT_NEAR(fit.nbar, 0.4, 1e-7);
  EXPECT_NEAR(fit.params.tau_tilde / 400e-9, 1.0, 1e-7);
}

TEST(Lambda, DecayGivesTheMagnonLinewidth) {
  const double t1m = 82e-9;
  std::vector<double> tau, lam;
  for (int k = 0; k < 8; ++k) {
    tau.push_back(100e-9 * k);
    lam.push_back(lambda_model(tau.back(), 9.3, t1m));
  }
  const auto fit = fit_lambda_decay(tau, lam);
  EXPECT_NEAR(fit.t1_m / t1m, 1.0, 1e-9);
  EXPECT_NEAR(fit.lambda0, 9.3, 1e-8);
  EXPECT_NEAR(fit.linewidth_hz(), 1.0 / (kTwoPi * t1m), 1e-3);
  std::reverse(lam.begin(), lam.end());
  EXPECT_THROW(fit_lambda_decay(tau, lam), std::runtime_error);
  lam[0] = -1.0;
  EXPECT_THROW(fit_lambda_decay(tau, lam), std::invalid_argument);
}

TEST(Spectroscopy, RecoversLineCentreAndSkipsTheExclusionWindow) {
  SpectroscopyData d;
  d.omega_d = linspace(ghz(7.78), ghz(7.80), 41);
  d.amplitudes = linspace(0.0, 0.2, 9);
  const double c = ghz(7.7886), sigma = mhz(1.2), peak = 60.0, off = 2.0;
  d.delta_v.resize(41, 9);
  for (int i = 0; i < 41; ++i) {
    const double z = (d.omega_d[i] - c) / sigma;
    const double l2 = peak * std::exp(-0.5 * z * z) + off;
    for (int j = 0; j < 9; ++j) d.delta_v(i, j) = 0.07 * std::exp(-l2 * d.amplitudes[j] * d.amplitudes[j]);
  }
  // A corrupted band near the e-f line must not influence the result.
  const double ef = ghz(7.797);
  for (int i = 0; i < 41; ++i)
    if (std::abs(d.omega_d[i] - ef) < mhz(1.0)) d.delta_v.row(i).setConstant(0.01);
  const auto fit = qubit_assisted_spectroscopy_fit(d, ef, mhz(1.0), 2);
  EXPECT_NEAR(fit.omega_m_g, c, hz(100.0));
  EXPECT_NEAR(fit.line_sigma / sigma, 1.0, 1e-5);
  EXPECT_NEAR(fit.line_offset, off, 1e-4);
  EXPECT_LT(fit.omega_d.size(), d.omega_d.size());
  for (double w : fit.omega_d) EXPECT_GT(std::abs(w - ef), mhz(1.0));
}

TEST(Transmission, DeviceCouplingSplitsTheResonantCavity) {
  auto p = cavity();
  p.g_mc = mhz(22.85);
  const auto w = linspace(p.omega_c - mhz(40), p.omega_c + mhz(40), 8001);
  std::vector<double> t;
  for (double x : w) t.push_back(cavity_transmission(x, p));
  const auto pk = maxima(t);
  ASSERT_EQ(pk.size(), 2u);
  EXPECT_NEAR(to_mhz(w[pk[1]] - w[pk[0]]), 2 * 22.85, 0.1);
  EXPECT_NEAR(t[pk[0]], t[pk[1]], 1e-9);
}

TEST(Transmission, CoilFitRecoversTheDeviceCalibration) {
  auto model = cavity();
  model.omega_c = ghz(8.0);
  const double w0 = ghz(8.148), xi = mhz(48.2) / 1e-3, g = mhz(22.85);
  TransmissionMap map;
  map.currents = linspace(-4.5e-3, -1.5e-3, 13);
  map.omegas = linspace(model.omega_c - mhz(80), model.omega_c + mhz(80), 161);
  map.magnitude.resize(13, 161);
  auto p = model;
  p.g_mc = g;
  for (int a = 0; a < 13; ++a) {
    p.omega_m = w0 + xi * map.currents[a];
    for (int b = 0; b < 161; ++b) map.magnitude(a, b) = cavity_transmission(map.omegas[b], p);
  }
  const auto fit = fit_avoided_crossing(map, model, w0 - mhz(3), xi * 1.02, g * 0.9);
  EXPECT_NEAR(to_hz(fit.omega_m0) * 1e-9, 8.148, 1e-6);
  EXPECT_NEAR(to_mhz(fit.xi) * 1e-3, 48.2, 1e-4);
  EXPECT_NEAR(to_mhz(fit.g_mc), 22.85, 1e-4);
}

TEST(Calibration, UndrivenSpectrumGivesVisibilityAndFloor) {
  CalibrationSpectrumParams c;
  c.spectrum = device_spectrum(0.0);
  c.tau_tilde = 400e-9;
  c.visibility = 3e6;
  c.floor = 0.08;
  const auto w = linspace(c.spectrum.omega_ref - mhz(6), c.spectrum.omega_ref + mhz(6), 49);
  const auto y = convolved_calibration_spectrum(w, c);
  const auto peaks = maxima(y);
  ASSERT_EQ(peaks.size(), 1u);
  auto guess = c;
  guess.visibility = 2.5e6;
  guess.floor = 0.07;
  const auto fit = fit_calibration_spectrum(w, y, guess, 0.05);
  EXPECT_NEAR(fit.params.visibility / 3e6, 1.0, 1e-6);
  EXPECT_NEAR(fit.params.floor, 0.08, 1e-8);
  EXPECT_NEAR(fit.nbar, 0.0, 1e-6);
}
