#include "mqnd/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <unsupported/Eigen/FFT>

#include "mqnd/parallel.hpp"

namespace mqnd::spectra {

namespace {

using std::numbers::pi;
using cplx = std::complex<double>;

void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw std::invalid_argument(std::string(what) + ": size mismatch");
}

double typical(double guess, double floor) { return std::max(std::abs(guess), floor); }

}  // namespace

// --- Cavity transmission -----------------------------------------------------

void TransmissionModelParams::validate() const {
  if (!(kappa_c > 0)) throw std::invalid_argument("kappa_c must be positive");
  if (!(gamma_m > 0)) throw std::invalid_argument("gamma_m must be positive");
  if (!(kappa_in >= 0) || !(kappa_out >= 0)) {
    throw std::invalid_argument("external cavity rates must be non-negative");
  }
  if (kappa_in * kappa_out > 0.25 * kappa_c * kappa_c * (1 + 1e-12)) {
    throw std::invalid_argument("kappa_in * kappa_out exceeds (kappa_c / 2)^2");
  }
}

namespace {

cplx transmission_denominator(double omega, const TransmissionModelParams& p) {
  const cplx i(0.0, 1.0);
  return i * (omega - p.omega_c) - 0.5 * p.kappa_c +
         p.g_mc * p.g_mc / (i * (omega - p.omega_m) - 0.5 * p.gamma_m);
}

}  // namespace

std::complex<double> transmission_coefficient(double omega, const TransmissionModelParams& p) {
  p.validate();
  return -std::sqrt(p.kappa_in * p.kappa_out) / transmission_denominator(omega, p);
}

double cavity_transmission(double omega, const TransmissionModelParams& p) {
  p.validate();
  return 0.5 * p.kappa_c / std::abs(transmission_denominator(omega, p));
}

CoilFit fit_avoided_crossing(const TransmissionMap& data, const TransmissionModelParams& model,
                             double omega_m0_guess, double xi_guess, double g_guess) {
  model.validate();
  const auto rows = static_cast<Eigen::Index>(data.currents.size());
  const auto cols = static_cast<Eigen::Index>(data.omegas.size());
  if (data.magnitude.rows() != rows || data.magnitude.cols() != cols) {
    throw std::invalid_argument("fit_avoided_crossing: map shape does not match its axes");
  }
  if (rows * cols < 3) throw std::invalid_argument("fit_avoided_crossing: too few samples");

  auto residual = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    TransmissionModelParams p = model;
    p.g_mc = x(2);
    for (Eigen::Index a = 0; a < rows; ++a) {
      p.omega_m = x(0) + x(1) * data.currents[a];
      for (Eigen::Index b = 0; b < cols; ++b) {
        r(a * cols + b) = cavity_transmission(data.omegas[b], p) - data.magnitude(a, b);
      }
    }
  };
  Eigen::VectorXd p0(3), scale(3);
  p0 << omega_m0_guess, xi_guess, g_guess;
  scale << typical(omega_m0_guess, 1.0), typical(xi_guess, 1.0), typical(g_guess, model.kappa_c);
  CoilFit out;
  out.fit = least_squares_checked(residual, static_cast<int>(rows * cols), p0, scale);
  out.omega_m0 = out.fit.params(0);
  out.xi = out.fit.params(1);
  out.g_mc = std::abs(out.fit.params(2));
  return out;
}

double coil_transfer(double current_1, double omega_1, double current_2, double omega_2) {
  if (current_1 == current_2) throw std::invalid_argument("coil_transfer: currents coincide");
  return (omega_2 - omega_1) / (current_2 - current_1);
}

// --- Driven-magnon qubit spectrum ---------------------------------------------

void GambettaSpectrumParams::validate() const {
  if (!(gamma_q > 0)) throw std::invalid_argument("gamma_q must be positive");
  if (!(gamma_m > 0)) throw std::invalid_argument("gamma_m must be positive");
  if (!std::isfinite(chi_qm) || !std::isfinite(delta_d) || !std::isfinite(omega_ref) ||
      !std::isfinite(omega_d)) {
    throw std::invalid_argument("spectrum parameters must be finite");
  }
}

double GambettaDerived::omega_q(const GambettaSpectrumParams& p, int n) const {
  return p.omega_ref + n * (2.0 * p.chi_qm + p.delta_d) + delta_omega_q;
}

double GambettaDerived::gamma_q(const GambettaSpectrumParams& p, int n) const {
  return p.gamma_q + p.gamma_m * (n + D);
}

GambettaDerived gambetta_derived(const GambettaSpectrumParams& p) {
  p.validate();
  const double hg = 0.5 * p.gamma_m;
  const double chi = p.chi_qm;
  const double dd = p.delta_d;
  const double w2 = p.omega_d * p.omega_d;
  GambettaDerived d;
  d.nbar_g = w2 / (hg * hg + dd * dd);
  d.nbar_e = w2 / (hg * hg + (dd + 2.0 * chi) * (dd + 2.0 * chi));
  d.D = 2.0 * (d.nbar_g + d.nbar_e) * chi * chi / (hg * hg + chi * chi + (chi + dd) * (chi + dd));
  const double shift = 2.0 * chi + dd;
  d.A = d.D * cplx(hg, -shift) / cplx(hg, shift);
  d.delta_omega_q = chi * (d.nbar_g + d.nbar_e - d.D);
  return d;
}

double drive_for_population(double nbar_g, double gamma_m, double delta_d) {
  if (!(nbar_g >= 0)) throw std::invalid_argument("nbar must be non-negative");
  return std::sqrt(nbar_g * (0.25 * gamma_m * gamma_m + delta_d * delta_d));
}

namespace {

// Complex Fock-sum coefficients (-A)^n e^A / n!, truncated once the term
// magnitude |A|^n e^{Re A} / n! falls below 1e-10 of the accumulated sum.
std::vector<cplx> fock_coefficients(const GambettaDerived& d) {
  constexpr int kMaxTerms = 2000;
  const double a = std::abs(d.A);
  const cplx ea = std::exp(d.A);
  std::vector<cplx> c;
  cplx term = ea;  // n = 0
  double mag = std::abs(ea);
  double total = 0.0;
  for (int n = 0; n < kMaxTerms; ++n) {
    if (!std::isfinite(mag)) throw SeriesDivergenceError("Fock sum: non-finite term");
    c.push_back(term);
    total += mag;
    if (n >= a && mag < 1e-10 * total) return c;
    term *= -d.A / static_cast<double>(n + 1);
    mag *= a / static_cast<double>(n + 1);
  }
  throw SeriesDivergenceError("Fock sum did not converge within " + std::to_string(kMaxTerms) +
                              " terms (|A| = " + std::to_string(a) + ")");
}

double spectrum_from(double omega, const GambettaSpectrumParams& p, const GambettaDerived& d,
                     const std::vector<cplx>& c) {
  double s = 0.0;
  for (std::size_t n = 0; n < c.size(); ++n) {
    const int k = static_cast<int>(n);
    s += (c[n] / cplx(0.5 * d.gamma_q(p, k), -(omega - d.omega_q(p, k)))).real();
  }
  return s / pi;
}

}  // namespace

std::vector<double> fock_weights(const GambettaDerived& d) {
  std::vector<double> w;
  for (const auto& c : fock_coefficients(d)) w.push_back(c.real());
  return w;
}

double gambetta_spectrum(double omega, const GambettaSpectrumParams& p) {
  const auto d = gambetta_derived(p);
  return spectrum_from(omega, p, d, fock_coefficients(d));
}

std::vector<double> gambetta_spectrum(std::span<const double> omegas,
                                      const GambettaSpectrumParams& p) {
  const auto d = gambetta_derived(p);
  const auto c = fock_coefficients(d);
  std::vector<double> out(omegas.size());
  for (std::size_t i = 0; i < omegas.size(); ++i) out[i] = spectrum_from(omegas[i], p, d, c);
  return out;
}

// --- Ramsey FFT -----------------------------------------------------------------

FftSpectrum normalized_fft_spectrum(std::span<const double> taus, std::span<const double> p_e,
                                    bool remove_offset, std::size_t pad_to) {
  require_same_size(taus.size(), p_e.size(), "normalized_fft_spectrum");
  const std::size_t n = taus.size();
  if (n < 2) throw std::invalid_argument("normalized_fft_spectrum: need at least 2 samples");
  const double dt = (taus.back() - taus.front()) / static_cast<double>(n - 1);
  if (!(dt > 0)) throw std::invalid_argument("normalized_fft_spectrum: taus must increase");
  for (std::size_t k = 1; k < n; ++k) {
    if (std::abs(taus[k] - taus[k - 1] - dt) > 1e-6 * dt) {
      throw std::invalid_argument("normalized_fft_spectrum: tau grid is not uniform");
    }
  }
  const double mean =
      remove_offset ? std::accumulate(p_e.begin(), p_e.end(), 0.0) / static_cast<double>(n) : 0.0;
  const std::size_t m = std::max(n, pad_to);
  std::vector<double> x(m, 0.0);
  for (std::size_t k = 0; k < n; ++k) x[k] = p_e[k] - mean;

  Eigen::FFT<double> fft;
  std::vector<cplx> spec;
  fft.fwd(spec, x);

  FftSpectrum out;
  const std::size_t half = m / 2;
  for (std::size_t k = 0; k <= half; ++k) {
    const double f = static_cast<double>(k) / (static_cast<double>(m) * dt);
    // Reference the transform to tau = 0 rather than to the first sample.
    const cplx phase = std::polar(1.0, -2.0 * pi * f * taus.front());
    out.frequency_hz.push_back(f);
    out.value.push_back((spec[k] * phase).real());
  }
  const double peak = *std::max_element(out.value.begin(), out.value.end());
  if (!(peak > 0)) throw std::invalid_argument("normalized_fft_spectrum: spectrum has no positive peak");
  for (auto& v : out.value) v /= peak;
  return out;
}

// --- Spectrum fits ---------------------------------------------------------------

SpectrumFit fit_spectrum(std::span<const double> omegas, std::span<const double> data,
                         const GambettaSpectrumParams& fixed, const SpectrumFitGuess& guess) {
  require_same_size(omegas.size(), data.size(), "fit_spectrum");
  if (omegas.size() < 7) throw std::invalid_argument("fit_spectrum: need at least 7 points");

  auto shape = [&](const Eigen::VectorXd& x) {
    GambettaSpectrumParams p = fixed;
    p.omega_ref = x(0);
    p.gamma_m = std::abs(x(1));
    p.chi_qm = x(2);
    p.omega_d = drive_for_population(std::max(x(3), 0.0), p.gamma_m, p.delta_d);
    return p;
  };

  SpectrumFitGuess g = guess;
  if (g.amplitude == 0.0) {
    Eigen::VectorXd x(6);
    x << g.omega_ref, g.gamma_m, g.chi_qm, g.nbar, 1.0, 0.0;
    const auto s = gambetta_spectrum(omegas, shape(x));
    const auto [smin, smax] = std::minmax_element(s.begin(), s.end());
    const auto [dmin, dmax] = std::minmax_element(data.begin(), data.end());
    g.amplitude = (*dmax - *dmin) / (*smax - *smin);
    g.offset = *dmin - g.amplitude * *smin;
  }

  auto residual = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    const auto s = gambetta_spectrum(omegas, shape(x));
    for (std::size_t i = 0; i < s.size(); ++i) {
      r(static_cast<Eigen::Index>(i)) = x(4) * s[i] + x(5) - data[i];
    }
  };
  const double width = std::max({fixed.gamma_q, std::abs(g.gamma_m), std::abs(g.chi_qm)});
  Eigen::VectorXd p0(6), scale(6);
  p0 << g.omega_ref, g.gamma_m, g.chi_qm, g.nbar, g.amplitude, g.offset;
  scale << typical(g.omega_ref, width), typical(g.gamma_m, width), typical(g.chi_qm, width),
      typical(g.nbar, 0.1), typical(g.amplitude, 1e-12), typical(g.offset, 1e-3);

  SpectrumFit out;
  out.fit = least_squares_checked(residual, static_cast<int>(omegas.size()), p0, scale);
  out.params = shape(out.fit.params);
  out.nbar = std::max(out.fit.params(3), 0.0);
  out.amplitude = out.fit.params(4);
  out.offset = out.fit.params(5);
  return out;
}

LorentzianFit fit_lorentzian(std::span<const double> omegas, std::span<const double> data,
                             double center_guess, double gamma_guess) {
  require_same_size(omegas.size(), data.size(), "fit_lorentzian");
  if (omegas.size() < 5) throw std::invalid_argument("fit_lorentzian: need at least 5 points");
  if (!(gamma_guess > 0)) throw std::invalid_argument("fit_lorentzian: width guess must be positive");
  auto model = [](double w, const Eigen::VectorXd& x) {
    const double hw = 0.5 * std::abs(x(1));
    return x(2) * hw * hw / ((w - x(0)) * (w - x(0)) + hw * hw) + x(3);
  };
  const auto [dmin, dmax] = std::minmax_element(data.begin(), data.end());
  Eigen::VectorXd p0(4), scale(4);
  p0 << center_guess, gamma_guess, *dmax - *dmin, *dmin;
  scale << typical(center_guess, gamma_guess), gamma_guess, typical(p0(2), 1e-12),
      typical(p0(3), 1e-3);
  auto residual = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    for (std::size_t i = 0; i < omegas.size(); ++i) {
      r(static_cast<Eigen::Index>(i)) = model(omegas[i], x) - data[i];
    }
  };
  LorentzianFit out;
  out.fit = least_squares_checked(residual, static_cast<int>(omegas.size()), p0, scale);
  out.center = out.fit.params(0);
  out.gamma = std::abs(out.fit.params(1));
  out.amplitude = out.fit.params(2);
  out.offset = out.fit.params(3);
  return out;
}

// --- Convolved calibration spectrum ----------------------------------------------

double pulse_spectrum(double detuning, double tau_tilde) {
  return std::exp(-tau_tilde * tau_tilde * detuning * detuning / (4.0 * pi));
}

std::vector<double> convolved_calibration_spectrum(std::span<const double> omega_s,
                                                   const CalibrationSpectrumParams& p) {
  if (!(p.tau_tilde > 0)) throw std::invalid_argument("tau_tilde must be positive");
  const auto d = gambetta_derived(p.spectrum);
  const auto c = fock_coefficients(d);
  // Kernel exp(-x^2 / k^2); quadrature step 10x finer than both the qubit
  // linewidth and the kernel width, window +-6 k.
  const double k = std::sqrt(4.0 * pi) / p.tau_tilde;
  const double h = std::min(p.spectrum.gamma_q, k) / 10.0;
  const auto half = static_cast<long>(std::ceil(6.0 * k / h));
  double norm = 0.0;
  for (long j = -half; j <= half; ++j) norm += pulse_spectrum(static_cast<double>(j) * h, p.tau_tilde);

  std::vector<double> out(omega_s.size());
  for (std::size_t i = 0; i < omega_s.size(); ++i) {
    double acc = 0.0;
    for (long j = -half; j <= half; ++j) {
      const double x = static_cast<double>(j) * h;
      acc += pulse_spectrum(x, p.tau_tilde) * spectrum_from(omega_s[i] + x, p.spectrum, d, c);
    }
    out[i] = p.visibility * acc / norm + p.floor;
  }
  return out;
}

CalibrationFit fit_calibration_spectrum(std::span<const double> omega_s,
                                        std::span<const double> p_e,
                                        const CalibrationSpectrumParams& guess, double nbar_guess) {
  require_same_size(omega_s.size(), p_e.size(), "fit_calibration_spectrum");
  if (omega_s.size() < 5) throw std::invalid_argument("fit_calibration_spectrum: need at least 5 points");
  auto params = [&](const Eigen::VectorXd& x) {
    CalibrationSpectrumParams p = guess;
    p.spectrum.omega_d =
        drive_for_population(std::max(x(0), 0.0), p.spectrum.gamma_m, p.spectrum.delta_d);
    p.tau_tilde = std::abs(x(1));
    p.visibility = x(2);
    p.floor = x(3);
    return p;
  };
  auto residual = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    const auto model = convolved_calibration_spectrum(omega_s, params(x));
    for (std::size_t i = 0; i < model.size(); ++i) {
      r(static_cast<Eigen::Index>(i)) = model[i] - p_e[i];
    }
  };
  Eigen::VectorXd p0(4), scale(4);
  p0 << nbar_guess, guess.tau_tilde, guess.visibility, guess.floor;
  scale << typical(nbar_guess, 0.1), typical(guess.tau_tilde, 1e-9),
      typical(guess.visibility, 1e-12), typical(guess.floor, 1e-3);
  CalibrationFit out;
  out.fit = least_squares_checked(residual, static_cast<int>(omega_s.size()), p0, scale);
  out.params = params(out.fit.params);
  out.nbar = std::max(out.fit.params(0), 0.0);
  return out;
}

// --- lambda decay ---------------------------------------------------------------

double lambda_model(double tau, double lambda0, double t1_m) {
  return lambda0 * std::exp(-tau / (4.0 * t1_m));
}

double LambdaDecayFit::linewidth_hz() const { return 1.0 / (2.0 * pi * t1_m); }

LambdaDecayFit fit_lambda_decay(std::span<const double> taus, std::span<const double> lambdas) {
  require_same_size(taus.size(), lambdas.size(), "fit_lambda_decay");
  const std::size_t n = taus.size();
  if (n < 3) throw std::invalid_argument("fit_lambda_decay: need at least 3 points");
  // Log-linear start: ln lambda = ln lambda0 - tau / (4 T1_m).
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(lambdas[i] > 0)) throw std::invalid_argument("fit_lambda_decay: lambda must be positive");
    mx += taus[i];
    my += std::log(lambdas[i]);
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (taus[i] - mx) * (taus[i] - mx);
    sxy += (taus[i] - mx) * (std::log(lambdas[i]) - my);
  }
  if (!(sxx > 0)) throw std::invalid_argument("fit_lambda_decay: all tau values coincide");
  const double slope = sxy / sxx;
  if (!(slope < 0)) throw std::runtime_error("fit_lambda_decay: lambda does not decay (T1_m <= 0)");
  const double lambda0 = std::exp(my - slope * mx);
  const double t1 = -1.0 / (4.0 * slope);

  auto residual = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    for (std::size_t i = 0; i < n; ++i) {
      r(static_cast<Eigen::Index>(i)) = lambda_model(taus[i], x(0), x(1)) - lambdas[i];
    }
  };
  Eigen::VectorXd p0(2), scale(2);
  p0 << lambda0, t1;
  scale << lambda0, t1;
  LambdaDecayFit out;
  out.fit = least_squares_checked(residual, static_cast<int>(n), p0, scale);
  out.lambda0 = out.fit.params(0);
  out.t1_m = out.fit.params(1);
  if (!(out.t1_m > 0)) throw std::runtime_error("fit_lambda_decay: fitted T1_m is not positive");
  return out;
}

// --- Qubit-assisted spectroscopy -------------------------------------------------

namespace {

struct DecayFit {
  double delta_v_e = 0.0;
  double lambda2 = 0.0;
};

DecayFit fit_displacement_decay(std::span<const double> amplitudes, const Eigen::VectorXd& dv) {
  const auto n = amplitudes.size();
  // Start: amplitude-zero (or smallest) value and a log-linear slope in A^2.
  const auto i0 = static_cast<std::size_t>(
      std::min_element(amplitudes.begin(), amplitudes.end()) - amplitudes.begin());
  const double v0 = dv(static_cast<Eigen::Index>(i0));
  double num = 0, den = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ratio = dv(static_cast<Eigen::Index>(i)) / v0;
    const double a2 = amplitudes[i] * amplitudes[i] - amplitudes[i0] * amplitudes[i0];
    if (ratio > 0 && a2 > 0) {
      num += -std::log(ratio) * a2;
      den += a2 * a2;
    }
  }
  const double l2 = den > 0 ? std::max(num / den, 0.0) : 0.0;
  const double amax = *std::max_element(amplitudes.begin(), amplitudes.end());
  auto residual = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      r(k) = x(0) * std::exp(-x(1) * amplitudes[i] * amplitudes[i]) - dv(k);
    }
  };
  Eigen::VectorXd p0(2), scale(2);
  p0 << v0 * std::exp(l2 * amplitudes[i0] * amplitudes[i0]), l2;
  scale << typical(v0, 1e-12), typical(l2, 1e-3 / (amax * amax));
  const auto r = least_squares_checked(residual, static_cast<int>(n), p0, scale);
  return {r.params(0), r.params(1)};
}

}  // namespace

SpectroscopyFit qubit_assisted_spectroscopy_fit(const SpectroscopyData& data,
                                                double exclusion_center,
                                                double exclusion_half_width, unsigned jobs) {
  const auto nf = data.omega_d.size();
  const auto na = data.amplitudes.size();
  if (data.delta_v.rows() != static_cast<Eigen::Index>(nf) ||
      data.delta_v.cols() != static_cast<Eigen::Index>(na)) {
    throw std::invalid_argument("qubit_assisted_spectroscopy_fit: data shape mismatch");
  }
  if (na < 3) throw std::invalid_argument("qubit_assisted_spectroscopy_fit: need >= 3 amplitudes");
  if (!(exclusion_half_width >= 0)) throw std::invalid_argument("exclusion window must be non-negative");

  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < nf; ++i) {
    if (std::abs(data.omega_d[i] - exclusion_center) > exclusion_half_width) kept.push_back(i);
  }
  if (kept.size() < 4) throw std::invalid_argument("qubit_assisted_spectroscopy_fit: need >= 4 frequencies outside the exclusion window");

  const auto fits = parallel_map<DecayFit>(kept.size(), jobs, [&](std::size_t k) {
    const Eigen::VectorXd row = data.delta_v.row(static_cast<Eigen::Index>(kept[k])).transpose();
    return fit_displacement_decay(data.amplitudes, row);
  });

  SpectroscopyFit out;
  for (std::size_t k = 0; k < kept.size(); ++k) {
    out.omega_d.push_back(data.omega_d[kept[k]]);
    out.lambda2.push_back(fits[k].lambda2);
    out.delta_v_e.push_back(fits[k].delta_v_e);
  }

  // Gaussian plus offset through lambda^2(omega_d).
  const auto& w = out.omega_d;
  const auto& y = out.lambda2;
  const auto imax = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
  const double ymin = *std::min_element(y.begin(), y.end());
  const double half_level = 0.5 * (y[imax] + ymin);
  std::size_t lo = imax, hi = imax;
  while (lo > 0 && y[lo] > half_level) --lo;
  while (hi + 1 < y.size() && y[hi] > half_level) ++hi;
  const double span = std::abs(w.back() - w.front()) / static_cast<double>(w.size());
  const double sigma0 = std::max(std::abs(w[hi] - w[lo]) / 2.355, span);

  auto residual = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double z = (w[i] - x(1)) / x(2);
      r(static_cast<Eigen::Index>(i)) = x(0) * std::exp(-0.5 * z * z) + x(3) - y[i];
    }
  };
  Eigen::VectorXd p0(4), scale(4);
  p0 << y[imax] - ymin, w[imax], sigma0, ymin;
  scale << typical(p0(0), 1e-12), typical(w[imax], sigma0), sigma0, typical(p0(0), 1e-12);
  out.line_fit = least_squares_checked(residual, static_cast<int>(w.size()), p0, scale);
  out.line_peak = out.line_fit.params(0);
  out.omega_m_g = out.line_fit.params(1);
  out.line_sigma = std::abs(out.line_fit.params(2));
  out.line_offset = out.line_fit.params(3);
  return out;
}

}  // namespace mqnd::spectra
