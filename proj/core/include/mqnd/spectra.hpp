#pragma once

// Closed-form spectra and the fits built on them: cavity transmission across
// the magnon avoided crossing, the qubit spectrum under a continuous magnon
// drive, Ramsey FFT spectra, the pulse-convolved calibration spectrum and
// lambda / magnon-lifetime extraction. Frequencies in rad/s.

#include <complex>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "mqnd/least_squares.hpp"

namespace mqnd::spectra {

// --- Cavity transmission ---------------------------------------------------

struct TransmissionModelParams {
  double omega_c = 0.0;
  double kappa_c = 0.0;  // total linewidth
  double kappa_in = 0.0;
  double kappa_out = 0.0;
  double omega_m = 0.0;
  double gamma_m = 0.0;
  double g_mc = 0.0;

  void validate() const;
};

/// Complex transmission t(omega).
std::complex<double> transmission_coefficient(double omega, const TransmissionModelParams& p);
/// |t| / |t0| with t0 the bare-cavity peak transmission.
double cavity_transmission(double omega, const TransmissionModelParams& p);

/// Transmission map sampled over coil currents (rows) and probe frequencies
/// (columns).
struct TransmissionMap {
  std::vector<double> currents;  // A
  std::vector<double> omegas;
  Eigen::MatrixXd magnitude;  // normalized |t|
};

struct CoilFit {
  double omega_m0 = 0.0;  // Kittel frequency at zero current
  double xi = 0.0;        // rad/s per ampere
  double g_mc = 0.0;
  LeastSquaresResult fit;
};

/// Fits omega_m(I) = omega_m0 + xi I and g_mc to a transmission map, with the
/// cavity parameters and gamma_m of `model` held fixed.
CoilFit fit_avoided_crossing(const TransmissionMap& data, const TransmissionModelParams& model,
                             double omega_m0_guess, double xi_guess, double g_guess);

/// Tuning rate through two (current, frequency) pairs.
double coil_transfer(double current_1, double omega_1, double current_2, double omega_2);

// --- Qubit spectrum under a continuous magnon drive ---------------------

class SeriesDivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GambettaSpectrumParams {
  double gamma_q = 0.0;  // qubit linewidth, 2 / T2*
  double gamma_m = 0.0;
  double chi_qm = 0.0;
  double delta_d = 0.0;  // magnon drive detuning, omega_m^g - omega_d
  /// Frame reference: the spectrum peaks (vacuum component, no Stark shift)
  /// at omega = omega_ref. Use omega_q^0 - omega_s for the rotating frame or
  /// omega_q^0 for the lab frame.
  double omega_ref = 0.0;
  double omega_d = 0.0;  // magnon drive amplitude

  void validate() const;
};

struct GambettaDerived {
  double nbar_g = 0.0;
  double nbar_e = 0.0;
  double D = 0.0;
  std::complex<double> A;
  double delta_omega_q = 0.0;  // continuous ac Stark shift

  double omega_q(const GambettaSpectrumParams& p, int n) const;  // peak of Fock component n
  double gamma_q(const GambettaSpectrumParams& p, int n) const;  // width of Fock component n
};

GambettaDerived gambetta_derived(const GambettaSpectrumParams& p);

/// Drive amplitude giving a steady-state population nbar_g.
double drive_for_population(double nbar_g, double gamma_m, double delta_d);

/// Fock-component weights Re[(-A)^n e^A / n!] up to the truncation point.
std::vector<double> fock_weights(const GambettaDerived& d);

double gambetta_spectrum(double omega, const GambettaSpectrumParams& p);
std::vector<double> gambetta_spectrum(std::span<const double> omegas,
                                      const GambettaSpectrumParams& p);

// --- Ramsey FFT spectrum -----------------------------------------------------

struct FftSpectrum {
  std::vector<double> frequency_hz;  // non-negative frequencies
  std::vector<double> value;         // Re(DFT) / max
};

/// Real part of the DFT of p_e(tau), normalized to a maximum of 1. The
/// optional offset removal subtracts the series mean first; zero padding
/// (to at least `pad_to` samples) refines the frequency grid.
FftSpectrum normalized_fft_spectrum(std::span<const double> taus, std::span<const double> p_e,
                                    bool remove_offset = false, std::size_t pad_to = 0);

// --- Spectrum fit ----------------------------------------------------------

struct SpectrumFit {
  GambettaSpectrumParams params;  // with fitted omega_ref, gamma_m, chi_qm, omega_d
  double nbar = 0.0;              // fitted nbar_g
  double amplitude = 0.0;         // A in S = A s + B
  double offset = 0.0;            // B
  LeastSquaresResult fit;
};

struct SpectrumFitGuess {
  double omega_ref = 0.0;
  double gamma_m = 0.0;
  double chi_qm = 0.0;
  double nbar = 0.0;
  double amplitude = 1.0;
  double offset = 0.0;
};

/// S = A s(omega) + B with gamma_q and delta_d fixed (taken from `fixed`).
/// Free: omega_ref, gamma_m, chi_qm, nbar, A, B. A zero amplitude guess is
/// replaced by a linear estimate from the guessed shape.
SpectrumFit fit_spectrum(std::span<const double> omegas, std::span<const double> data,
                         const GambettaSpectrumParams& fixed, const SpectrumFitGuess& guess);

/// Single Lorentzian with free width (FWHM `gamma`, rad/s), e.g. the
/// undriven qubit line.
struct LorentzianFit {
  double center = 0.0;
  double gamma = 0.0;
  double amplitude = 0.0;
  double offset = 0.0;
  LeastSquaresResult fit;
};
LorentzianFit fit_lorentzian(std::span<const double> omegas, std::span<const double> data,
                             double center_guess, double gamma_guess);

// --- Pulse-convolved calibration spectrum ---------------------------------

/// exp(-tau~^2 (omega - omega_s)^2 / (4 pi)).
double pulse_spectrum(double detuning, double tau_tilde);

struct CalibrationSpectrumParams {
  GambettaSpectrumParams spectrum;  // lab frame: omega_ref = omega_q^0
  double tau_tilde = 0.0;           // effective pulse duration
  double visibility = 1.0;          // V
  double floor = 0.0;               // p_e^{|g>}
};

/// p_e(omega_s) = V (s * s_pi)(omega_s) + p_e^g, with the pulse kernel
/// normalized to unit area and the convolution done by direct quadrature.
std::vector<double> convolved_calibration_spectrum(std::span<const double> omega_s,
                                                   const CalibrationSpectrumParams& p);

struct CalibrationFit {
  CalibrationSpectrumParams params;
  double nbar = 0.0;
  LeastSquaresResult fit;
};

/// Free: nbar, tau~, V, p_e^g; the spectrum parameters are otherwise fixed.
CalibrationFit fit_calibration_spectrum(std::span<const double> omega_s,
                                        std::span<const double> p_e,
                                        const CalibrationSpectrumParams& guess, double nbar_guess);

// --- lambda and magnon lifetime --------------------------------------------

/// lambda(tau) = lambda0 exp(-tau / (4 T1_m)).
double lambda_model(double tau, double lambda0, double t1_m);

struct LambdaDecayFit {
  double lambda0 = 0.0;
  double t1_m = 0.0;
  LeastSquaresResult fit;

  /// 1 / (2 pi T1_m), in Hz.
  double linewidth_hz() const;
};

LambdaDecayFit fit_lambda_decay(std::span<const double> taus, std::span<const double> lambdas);

// --- Qubit-assisted magnon spectroscopy -------------------------------------

struct SpectroscopyData {
  std::vector<double> omega_d;     // drive frequencies
  std::vector<double> amplitudes;  // drive amplitudes (V)
  Eigen::MatrixXd delta_v;         // rows: frequency, columns: amplitude
};

struct SpectroscopyFit {
  std::vector<double> omega_d;   // frequencies kept (exclusion window removed)
  std::vector<double> lambda2;   // fitted lambda^2 per frequency
  std::vector<double> delta_v_e;
  double omega_m_g = 0.0;        // Gaussian line center
  double line_sigma = 0.0;
  double line_peak = 0.0;
  double line_offset = 0.0;
  LeastSquaresResult line_fit;
};

/// Per frequency: delta V = delta V_e exp(-(lambda A)^2); then a Gaussian plus
/// offset through lambda^2(omega_d). Frequencies within `exclusion_half_width`
/// of `exclusion_center` (the e-f transition) are skipped.
SpectroscopyFit qubit_assisted_spectroscopy_fit(const SpectroscopyData& data,
                                                double exclusion_center,
                                                double exclusion_half_width,
                                                unsigned jobs = 1);

}  // namespace mqnd::spectra
