#pragma once

// Gaussian drive envelopes, the detection-protocol timing and the numerical
// pi-pulse calibration.

#include <functional>
#include <vector>

namespace mqnd::pulses {

/// amplitude * exp(-pi (t - center)^2 / duration^2). The area is amplitude * duration.
double gaussian_envelope(double t, double amplitude, double center, double duration);

/// Half-width of the scheduling window in units of the pulse duration. The
/// envelope is exactly zero outside center +- kWindowHalfWidth * duration.
inline constexpr double kWindowHalfWidth = 1.5;

struct GaussianPulse {
  double amplitude = 0.0;  // rad/s
  double center = 0.0;     // s
  double duration = 0.0;   // s

  double window_start() const { return center - kWindowHalfWidth * duration; }
  double window_end() const { return center + kWindowHalfWidth * duration; }
  /// Windowed envelope: gaussian inside [window_start, window_end], zero outside.
  double operator()(double t) const;
  void validate() const;
};

struct PulseSchedule {
  GaussianPulse magnon;  // Omega_d(t)
  GaussianPulse qubit;   // Omega_s(t)
  double readout_start = 0.0;  // start of the readout pulse (s)
  double delta_t_r = 0.0;      // readout delay after readout_start (s)

  double readout_time() const { return readout_start + delta_t_r; }
  /// Times where an envelope switches on or off (integrator breakpoints).
  std::vector<double> breakpoints() const;
  void validate() const;
};

struct ProtocolTiming {
  double tau_pi = 200e-9;
  double tau_d = 200e-9;
  /// Delay between the nominal end of the qubit pulse (t_s + tau_pi / 2)
  /// and the start of the readout pulse.
  double readout_gap = 18e-9;
  double delta_t_r = 31e-9;
};

/// Detection protocol: t = 0 at the start of the magnon window, the qubit
/// pulse delayed by t_s - t_d = (tau_pi + tau_d) / 2.
PulseSchedule make_protocol_schedule(const ProtocolTiming& timing, double omega_s,
                                     double omega_d);

/// Area-pi amplitude for H = Omega(t) (b + b^dagger): the Rabi frequency is
/// 2 Omega, so Omega * tau = pi / 2.
double analytic_pi_amplitude(double tau_pi);

struct CalibrationResult {
  double amplitude = 0.0;
  double objective = 0.0;  // p_g at the optimum
  int evaluations = 0;
};

/// Golden-section minimization of `p_g_of_amplitude` on [lo, hi]. Throws
/// std::runtime_error when the minimum sits on a bracket edge.
CalibrationResult calibrate_pi_amplitude(const std::function<double(double)>& p_g_of_amplitude,
                                         double lo, double hi, double rel_tol = 1e-4);

/// Default bracket [0.5, 1.5] around the analytic estimate for `tau_pi`.
CalibrationResult calibrate_pi_amplitude_near(const std::function<double(double)>& p_g_of_amplitude,
                                              double tau_pi, double rel_tol = 1e-4);

/// nbar = (lambda * A_d)^2.
double displacement_amplitude_for_population(double lambda, double amplitude_volts);

}  // namespace mqnd::pulses
