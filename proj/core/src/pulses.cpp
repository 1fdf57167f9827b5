#include "mqnd/pulses.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mqnd::pulses {

double gaussian_envelope(double t, double amplitude, double center, double duration) {
  if (!(duration > 0)) throw std::invalid_argument("gaussian_envelope: duration must be positive");
  const double x = (t - center) / duration;
  return amplitude * std::exp(-std::numbers::pi * x * x);
}

double GaussianPulse::operator()(double t) const {
  if (amplitude == 0.0 || t < window_start() || t > window_end()) return 0.0;
  return gaussian_envelope(t, amplitude, center, duration);
}

void GaussianPulse::validate() const {
  if (!(duration > 0)) throw std::invalid_argument("pulse duration must be positive");
  if (!(amplitude >= 0)) throw std::invalid_argument("pulse amplitude must be non-negative");
  if (!std::isfinite(center)) throw std::invalid_argument("pulse center must be finite");
}

std::vector<double> PulseSchedule::breakpoints() const {
  std::vector<double> out{magnon.window_start(), magnon.window_end(), qubit.window_start(),
                          qubit.window_end()};
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void PulseSchedule::validate() const {
  magnon.validate();
  qubit.validate();
  if (!(delta_t_r >= 0)) throw std::invalid_argument("readout delay must be non-negative");
}

PulseSchedule make_protocol_schedule(const ProtocolTiming& timing, double omega_s,
                                     double omega_d) {
  if (!(timing.tau_pi > 0)) throw std::invalid_argument("tau_pi must be positive");
  if (!(timing.tau_d > 0)) throw std::invalid_argument("tau_d must be positive");
  if (!(timing.readout_gap >= 0)) throw std::invalid_argument("readout_gap must be non-negative");
  PulseSchedule s;
  s.magnon = {omega_d, kWindowHalfWidth * timing.tau_d, timing.tau_d};
  s.qubit = {omega_s, s.magnon.center + 0.5 * (timing.tau_pi + timing.tau_d), timing.tau_pi};
  s.readout_start = s.qubit.center + 0.5 * timing.tau_pi + timing.readout_gap;
  s.delta_t_r = timing.delta_t_r;
  s.validate();
  return s;
}

double analytic_pi_amplitude(double tau_pi) {
  if (!(tau_pi > 0)) throw std::invalid_argument("tau_pi must be positive");
  return std::numbers::pi / (2.0 * tau_pi);
}

CalibrationResult calibrate_pi_amplitude(const std::function<double(double)>& p_g_of_amplitude,
                                         double lo, double hi, double rel_tol) {
  if (!(lo > 0) || !(hi > lo)) throw std::invalid_argument("calibrate_pi_amplitude: bad bracket");
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  const double lo0 = lo;
  const double hi0 = hi;
  CalibrationResult r;
  double x1 = hi - invphi * (hi - lo);
  double x2 = lo + invphi * (hi - lo);
  double f1 = p_g_of_amplitude(x1);
  double f2 = p_g_of_amplitude(x2);
  r.evaluations = 2;
  while (hi - lo > rel_tol * 0.5 * (hi + lo)) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - invphi * (hi - lo);
      f1 = p_g_of_amplitude(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + invphi * (hi - lo);
      f2 = p_g_of_amplitude(x2);
    }
    ++r.evaluations;
  }
  r.amplitude = f1 < f2 ? x1 : x2;
  r.objective = std::min(f1, f2);
  const double edge = 2.0 * rel_tol * r.amplitude;
  if (r.amplitude - lo0 < edge || hi0 - r.amplitude < edge) {
    throw std::runtime_error("calibrate_pi_amplitude: minimum not bracketed");
  }
  return r;
}

CalibrationResult calibrate_pi_amplitude_near(const std::function<double(double)>& p_g_of_amplitude,
                                              double tau_pi, double rel_tol) {
  const double guess = analytic_pi_amplitude(tau_pi);
  return calibrate_pi_amplitude(p_g_of_amplitude, 0.5 * guess, 1.5 * guess, rel_tol);
}

double displacement_amplitude_for_population(double lambda, double amplitude_volts) {
  if (!(lambda > 0)) throw std::invalid_argument("lambda must be positive");
  if (!(amplitude_volts >= 0)) throw std::invalid_argument("drive amplitude must be non-negative");
  const double x = lambda * amplitude_volts;
  return x * x;
}

}  // namespace mqnd::pulses
