#include "mqnd/readout.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>
#include <string>

namespace mqnd::readout {

namespace {

bool in_unit(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

void ReadoutModel::validate() const {
  if (!(eps_g >= 0) || !(eps_e >= 0)) throw std::invalid_argument("readout errors must be non-negative");
  if (!(eps_g + eps_e < 1)) throw std::invalid_argument("readout fidelity must be positive");
  if (!(delta_t_r >= 0)) throw std::invalid_argument("readout delay must be non-negative");
}

void MeasuredProbabilities::validate() const {
  if (!in_unit(p_e_given_g_prep) || !in_unit(p_e_given_e_prep) || !in_unit(eps_ini)) {
    throw std::invalid_argument("measured probabilities must lie in [0, 1]");
  }
  if (visibility() < 0) throw std::invalid_argument("visibility must be non-negative");
}

double apply_readout_correction(double p_tilde_g, const ReadoutModel& model) {
  if (!in_unit(p_tilde_g)) {
    throw std::invalid_argument("apply_readout_correction: probability outside [0, 1]");
  }
  return (1.0 - model.eps_g) * p_tilde_g + model.eps_e * (1.0 - p_tilde_g);
}

std::pair<double, double> predicted_probabilities(double eps_g, double eps_e, double eps_ini,
                                                  double eps_pi) {
  const double peg = eps_g * (1.0 - eps_ini) + (1.0 - eps_e) * eps_ini;
  const double pee = eps_g * (eps_pi + eps_ini) + (1.0 - eps_e) * (1.0 - eps_pi - eps_ini);
  return {peg, pee};
}

std::pair<double, double> solve_readout_errors_raw(const MeasuredProbabilities& m,
                                                   double eps_pi) {
  // Unknowns (eps_g, eps_e):
  //   (1 - ini) eps_g - ini eps_e            = peg - ini
  //   w eps_g         - (1 - w) eps_e        = pee - (1 - w),  w = eps_pi + ini
  const double ini = m.eps_ini;
  const double w = eps_pi + ini;
  const double a11 = 1.0 - ini, a12 = -ini, b1 = m.p_e_given_g_prep - ini;
  const double a21 = w, a22 = -(1.0 - w), b2 = m.p_e_given_e_prep - (1.0 - w);
  const double det = a11 * a22 - a12 * a21;  // = -(1 - ini - eps_pi)
  if (std::abs(det) < 1e-14) {
    throw InconsistentReadoutError("solve_readout_errors: singular system (eps_pi + eps_ini = 1)");
  }
  return {(b1 * a22 - a12 * b2) / det, (a11 * b2 - a21 * b1) / det};
}

ReadoutModel solve_readout_errors(const MeasuredProbabilities& m, double eps_pi,
                                  double delta_t_r) {
  m.validate();
  if (!in_unit(eps_pi)) throw std::invalid_argument("eps_pi must lie in [0, 1]");
  const auto [eg, ee] = solve_readout_errors_raw(m, eps_pi);
  constexpr double tol = 1e-12;
  if (!(eg >= -tol && eg <= 1 + tol && ee >= -tol && ee <= 1 + tol)) {
    throw InconsistentReadoutError("solve_readout_errors: errors outside [0, 1] (eps_g = " +
                                   std::to_string(eg) + ", eps_e = " + std::to_string(ee) + ")");
  }
  return {std::clamp(eg, 0.0, 1.0), std::clamp(ee, 0.0, 1.0), delta_t_r};
}

ReadoutBounds bound_readout_fidelity(
    const std::function<std::vector<double>(std::span<const double>)>& eps_pi_at,
    const MeasuredProbabilities& measured, double step, double cap) {
  measured.validate();
  if (!(step > 0) || !(cap >= step)) throw std::invalid_argument("bad delay scan parameters");
  ReadoutBounds out;
  const auto n = static_cast<std::size_t>(std::floor(cap / step + 1e-9)) + 1;
  for (std::size_t k = 0; k < n; ++k) out.delays.push_back(static_cast<double>(k) * step);
  out.eps_pi = eps_pi_at(out.delays);
  if (out.eps_pi.size() != n) throw std::runtime_error("eps_pi callback returned wrong length");

  out.at_min_delay = solve_readout_errors(measured, out.eps_pi[0], 0.0);

  std::size_t hit = n;
  for (std::size_t k = 0; k < n; ++k) {
    const auto [eg, ee] = solve_readout_errors_raw(measured, out.eps_pi[k]);
    if (std::min(eg, ee) <= 0.0) {
      hit = k;
      break;
    }
  }
  if (hit == n) {
    // A delay-independent control error leaves nothing to bound.
    const auto [lo, hi] = std::minmax_element(out.eps_pi.begin(), out.eps_pi.end());
    if (*hi - *lo <= 1e-12) {
      out.at_max_delay = out.midrange = out.at_min_delay;
      return out;
    }
    throw std::runtime_error("bound_readout_fidelity: no readout error reaches zero within " +
                             std::to_string(cap * 1e9) + " ns");
  }
  out.max_delay = out.delays[hit];
  out.crossing_delay = out.max_delay;
  if (hit == 0) {
    out.at_max_delay = out.at_min_delay;
  } else {
    // Interpolate the control error to the exact crossing.
    const auto [eg0, ee0] = solve_readout_errors_raw(measured, out.eps_pi[hit - 1]);
    const auto [eg1, ee1] = solve_readout_errors_raw(measured, out.eps_pi[hit]);
    const bool e_crosses = ee1 <= eg1;
    const double f0 = e_crosses ? ee0 : eg0;
    const double f1 = e_crosses ? ee1 : eg1;
    const double s = f0 / (f0 - f1);
    const double eps_pi = out.eps_pi[hit - 1] + s * (out.eps_pi[hit] - out.eps_pi[hit - 1]);
    out.crossing_delay = out.delays[hit - 1] + s * (out.delays[hit] - out.delays[hit - 1]);
    out.at_max_delay = solve_readout_errors(measured, eps_pi, out.max_delay);
    (e_crosses ? out.at_max_delay.eps_e : out.at_max_delay.eps_g) = 0.0;
  }
  const auto mid = std::min<std::size_t>(
      hit, static_cast<std::size_t>(std::llround(0.5 * out.crossing_delay / step)));
  out.midrange = solve_readout_errors(measured, out.eps_pi[mid], out.delays[mid]);
  return out;
}

double rotation_angle(const VoltageModel& model) {
  const std::complex<double> d = model.v_e - model.v_g;
  return std::atan2(d.imag(), d.real());
}

double corrected_signal(std::complex<double> v, const VoltageModel& model) {
  // Rotating by -theta brings V_e - V_g onto the positive in-phase axis.
  const double theta = rotation_angle(model);
  return (std::polar(1.0, -theta) * (v - model.v_g)).real();
}

ShotSet sample_shots(double p_e, std::size_t n_shots, const VoltageModel& model,
                     std::uint64_t seed) {
  if (!in_unit(p_e)) throw std::invalid_argument("sample_shots: p_e outside [0, 1]");
  if (!(model.sigma >= 0)) throw std::invalid_argument("sample_shots: sigma must be non-negative");
  if (n_shots == 0) throw std::invalid_argument("sample_shots: need at least one shot");
  const double span = corrected_signal(model.v_e, model);
  if (!(span > 0)) throw std::invalid_argument("sample_shots: V_e and V_g coincide");

  std::mt19937_64 rng(seed);
  std::bernoulli_distribution state(p_e);
  std::normal_distribution<double> noise(0.0, 1.0);

  ShotSet set;
  set.threshold = 0.5 * span;
  set.shots.reserve(n_shots);
  double sum = 0.0;
  std::size_t n_excited = 0;
  for (std::size_t i = 0; i < n_shots; ++i) {
    const bool e = state(rng);
    std::complex<double> v = e ? model.v_e : model.v_g;
    if (model.sigma > 0) {
      const double re = noise(rng);
      const double im = noise(rng);
      v += model.sigma * std::complex<double>(re, im);
    }
    ShotRecord r{v, corrected_signal(v, model), false};
    r.excited = r.delta_v > set.threshold;
    sum += r.delta_v;
    n_excited += r.excited ? 1 : 0;
    set.shots.push_back(r);
  }
  set.p_e_average = sum / static_cast<double>(n_shots) / span;
  set.p_e_thresholded = static_cast<double>(n_excited) / static_cast<double>(n_shots);
  return set;
}

double misassignment_probability(const VoltageModel& model) {
  const double half = 0.5 * std::abs(model.v_e - model.v_g);
  if (model.sigma <= 0) return 0.0;
  return 0.5 * std::erfc(half / (model.sigma * std::sqrt(2.0)));
}

void write_shots_csv(std::ostream& os, const ShotSet& set) {
  os << "re_V,im_V,dV,state\n" << std::setprecision(10);
  for (const auto& s : set.shots) {
    os << s.v.real() << ',' << s.v.imag() << ',' << s.delta_v << ',' << (s.excited ? 'e' : 'g')
       << '\n';
  }
}

}  // namespace mqnd::readout
