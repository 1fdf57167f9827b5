#include "mqnd/detection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <exception>
#include <stdexcept>
#include <string>

#include "mqnd/parallel.hpp"
#include "mqnd/units.hpp"

namespace mqnd::detection {

SystemParams SystemParams::defaults() {
  SystemParams s;
  s.qubit = hilbert::default_qubit();
  s.magnon = hilbert::default_magnon();
  s.chi_qm = mhz(-1.91);
  s.delta_d = mhz(-0.01);
  s.readout = {0.043, 0.040, 31e-9};
  s.timing.delta_t_r = 31e-9;
  return s;
}

void SystemParams::validate() const {
  qubit.validate();
  magnon.validate();
  readout.validate();
  measured.validate();
  if (!std::isfinite(chi_qm) || !std::isfinite(delta_d)) {
    throw std::invalid_argument("chi_qm and delta_d must be finite");
  }
  if (!(timing.tau_d > 0)) throw std::invalid_argument("tau_d must be positive");
  if (!(timing.readout_gap >= 0)) throw std::invalid_argument("readout_gap must be non-negative");
  if (!(timing.delta_t_r >= 0)) throw std::invalid_argument("delta_t_r must be non-negative");
  if (n_levels_qubit < 2) throw std::invalid_argument("n_levels_qubit must be at least 2");
  if (n_levels_magnon < 2) throw std::invalid_argument("n_levels_magnon must be at least 2");
  if (!(sample_step > 0)) throw std::invalid_argument("sample_step must be positive");
}

double SystemParams::n_th_q() const {
  if (!thermal_from_eps_ini) return qubit.n_th_q;
  return dynamics::thermal_occupancy_for_init_error(qubit.eps_ini, n_levels_qubit);
}

dynamics::EffectiveHamiltonianSpec SystemParams::hamiltonian(double delta_s) const {
  return {delta_s, delta_d, qubit.alpha0, chi_qm, n_levels_qubit, n_levels_magnon};
}

dynamics::ChannelRates SystemParams::rates() const {
  dynamics::ChannelRates r;
  r.gamma_1 = std::isinf(qubit.T1) ? 0.0 : qubit.gamma_1();
  r.gamma_phi = std::isinf(qubit.T2_star) ? 0.0 : std::max(0.0, qubit.gamma_phi());
  if (std::isinf(qubit.T2_star) && !std::isinf(qubit.T1)) r.gamma_phi = 0.0;
  r.n_th_q = r.gamma_1 > 0 ? n_th_q() : 0.0;
  r.gamma_m = magnon.gamma_m;
  r.n_th_m = magnon.n_th_m;
  return r;
}

SystemParams without_initialization_error(SystemParams s) {
  s.qubit.eps_ini = 0.0;
  if (!s.thermal_from_eps_ini) s.qubit.n_th_q = 0.0;
  return s;
}

SystemParams without_decoherence(SystemParams s) {
  s.qubit.T1 = std::numeric_limits<double>::infinity();
  s.qubit.T2_star = std::numeric_limits<double>::infinity();
  return s;
}

SystemParams without_readout_error(SystemParams s) {
  s.readout.eps_g = 0.0;
  s.readout.eps_e = 0.0;
  return s;
}

SystemParams entanglement_only(SystemParams s) {
  return without_readout_error(without_decoherence(without_initialization_error(std::move(s))));
}

SystemParams improved_device(SystemParams s, double eps_ini, double t1, double t2_star,
                             double eps_readout) {
  s.qubit.eps_ini = eps_ini;
  s.qubit.T1 = t1;
  s.qubit.T2_star = t2_star;
  s.readout.eps_g = eps_readout;
  s.readout.eps_e = eps_readout;
  return s;
}

std::string to_string(ClickState c) { return c == ClickState::g ? "g" : "e"; }

DetectionScheme at_least_one_scheme() { return {"at_least_one", ClickState::g, 0.0}; }

DetectionScheme exactly_one_scheme(const SystemParams& s) {
  // omega_s = omega_q^0 + 2 chi  =>  delta_s = -2 chi.
  return {"exactly_one", ClickState::e, -2.0 * s.chi_qm};
}

double weighted_magnon_population(const dynamics::Trajectory& traj,
                                  const pulses::PulseSchedule& schedule) {
  const double t_r = schedule.readout_time();
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 1; i < traj.size(); ++i) {
    const double t0 = traj.times[i - 1];
    const double t1 = traj.times[i];
    if (t0 < 0.0 || t1 > t_r * (1 + 1e-12)) continue;
    const double w0 = schedule.qubit(t0);
    const double w1 = schedule.qubit(t1);
    const double dt = t1 - t0;
    num += 0.5 * dt * (w0 * traj.n_m[i - 1] + w1 * traj.n_m[i]);
    den += 0.5 * dt * (w0 + w1);
  }
  if (!(den > 0)) {
    throw std::invalid_argument(
        "weighted_magnon_population: trajectory does not overlap the qubit pulse");
  }
  return num / den;
}

ProtocolRun simulate_protocol(const SystemParams& s, double delta_s, double tau_pi,
                              double omega_s, double omega_d, const RunOptions& options) {
  s.validate();
  pulses::ProtocolTiming timing = s.timing;
  timing.tau_pi = tau_pi;
  ProtocolRun run;
  run.schedule = pulses::make_protocol_schedule(timing, omega_s, omega_d);

  const auto spec = s.hamiltonian(delta_s);
  const dynamics::LindbladSystem system(spec, dynamics::standard_channels(s.rates(), spec));
  const double t_r = run.schedule.readout_time();
  std::vector<double> grid;
  for (long k = 0;; ++k) {
    const double t = static_cast<double>(k) * s.sample_step;
    if (t >= t_r - 1e-3 * s.sample_step) break;
    grid.push_back(t);
  }
  grid.push_back(t_r);

  auto opt = s.integrator;
  opt.store_states = options.store_states;
  run.trajectory =
      dynamics::evolve(dynamics::initial_state(spec, s.qubit.eps_ini, options.initial_magnon_fock),
                       system, dynamics::drives_from_schedule(run.schedule), grid, opt);
  run.p_tilde_g = std::clamp(run.trajectory.qubit_populations.back()(0), 0.0, 1.0);
  run.p_g = readout::apply_readout_correction(run.p_tilde_g, s.readout);
  run.nbar = omega_s > 0 ? weighted_magnon_population(run.trajectory, run.schedule) : 0.0;
  return run;
}

double calibrate_qubit_amplitude(const SystemParams& s, double tau_pi, double delta_s) {
  auto objective = [&](double amplitude) {
    return simulate_protocol(s, delta_s, tau_pi, amplitude, 0.0).p_tilde_g;
  };
  return pulses::calibrate_pi_amplitude_near(objective, tau_pi).amplitude;
}

namespace {

std::string ns_label(const char* name, double seconds) {
  return std::string(name) + "=" + std::to_string(seconds * 1e9) + " ns";
}

// Runs fn, nesting any failure inside a GridPointError labelled `point`.
template <class Fn>
auto at_point(const std::string& point, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const std::exception& e) {
    std::throw_with_nested(GridPointError(point, e.what()));
  }
}

SweepPoint to_point(const ProtocolRun& run, double omega_d, ClickState click) {
  SweepPoint p;
  p.omega_d = omega_d;
  p.nbar = run.nbar;
  p.p_g = run.p_g;
  p.p_tilde_g = run.p_tilde_g;
  p.p_click = click == ClickState::g ? run.p_g : 1.0 - run.p_g;
  return p;
}

void merge(dynamics::StateDiagnostics& worst, const dynamics::StateDiagnostics& d, bool first) {
  if (first) {
    worst = d;
    return;
  }
  worst.trace_error = std::max(worst.trace_error, d.trace_error);
  worst.hermiticity_error = std::max(worst.hermiticity_error, d.hermiticity_error);
  worst.min_eigenvalue = std::min(worst.min_eigenvalue, d.min_eigenvalue);
}

}  // namespace

SweepResult detection_sweep(const SystemParams& s, const DetectionScheme& scheme, double tau_pi,
                            const SweepOptions& options) {
  if (options.n_points < 3) throw std::invalid_argument("detection_sweep: need at least 3 points");
  if (!(options.nbar_max > 0)) throw std::invalid_argument("detection_sweep: nbar_max must be positive");
  SweepResult out;
  out.scheme = scheme.name;
  out.click = scheme.click;
  out.tau_pi = tau_pi;
  out.delta_s = scheme.delta_s;
  out.omega_s = options.omega_s > 0 ? options.omega_s : calibrate_qubit_amplitude(s, tau_pi);

  // The weighted population is quadratic in the drive amplitude.
  const double probe = std::sqrt(options.nbar_max) / s.timing.tau_d;
  const double nbar_probe =
      simulate_protocol(s, scheme.delta_s, tau_pi, out.omega_s, probe).nbar;
  if (!(nbar_probe > 0)) throw std::runtime_error("detection_sweep: magnon drive has no effect");
  const double scale = nbar_probe / (probe * probe);

  const auto n = static_cast<std::size_t>(options.n_points);
  std::vector<double> amplitudes(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double target = options.nbar_max * static_cast<double>(k) / static_cast<double>(n - 1);
    amplitudes[k] = std::sqrt(target / scale);
  }
  const auto runs = parallel_map<ProtocolRun>(n, options.jobs, [&](std::size_t k) {
    return at_point("omega_d/2pi=" + std::to_string(amplitudes[k] / kTwoPi) + " Hz", [&] {
      return simulate_protocol(s, scheme.delta_s, tau_pi, out.omega_s, amplitudes[k]);
    });
  });
  for (std::size_t k = 0; k < n; ++k) {
    out.points.push_back(to_point(runs[k], amplitudes[k], scheme.click));
    merge(out.worst, runs[k].trajectory.worst, k == 0);
  }
  return out;
}

DetectorMetrics fit_metrics(const SweepResult& sweep, FitModel model) {
  const auto& pts = sweep.points;
  if (pts.size() < 3) throw std::invalid_argument("fit_metrics: need at least 3 sweep points");
  if (pts.front().omega_d != 0.0) {
    throw std::invalid_argument("fit_metrics: first sweep point must have no magnon drive");
  }
  const auto n = static_cast<double>(pts.size());
  auto event = [model](double nbar) {
    return model == FitModel::at_least_one ? 1.0 - std::exp(-nbar) : nbar * std::exp(-nbar);
  };
  double mx = 0.0, my = 0.0;
  for (const auto& p : pts) {
    mx += event(p.nbar);
    my += p.p_click;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& p : pts) {
    const double dx = event(p.nbar) - mx;
    sxx += dx * dx;
    sxy += dx * (p.p_click - my);
  }
  if (!(sxx > 1e-14)) throw std::invalid_argument("fit_metrics: degenerate design (all nbar equal)");

  DetectorMetrics m;
  m.scheme = sweep.scheme;
  m.click = sweep.click;
  m.tau_pi = sweep.tau_pi;
  m.efficiency = sxy / sxx;
  m.intercept = my - m.efficiency * mx;
  m.dark_count = pts.front().p_click;
  double rss = 0.0;
  for (const auto& p : pts) {
    const double r = p.p_click - (m.intercept + m.efficiency * event(p.nbar));
    rss += r * r;
  }
  m.rms_residual = std::sqrt(rss / n);
  const double s2 = pts.size() > 2 ? rss / (n - 2.0) : 0.0;
  m.efficiency_stderr = std::sqrt(s2 / sxx);
  m.intercept_stderr = std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
  return m;
}

ErrorBudget error_budget(const SystemParams& s, double tau_pi, const SweepOptions& options) {
  const std::vector<SystemParams> variants{s, without_initialization_error(s),
                                           without_decoherence(s), without_readout_error(s),
                                           entanglement_only(s)};
  SweepOptions inner = options;
  inner.jobs = 1;
  const auto metrics = parallel_map<DetectorMetrics>(
      variants.size(), options.jobs, [&](std::size_t i) {
        return fit_metrics(detection_sweep(variants[i], at_least_one_scheme(), tau_pi, inner));
      });
  ErrorBudget b;
  b.tau_pi = tau_pi;
  b.full = metrics[0];
  b.no_initialization = metrics[1];
  b.no_decoherence = metrics[2];
  b.no_readout = metrics[3];
  b.entanglement_only = metrics[4];
  auto row = [&](std::string name, const DetectorMetrics& without) {
    return BudgetRow{std::move(name), b.full.dark_count - without.dark_count,
                     without.efficiency - b.full.efficiency};
  };
  b.rows.push_back(row("initialization", b.no_initialization));
  b.rows.push_back(row("decoherence", b.no_decoherence));
  b.rows.push_back(row("readout", b.no_readout));
  b.rows.push_back(
      {"entanglement", b.entanglement_only.dark_count, 1.0 - b.entanglement_only.efficiency});
  return b;
}

std::vector<TauPoint> sweep_tau(const SystemParams& s, const std::vector<double>& taus,
                                const DetectionScheme& scheme, const SweepOptions& options) {
  SweepOptions inner = options;
  inner.jobs = 1;
  inner.omega_s = 0.0;
  return parallel_map<TauPoint>(taus.size(), options.jobs, [&](std::size_t i) {
    return at_point(ns_label("tau_pi", taus[i]), [&] {
      return TauPoint{taus[i], fit_metrics(detection_sweep(s, scheme, taus[i], inner))};
    });
  });
}

Projection improved_device_projection(const SystemParams& base, const SystemParams& improved,
                                      const std::vector<double>& taus,
                                      const SweepOptions& options) {
  return {sweep_tau(base, taus, at_least_one_scheme(), options),
          sweep_tau(improved, taus, at_least_one_scheme(), options)};
}

std::vector<GeneralizedPoint> generalized_sweep(const SystemParams& s,
                                                const std::vector<double>& delta_s_grid,
                                                double tau_pi, const SweepOptions& options) {
  SweepOptions inner = options;
  inner.jobs = 1;
  inner.omega_s = options.omega_s > 0 ? options.omega_s : calibrate_qubit_amplitude(s, tau_pi);
  return parallel_map<GeneralizedPoint>(delta_s_grid.size(), options.jobs, [&](std::size_t i) {
    DetectionScheme scheme{"generalized", ClickState::g, delta_s_grid[i]};
    SweepResult sweep = at_point("delta_s/2pi=" + std::to_string(delta_s_grid[i] / kTwoPi) + " Hz",
                                 [&] { return detection_sweep(s, scheme, tau_pi, inner); });
    GeneralizedPoint gp;
    gp.delta_s = delta_s_grid[i];
    gp.p_g0 = sweep.points.front().p_g;
    gp.click = gp.p_g0 <= 0.5 ? ClickState::g : ClickState::e;
    if (gp.click == ClickState::e) {
      sweep.click = ClickState::e;
      for (auto& p : sweep.points) p.p_click = 1.0 - p.p_g;
    }
    gp.metrics = fit_metrics(sweep);
    return gp;
  });
}

SweepResult spurious_efficiency_correction(const SweepResult& with_pulse,
                                           const SweepResult& without_pulse,
                                           double polarization) {
  if (!(polarization >= -1.0 && polarization <= 1.0)) {
    throw std::invalid_argument("qubit polarization must lie in [-1, 1]");
  }
  const auto& a = with_pulse.points;
  const auto& b = without_pulse.points;
  if (a.size() != b.size() || a.empty()) {
    throw std::invalid_argument("spurious_efficiency_correction: sweep grids differ in size");
  }
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (std::abs(a[k].nbar - b[k].nbar) > 1e-9 * std::max(1.0, std::abs(a[k].nbar))) {
      throw std::invalid_argument("spurious_efficiency_correction: nbar grids differ");
    }
  }
  SweepResult out = with_pulse;
  for (std::size_t k = 0; k < a.size(); ++k) {
    out.points[k].p_click = a[k].p_click + polarization * (b[k].p_click - b[0].p_click);
  }
  return out;
}

std::vector<double> control_error_vs_delay(const SystemParams& s, double tau_pi,
                                           std::span<const double> delays) {
  if (delays.empty()) return {};
  SystemParams cal = s;
  cal.timing.delta_t_r = 0.0;
  const double amplitude = calibrate_qubit_amplitude(cal, tau_pi);

  pulses::ProtocolTiming timing = cal.timing;
  timing.tau_pi = tau_pi;
  const auto schedule = pulses::make_protocol_schedule(timing, amplitude, 0.0);
  const auto spec = s.hamiltonian(0.0);
  const dynamics::LindbladSystem system(spec, dynamics::standard_channels(s.rates(), spec));
  std::vector<double> grid{0.0};
  for (double d : delays) grid.push_back(schedule.readout_start + d);
  auto opt = s.integrator;
  opt.store_states = false;
  const auto traj = dynamics::evolve(dynamics::initial_state(spec, s.qubit.eps_ini), system,
                                     dynamics::drives_from_schedule(schedule), grid, opt);
  std::vector<double> out;
  for (std::size_t k = 1; k < traj.size(); ++k) {
    out.push_back(1.0 - traj.p(k, 1) - s.qubit.eps_ini);
  }
  return out;
}

readout::ReadoutBounds readout_bounds(const SystemParams& s, double tau_pi, double step,
                                      double cap) {
  return readout::bound_readout_fidelity(
      [&](std::span<const double> delays) { return control_error_vs_delay(s, tau_pi, delays); },
      s.measured, step, cap);
}

SystemParams with_derived_readout(SystemParams s, const readout::ReadoutBounds& bounds) {
  s.readout = bounds.midrange;
  s.timing.delta_t_r = bounds.midrange.delta_t_r;
  return s;
}

DelaySensitivity readout_delay_sensitivity(const SystemParams& s,
                                           const readout::ReadoutBounds& bounds, double tau_pi,
                                           const SweepOptions& options) {
  SystemParams lo = s;
  lo.readout = bounds.at_min_delay;
  lo.timing.delta_t_r = 0.0;
  SystemParams hi = s;
  hi.readout = bounds.at_max_delay;
  hi.timing.delta_t_r = bounds.max_delay;
  SweepOptions inner = options;
  inner.jobs = 1;
  const SystemParams variants[] = {lo, hi};
  const auto m = parallel_map<DetectorMetrics>(2, options.jobs, [&](std::size_t i) {
    return fit_metrics(detection_sweep(variants[i], at_least_one_scheme(), tau_pi, inner));
  });
  DelaySensitivity d;
  d.at_min_delay = m[0];
  d.at_max_delay = m[1];
  d.dark_count_spread = std::abs(m[1].dark_count - m[0].dark_count);
  d.efficiency_spread = std::abs(m[1].efficiency - m[0].efficiency);
  return d;
}

}  // namespace mqnd::detection
