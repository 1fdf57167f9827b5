#pragma once

// Single-magnon detection protocols: simulation of the entangling qubit
// excitation, detector metrics, error budget and scheme variants.

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mqnd/dynamics.hpp"
#include "mqnd/hilbert.hpp"
#include "mqnd/pulses.hpp"
#include "mqnd/readout.hpp"

namespace mqnd::detection {

/// A sweep grid point failed; the original exception is nested
/// (std::throw_with_nested) so callers can report the full chain.
class GridPointError : public std::runtime_error {
 public:
  GridPointError(std::string point, const std::string& what)
      : std::runtime_error(point + ": " + what), point(std::move(point)) {}
  std::string point;
};

struct SystemParams {
  hilbert::QubitParams qubit;
  hilbert::MagnonParams magnon;
  double chi_qm = 0.0;
  double delta_d = 0.0;  // omega_m^g - omega_d
  readout::ReadoutModel readout;
  readout::MeasuredProbabilities measured;
  pulses::ProtocolTiming timing;  // tau_pi is overridden per run
  int n_levels_qubit = 3;
  int n_levels_magnon = 8;
  /// Qubit thermal occupancy follows eps_ini (Boltzmann ladder) when true;
  /// otherwise qubit.n_th_q is used as given.
  bool thermal_from_eps_ini = true;
  dynamics::IntegratorOptions integrator;
  double sample_step = 1e-9;  // trajectory output spacing

  /// Simulation parameter set of the measured device.
  static SystemParams defaults();
  void validate() const;

  double n_th_q() const;
  dynamics::EffectiveHamiltonianSpec hamiltonian(double delta_s) const;
  dynamics::ChannelRates rates() const;
};

// Variants used by the error budget.
SystemParams without_initialization_error(SystemParams s);
SystemParams without_decoherence(SystemParams s);  // T1 = T2* = infinity
SystemParams without_readout_error(SystemParams s);
SystemParams entanglement_only(SystemParams s);
/// Improved device: eps_ini, T1 = T2*, eps_g = eps_e overridden.
SystemParams improved_device(SystemParams s, double eps_ini = 0.01, double t1 = 20e-6,
                             double t2_star = 20e-6, double eps_readout = 0.01);

enum class ClickState { g, e };
std::string to_string(ClickState c);

struct DetectionScheme {
  std::string name;
  ClickState click = ClickState::g;
  double delta_s = 0.0;  // omega_q^0 - omega_s
};
/// X_pi^0: control at omega_q^0, click on g.
DetectionScheme at_least_one_scheme();
/// X_pi^1: control at omega_q^1 = omega_q^0 + 2 chi, click on e.
DetectionScheme exactly_one_scheme(const SystemParams& s);

struct ProtocolRun {
  pulses::PulseSchedule schedule;
  dynamics::Trajectory trajectory;
  double p_tilde_g = 0.0;  // ideal probability at t_r
  double p_g = 0.0;        // after readout correction
  double nbar = 0.0;       // weighted magnon population
};

/// Weighted average of n_m(t) with the qubit envelope over [0, t_r]
/// (trapezoidal rule on the trajectory samples).
double weighted_magnon_population(const dynamics::Trajectory& traj,
                                  const pulses::PulseSchedule& schedule);

struct RunOptions {
  int initial_magnon_fock = 0;
  bool store_states = false;
};

ProtocolRun simulate_protocol(const SystemParams& s, double delta_s, double tau_pi,
                              double omega_s, double omega_d, const RunOptions& options = {});

/// Qubit pulse amplitude minimizing p~_g(t_r) with no magnon drive.
double calibrate_qubit_amplitude(const SystemParams& s, double tau_pi, double delta_s = 0.0);

struct SweepPoint {
  double omega_d = 0.0;
  double nbar = 0.0;
  double p_click = 0.0;  // corrected probability of the click state
  double p_g = 0.0;
  double p_tilde_g = 0.0;
};

struct SweepResult {
  std::string scheme;
  ClickState click = ClickState::g;
  double tau_pi = 0.0;
  double omega_s = 0.0;  // calibrated qubit amplitude
  double delta_s = 0.0;
  std::vector<SweepPoint> points;  // points[0] has omega_d = 0
  dynamics::StateDiagnostics worst;
};

struct SweepOptions {
  int n_points = 8;
  double nbar_max = 1.5;
  unsigned jobs = 1;
  /// Use this amplitude instead of calibrating (0: calibrate at delta_s = 0).
  double omega_s = 0.0;
};

/// Drive amplitudes spaced so that the weighted populations are evenly
/// spread over [0, nbar_max].
SweepResult detection_sweep(const SystemParams& s, const DetectionScheme& scheme, double tau_pi,
                            const SweepOptions& options = {});

enum class FitModel { at_least_one, exactly_one };

struct DetectorMetrics {
  std::string scheme;
  ClickState click = ClickState::g;
  double tau_pi = 0.0;
  double dark_count = 0.0;    // p_i(0) at omega_d = 0
  double efficiency = 0.0;    // eta_i, slope against the magnon-event probability
  double intercept = 0.0;     // fitted p_i(0)
  double efficiency_stderr = 0.0;
  double intercept_stderr = 0.0;
  double rms_residual = 0.0;
};

/// Linear least squares of p_i against 1 - exp(-nbar) (or nbar exp(-nbar)).
/// For the e-click scheme eta_e is the slope of p_e, i.e. -eta_g.
DetectorMetrics fit_metrics(const SweepResult& sweep, FitModel model = FitModel::at_least_one);

struct BudgetRow {
  std::string source;
  double delta_dark_count = 0.0;
  double delta_inefficiency = 0.0;
};

struct ErrorBudget {
  double tau_pi = 0.0;
  DetectorMetrics full;
  DetectorMetrics no_initialization;
  DetectorMetrics no_decoherence;
  DetectorMetrics no_readout;
  DetectorMetrics entanglement_only;
  std::vector<BudgetRow> rows;  // initialization, decoherence, readout, entanglement
};

ErrorBudget error_budget(const SystemParams& s, double tau_pi, const SweepOptions& options = {});

struct TauPoint {
  double tau_pi = 0.0;
  DetectorMetrics metrics;
};
std::vector<TauPoint> sweep_tau(const SystemParams& s, const std::vector<double>& taus,
                                const DetectionScheme& scheme, const SweepOptions& options = {});

struct Projection {
  std::vector<TauPoint> base;
  std::vector<TauPoint> improved;
};
Projection improved_device_projection(const SystemParams& base, const SystemParams& improved,
                                      const std::vector<double>& taus,
                                      const SweepOptions& options = {});

struct GeneralizedPoint {
  double delta_s = 0.0;
  ClickState click = ClickState::g;
  double p_g0 = 0.0;
  DetectorMetrics metrics;
};
/// Control detuning scan with the amplitude calibrated once at delta_s = 0.
/// Click state g iff p_g(0) <= 1/2.
std::vector<GeneralizedPoint> generalized_sweep(const SystemParams& s,
                                                const std::vector<double>& delta_s_grid,
                                                double tau_pi, const SweepOptions& options = {});

/// p_i = p_i' + (2 p_e - 1)(p_i0(nbar) - p_i0(0)) on a shared nbar grid.
SweepResult spurious_efficiency_correction(const SweepResult& with_pulse,
                                           const SweepResult& without_pulse,
                                           double polarization);

/// Control error of a tau_pi = `tau_pi` pi pulse read out at each delay
/// (relative to the readout-pulse start), eps_pi = 1 - p~_e - eps_ini.
std::vector<double> control_error_vs_delay(const SystemParams& s, double tau_pi,
                                           std::span<const double> delays);

readout::ReadoutBounds readout_bounds(const SystemParams& s, double tau_pi = 12e-9,
                                      double step = 1e-9, double cap = 200e-9);

/// Readout model from the midrange of the bounds, with delta_t_r set on the timing.
SystemParams with_derived_readout(SystemParams s, const readout::ReadoutBounds& bounds);

struct DelaySensitivity {
  DetectorMetrics at_min_delay;
  DetectorMetrics at_max_delay;
  double dark_count_spread = 0.0;
  double efficiency_spread = 0.0;
};
DelaySensitivity readout_delay_sensitivity(const SystemParams& s,
                                           const readout::ReadoutBounds& bounds, double tau_pi,
                                           const SweepOptions& options = {});

}  // namespace mqnd::detection
