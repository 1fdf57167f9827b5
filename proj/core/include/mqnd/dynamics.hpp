#pragma once

// Lindblad dynamics of the driven qubit (x) Kittel-mode system in the frame
// rotating at the qubit-control and magnon-drive frequencies.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <complex>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mqnd/pulses.hpp"

namespace mqnd::dynamics {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using SparseMatrix = Eigen::SparseMatrix<Complex>;

/// Integrator gave up (step size underflow or step budget exhausted).
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double t)
      : std::runtime_error(what + " at t = " + std::to_string(t) + " s"), time(t) {}
  double time;
};

/// Static part of
///   H = (Ds - a/2) b'b + (a/2)(b'b)^2 + Dd c'c + 2 chi b'b c'c
///       + Omega_s(t)(b + b') + Omega_d(t)(c + c').
struct EffectiveHamiltonianSpec {
  double delta_s = 0.0;
  double delta_d = 0.0;
  double alpha = 0.0;  // dressed anharmonicity
  double chi_qm = 0.0;
  int n_levels_qubit = 3;
  int n_levels_magnon = 8;

  int dim() const { return n_levels_qubit * n_levels_magnon; }
  void validate() const;
};

struct CollapseChannel {
  std::string name;
  double rate = 0.0;  // 1/s
  Matrix op;
};

struct ChannelRates {
  double gamma_1 = 0.0;
  double gamma_phi = 0.0;
  double n_th_q = 0.0;
  double gamma_m = 0.0;
  double n_th_m = 0.0;
};

/// Qubit relaxation/excitation/dephasing and magnon relaxation/excitation.
/// Channels with zero rate are dropped.
std::vector<CollapseChannel> standard_channels(const ChannelRates& rates,
                                               const EffectiveHamiltonianSpec& spec);

/// Operators on the qubit (x) magnon space (qubit index most significant).
Matrix qubit_op(const Matrix& op, const EffectiveHamiltonianSpec& spec);
Matrix magnon_op(const Matrix& op, const EffectiveHamiltonianSpec& spec);
Matrix static_hamiltonian(const EffectiveHamiltonianSpec& spec);

/// Time-dependent real envelopes multiplying (b + b') and (c + c').
struct Drives {
  std::function<double(double)> omega_s;
  std::function<double(double)> omega_d;
  std::vector<double> breakpoints;  // envelope discontinuities
};
Drives drives_from_schedule(const pulses::PulseSchedule& schedule);

/// Precomputed sparse generator; cheap to evaluate repeatedly.
class LindbladSystem {
 public:
  LindbladSystem(const EffectiveHamiltonianSpec& spec, std::vector<CollapseChannel> channels);

  /// d rho / dt for a Hermitian rho.
  void rhs(const Matrix& rho, double omega_s, double omega_d, Matrix& out) const;
  Matrix rhs(const Matrix& rho, double t, const Drives& drives) const;

  const EffectiveHamiltonianSpec& spec() const { return spec_; }
  const std::vector<CollapseChannel>& channels() const { return channels_; }
  int dim() const { return spec_.dim(); }

 private:
  EffectiveHamiltonianSpec spec_;
  std::vector<CollapseChannel> channels_;
  SparseMatrix h_nonhermitian_;  // H0 - i/2 sum rate L'L
  SparseMatrix x_s_;
  SparseMatrix x_d_;
  std::vector<std::pair<double, SparseMatrix>> jumps_;
};

/// Dense reference form of the generator, -i[H, rho] + sum rate D[L] rho.
Matrix lindblad_rhs(const Matrix& rho, double t, const EffectiveHamiltonianSpec& spec,
                    const Drives& drives, std::span<const CollapseChannel> channels);

struct IntegratorOptions {
  double atol = 1e-10;
  double rtol = 1e-8;
  double initial_step = 0.0;  // 0: automatic
  double max_step = 0.0;      // 0: unbounded
  double min_step = 1e-20;
  long max_steps = 20'000'000;
  bool check_invariants = true;
  bool store_states = false;
};

struct StateDiagnostics {
  double trace_error = 0.0;       // |tr rho - 1|
  double hermiticity_error = 0.0;  // max |rho - rho'|
  double min_eigenvalue = 0.0;
};
StateDiagnostics diagnose_state(const Matrix& rho);

struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> qubit_populations;  // p_i(t), i = g, e, f, ...
  std::vector<double> n_m;
  std::vector<Matrix> states;  // only with store_states
  StateDiagnostics worst;      // worst values over all samples
  long steps = 0;
  long rejected = 0;

  double p(std::size_t sample, int level) const { return qubit_populations[sample](level); }
  std::size_t size() const { return times.size(); }
};

/// Integrate from rho0 at grid.front() through every grid time
/// (strictly increasing). Adaptive Dormand-Prince 5(4).
Trajectory evolve(const Matrix& rho0, const LindbladSystem& system, const Drives& drives,
                  std::span<const double> grid, const IntegratorOptions& options = {});

/// Boltzmann ratio r = p_{k+1}/p_k such that the first excited level holds
/// eps_ini in an n_levels ladder, and the matching thermal occupancy r/(1-r).
double boltzmann_ratio_for_excited_population(double eps_ini, int n_levels);
double thermal_occupancy_for_init_error(double eps_ini, int n_levels);

/// Qubit in its thermal state with excited population eps_ini, Kittel mode in
/// the Fock state n_magnon.
Matrix initial_state(const EffectiveHamiltonianSpec& spec, double eps_ini, int n_magnon = 0);

Eigen::VectorXd qubit_populations(const Matrix& rho, const EffectiveHamiltonianSpec& spec);
double magnon_population(const Matrix& rho, const EffectiveHamiltonianSpec& spec);

/// CSV with columns time_ns, p_g, p_e, p_f, n_m.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

struct RamseySpec {
  double pulse_duration = 20e-9;
  double half_pi_amplitude = 0.0;  // area pi/2 at the chosen duration
  double omega_d = 0.0;            // continuous magnon drive, on from t = 0
  double settle_time = 0.0;        // drive-on time before the first pulse
  std::vector<double> taus;        // free evolution times, >= 2 pulse durations
};

struct RamseyResult {
  std::vector<double> taus;
  std::vector<double> p_e;
};

/// Two pi/2 pulses separated (centre to centre) by pulse_duration + tau.
RamseyResult ramsey_evolve(const Matrix& rho0, const LindbladSystem& system,
                           const RamseySpec& ramsey, const IntegratorOptions& options = {});

}  // namespace mqnd::dynamics
