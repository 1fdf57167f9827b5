#include "mqnd/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "mqnd/hilbert.hpp"

namespace mqnd::dynamics {

namespace {

SparseMatrix to_sparse(const Matrix& m) {
  SparseMatrix s = m.sparseView(Complex{1.0, 0.0}, 1e-300);
  s.makeCompressed();
  return s;
}

double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

void EffectiveHamiltonianSpec::validate() const {
  if (n_levels_qubit < 2) throw std::invalid_argument("n_levels_qubit must be at least 2");
  if (n_levels_magnon < 2) throw std::invalid_argument("n_levels_magnon must be at least 2");
  for (double v : {delta_s, delta_d, alpha, chi_qm}) {
    if (!std::isfinite(v)) throw std::invalid_argument("Hamiltonian parameters must be finite");
  }
}

Matrix qubit_op(const Matrix& op, const EffectiveHamiltonianSpec& spec) {
  const int dims[] = {spec.n_levels_qubit, spec.n_levels_magnon};
  return hilbert::embed(op, 0, dims);
}

Matrix magnon_op(const Matrix& op, const EffectiveHamiltonianSpec& spec) {
  const int dims[] = {spec.n_levels_qubit, spec.n_levels_magnon};
  return hilbert::embed(op, 1, dims);
}

Matrix static_hamiltonian(const EffectiveHamiltonianSpec& spec) {
  spec.validate();
  const Matrix nb = qubit_op(hilbert::number_operator(spec.n_levels_qubit), spec);
  const Matrix nc = magnon_op(hilbert::number_operator(spec.n_levels_magnon), spec);
  return (spec.delta_s - 0.5 * spec.alpha) * nb + 0.5 * spec.alpha * nb * nb +
         spec.delta_d * nc + 2.0 * spec.chi_qm * nb * nc;
}

std::vector<CollapseChannel> standard_channels(const ChannelRates& r,
                                               const EffectiveHamiltonianSpec& spec) {
  for (double v : {r.gamma_1, r.gamma_phi, r.n_th_q, r.gamma_m, r.n_th_m}) {
    if (!(v >= 0) || !std::isfinite(v)) {
      throw std::invalid_argument("collapse rates and occupancies must be finite and >= 0");
    }
  }
  const Matrix b = qubit_op(hilbert::annihilation(spec.n_levels_qubit), spec);
  const Matrix c = magnon_op(hilbert::annihilation(spec.n_levels_magnon), spec);
  std::vector<CollapseChannel> out;
  auto add = [&](std::string name, double rate, Matrix op) {
    if (rate > 0) out.push_back({std::move(name), rate, std::move(op)});
  };
  add("qubit_relaxation", r.gamma_1 * (1.0 + r.n_th_q), b);
  add("qubit_excitation", r.gamma_1 * r.n_th_q, b.adjoint());
  add("qubit_dephasing", 2.0 * r.gamma_phi, b.adjoint() * b);
  add("magnon_relaxation", r.gamma_m * (1.0 + r.n_th_m), c);
  add("magnon_excitation", r.gamma_m * r.n_th_m, c.adjoint());
  return out;
}

Drives drives_from_schedule(const pulses::PulseSchedule& schedule) {
  Drives d;
  d.omega_s = [q = schedule.qubit](double t) { return q(t); };
  d.omega_d = [m = schedule.magnon](double t) { return m(t); };
  d.breakpoints = schedule.breakpoints();
  return d;
}

LindbladSystem::LindbladSystem(const EffectiveHamiltonianSpec& spec,
                               std::vector<CollapseChannel> channels)
    : spec_(spec), channels_(std::move(channels)) {
  spec_.validate();
  const int n = spec_.dim();
  Matrix hnh = static_hamiltonian(spec_);
  for (const auto& ch : channels_) {
    if (ch.op.rows() != n || ch.op.cols() != n) {
      throw std::invalid_argument("collapse operator '" + ch.name +
                                  "' does not match the system dimension");
    }
    if (!(ch.rate >= 0)) throw std::invalid_argument("collapse rate must be non-negative");
    hnh -= Complex{0.0, 0.5 * ch.rate} * (ch.op.adjoint() * ch.op);
    jumps_.emplace_back(ch.rate, to_sparse(ch.op));
  }
  h_nonhermitian_ = to_sparse(hnh);
  const Matrix b = qubit_op(hilbert::annihilation(spec_.n_levels_qubit), spec_);
  const Matrix c = magnon_op(hilbert::annihilation(spec_.n_levels_magnon), spec_);
  x_s_ = to_sparse(b + b.adjoint());
  x_d_ = to_sparse(c + c.adjoint());
}

void LindbladSystem::rhs(const Matrix& rho, double omega_s, double omega_d, Matrix& out) const {
  // -i(Hnh rho - rho Hnh') with rho Hermitian: M = -i Hnh rho, out = M + M'.
  Matrix m = h_nonhermitian_ * rho;
  if (omega_s != 0.0) m.noalias() += omega_s * (x_s_ * rho);
  if (omega_d != 0.0) m.noalias() += omega_d * (x_d_ * rho);
  m *= Complex{0.0, -1.0};
  out = m + m.adjoint();
  for (const auto& [rate, l] : jumps_) {
    const Matrix lr = l * rho;
    out.noalias() += rate * (lr * l.adjoint());
  }
}

Matrix LindbladSystem::rhs(const Matrix& rho, double t, const Drives& drives) const {
  Matrix out;
  rhs(rho, drives.omega_s ? drives.omega_s(t) : 0.0, drives.omega_d ? drives.omega_d(t) : 0.0,
      out);
  return out;
}

Matrix lindblad_rhs(const Matrix& rho, double t, const EffectiveHamiltonianSpec& spec,
                    const Drives& drives, std::span<const CollapseChannel> channels) {
  const int n = spec.dim();
  if (rho.rows() != n || rho.cols() != n) {
    throw std::invalid_argument("lindblad_rhs: density matrix dimension mismatch");
  }
  Matrix h = static_hamiltonian(spec);
  const Matrix b = qubit_op(hilbert::annihilation(spec.n_levels_qubit), spec);
  const Matrix c = magnon_op(hilbert::annihilation(spec.n_levels_magnon), spec);
  if (drives.omega_s) h += drives.omega_s(t) * (b + b.adjoint());
  if (drives.omega_d) h += drives.omega_d(t) * (c + c.adjoint());
  Matrix out = Complex{0.0, -1.0} * (h * rho - rho * h);
  for (const auto& ch : channels) {
    if (ch.op.rows() != n || ch.op.cols() != n) {
      throw std::invalid_argument("lindblad_rhs: collapse operator dimension mismatch");
    }
    const Matrix ldl = ch.op.adjoint() * ch.op;
    out += ch.rate * (ch.op * rho * ch.op.adjoint() - 0.5 * (ldl * rho + rho * ldl));
  }
  return out;
}

StateDiagnostics diagnose_state(const Matrix& rho) {
  StateDiagnostics d;
  d.trace_error = std::abs(rho.trace() - Complex{1.0, 0.0});
  d.hermiticity_error = max_abs(rho - rho.adjoint());
  const Matrix herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(herm, Eigen::EigenvaluesOnly);
  d.min_eigenvalue = solver.eigenvalues().minCoeff();
  return d;
}

Eigen::VectorXd qubit_populations(const Matrix& rho, const EffectiveHamiltonianSpec& spec) {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(spec.n_levels_qubit);
  const int nm = spec.n_levels_magnon;
  for (int q = 0; q < spec.n_levels_qubit; ++q) {
    for (int m = 0; m < nm; ++m) p(q) += rho(q * nm + m, q * nm + m).real();
  }
  return p;
}

double magnon_population(const Matrix& rho, const EffectiveHamiltonianSpec& spec) {
  double n = 0.0;
  const int nm = spec.n_levels_magnon;
  for (int q = 0; q < spec.n_levels_qubit; ++q) {
    for (int m = 1; m < nm; ++m) n += m * rho(q * nm + m, q * nm + m).real();
  }
  return n;
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

struct Stepper {
  const LindbladSystem& sys;
  const Drives& drives;
  const IntegratorOptions& opt;
  Matrix k1, k2, k3, k4, k5, k6, k7, tmp, y_new, err;
  long steps = 0;
  long rejected = 0;

  void f(double t, const Matrix& y, Matrix& out) {
    sys.rhs(y, drives.omega_s ? drives.omega_s(t) : 0.0,
            drives.omega_d ? drives.omega_d(t) : 0.0, out);
  }

  double error_norm(const Matrix& y) const {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double sc =
          opt.atol + opt.rtol * std::max(std::abs(y.data()[i]), std::abs(y_new.data()[i]));
      const double r = std::abs(err.data()[i]) / sc;
      acc += r * r;
    }
    return std::sqrt(acc / static_cast<double>(y.size()));
  }

  double initial_step(double t, const Matrix& y, double span) {
    if (opt.initial_step > 0) return std::min(opt.initial_step, span);
    f(t, y, k1);
    const double d0 = max_abs(y);
    const double d1 = max_abs(k1);
    double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-12 : 0.01 * d0 / d1;
    return std::min(h, span);
  }

  // Integrate y from t0 to t1 exactly; h carries the step-size guess.
  void advance(Matrix& y, double t0, double t1, double& h) {
    double t = t0;
    f(t, y, k1);
    bool last_rejected = false;
    while (t < t1) {
      if (++steps > opt.max_steps) throw IntegrationError("step budget exhausted", t);
      if (opt.max_step > 0) h = std::min(h, opt.max_step);
      bool final_step = false;
      if (t + h >= t1 || t1 - (t + h) < 1e-9 * h) {
        h = t1 - t;
        final_step = true;
      }
      if (h < opt.min_step) throw IntegrationError("step size underflow", t);

      tmp = y + h * a21 * k1;
      f(t + c2 * h, tmp, k2);
      tmp = y + h * (a31 * k1 + a32 * k2);
      f(t + c3 * h, tmp, k3);
      tmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
      f(t + c4 * h, tmp, k4);
      tmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
      f(t + c5 * h, tmp, k5);
      tmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      f(t + h, tmp, k6);
      y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      f(t + h, y_new, k7);
      err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

      const double en = error_norm(y);
      if (!std::isfinite(en)) throw IntegrationError("non-finite error estimate", t);
      if (en <= 1.0) {
        t = final_step ? t1 : t + h;
        y.swap(y_new);
        k1.swap(k7);
        double factor = en == 0.0 ? 5.0 : 0.9 * std::pow(en, -0.2);
        factor = std::clamp(factor, 0.2, last_rejected ? 1.0 : 5.0);
        if (!final_step) h *= factor;
        last_rejected = false;
      } else {
        ++rejected;
        h *= std::max(0.2, 0.9 * std::pow(en, -0.2));
        last_rejected = true;
      }
    }
  }
};

void merge_worst(StateDiagnostics& worst, const StateDiagnostics& d, bool first) {
  if (first) {
    worst = d;
    return;
  }
  worst.trace_error = std::max(worst.trace_error, d.trace_error);
  worst.hermiticity_error = std::max(worst.hermiticity_error, d.hermiticity_error);
  worst.min_eigenvalue = std::min(worst.min_eigenvalue, d.min_eigenvalue);
}

}  // namespace

Trajectory evolve(const Matrix& rho0, const LindbladSystem& system, const Drives& drives,
                  std::span<const double> grid, const IntegratorOptions& options) {
  const int n = system.dim();
  if (rho0.rows() != n || rho0.cols() != n) {
    throw std::invalid_argument("evolve: initial state dimension mismatch");
  }
  if (grid.empty()) throw std::invalid_argument("evolve: empty time grid");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw std::invalid_argument("evolve: grid must be strictly increasing");
  }
  if (!(options.atol > 0) || !(options.rtol > 0)) {
    throw std::invalid_argument("evolve: tolerances must be positive");
  }

  const auto& spec = system.spec();
  Trajectory traj;
  traj.times.reserve(grid.size());
  Matrix y = rho0;

  auto record = [&](double t) {
    traj.times.push_back(t);
    traj.qubit_populations.push_back(qubit_populations(y, spec));
    traj.n_m.push_back(magnon_population(y, spec));
    if (options.store_states) traj.states.push_back(y);
    if (options.check_invariants) merge_worst(traj.worst, diagnose_state(y), traj.size() == 1);
  };

  Stepper stepper{system, drives, options, {}, {}, {}, {}, {}, {}, {}, {}, {}, {}};
  record(grid.front());
  if (grid.size() == 1) return traj;

  // Breakpoints closer than a femtosecond to an output time are dropped so no
  // degenerate segment is created.
  constexpr double kMergeTol = 1e-15;
  std::vector<double> stops(grid.begin() + 1, grid.end());
  for (double b : drives.breakpoints) {
    if (b <= grid.front() + kMergeTol || b >= grid.back() - kMergeTol) continue;
    const auto it = std::lower_bound(grid.begin(), grid.end(), b);
    const bool near_next = it != grid.end() && *it - b < kMergeTol;
    const bool near_prev = it != grid.begin() && b - *(it - 1) < kMergeTol;
    if (!near_next && !near_prev) stops.push_back(b);
  }
  std::sort(stops.begin(), stops.end());
  stops.erase(std::unique(stops.begin(), stops.end()), stops.end());

  double h = stepper.initial_step(grid.front(), y, grid.back() - grid.front());
  double t = grid.front();
  std::size_t next_grid = 1;
  for (double stop : stops) {
    if (stop <= t) continue;
    stepper.advance(y, t, stop, h);
    t = stop;
    if (next_grid < grid.size() && stop == grid[next_grid]) {
      // Re-Hermitize to keep round-off from accumulating in the anti-Hermitian part.
      y = 0.5 * (y + y.adjoint()).eval();
      record(stop);
      ++next_grid;
    }
  }
  traj.steps = stepper.steps;
  traj.rejected = stepper.rejected;
  return traj;
}

double boltzmann_ratio_for_excited_population(double eps_ini, int n_levels) {
  if (!(eps_ini >= 0) || !(eps_ini < 1)) throw std::invalid_argument("eps_ini must lie in [0, 1)");
  if (n_levels < 2) throw std::invalid_argument("need at least two levels");
  if (eps_ini == 0.0) return 0.0;
  auto p1 = [&](double r) {
    double z = 0.0;
    double w = 1.0;
    for (int k = 0; k < n_levels; ++k, w *= r) z += w;
    return r / z;
  };
  // p1 rises from 0 at r = 0 to its maximum 1/n_levels at r = 1.
  if (eps_ini >= p1(1.0)) throw std::invalid_argument("eps_ini too large for a thermal state");
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (p1(mid) < eps_ini ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double thermal_occupancy_for_init_error(double eps_ini, int n_levels) {
  const double r = boltzmann_ratio_for_excited_population(eps_ini, n_levels);
  return r / (1.0 - r);
}

Matrix initial_state(const EffectiveHamiltonianSpec& spec, double eps_ini, int n_magnon) {
  spec.validate();
  if (n_magnon < 0 || n_magnon >= spec.n_levels_magnon) {
    throw std::invalid_argument("initial magnon Fock state outside the truncation");
  }
  const double r = boltzmann_ratio_for_excited_population(eps_ini, spec.n_levels_qubit);
  Eigen::VectorXd w(spec.n_levels_qubit);
  double acc = 1.0;
  for (int k = 0; k < spec.n_levels_qubit; ++k, acc *= r) w(k) = acc;
  w /= w.sum();
  Matrix rho = Matrix::Zero(spec.dim(), spec.dim());
  for (int q = 0; q < spec.n_levels_qubit; ++q) {
    const int i = q * spec.n_levels_magnon + n_magnon;
    rho(i, i) = w(q);
  }
  return rho;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "time_ns,p_g,p_e,p_f,n_m\n";
  os << std::setprecision(10);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto& p = traj.qubit_populations[i];
    const double pf = p.size() > 2 ? p.tail(p.size() - 2).sum() : 0.0;
    os << traj.times[i] * 1e9 << ',' << p(0) << ',' << p(1) << ',' << pf << ','
       << traj.n_m[i] << '\n';
  }
}

RamseyResult ramsey_evolve(const Matrix& rho0, const LindbladSystem& system,
                           const RamseySpec& ramsey, const IntegratorOptions& options) {
  if (!(ramsey.pulse_duration > 0)) throw std::invalid_argument("ramsey: pulse duration must be positive");
  if (ramsey.taus.empty()) throw std::invalid_argument("ramsey: no free-evolution times");
  const double tp = ramsey.pulse_duration;
  const double half = pulses::kWindowHalfWidth * tp;
  for (std::size_t i = 0; i < ramsey.taus.size(); ++i) {
    if (ramsey.taus[i] < 2.0 * tp - 1e-15) {
      throw std::invalid_argument("ramsey: tau must be at least two pulse durations");
    }
    if (i > 0 && !(ramsey.taus[i] > ramsey.taus[i - 1])) {
      throw std::invalid_argument("ramsey: taus must be strictly increasing");
    }
  }

  const double c1 = ramsey.settle_time + half;
  const pulses::GaussianPulse first{ramsey.half_pi_amplitude, c1, tp};
  const double omega_d = ramsey.omega_d;

  // Shared trajectory: first pulse plus free evolution, sampled where each
  // second pulse window opens.
  Drives base;
  base.omega_s = [first](double t) { return first(t); };
  base.omega_d = [omega_d](double) { return omega_d; };
  base.breakpoints = {first.window_start(), first.window_end()};
  std::vector<double> grid{0.0};
  for (double tau : ramsey.taus) grid.push_back(c1 + tp + tau - half);
  IntegratorOptions opt = options;
  opt.store_states = true;
  const Trajectory shared = evolve(rho0, system, base, grid, opt);

  RamseyResult out;
  out.taus = ramsey.taus;
  for (std::size_t k = 0; k < ramsey.taus.size(); ++k) {
    const pulses::GaussianPulse second{ramsey.half_pi_amplitude, c1 + tp + ramsey.taus[k], tp};
    Drives d;
    d.omega_s = [second](double t) { return second(t); };
    d.omega_d = base.omega_d;
    const double seg[] = {second.window_start(), second.window_end()};
    IntegratorOptions o2 = options;
    o2.store_states = false;
    const Trajectory tr = evolve(shared.states[k + 1], system, d, seg, o2);
    out.p_e.push_back(tr.qubit_populations.back()(1));
  }
  return out;
}

}  // namespace mqnd::dynamics
