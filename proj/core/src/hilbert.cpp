#include "mqnd/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "mqnd/units.hpp"

namespace mqnd::hilbert {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

bool finite_all(std::initializer_list<double> values) {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

std::size_t product(std::span<const int> dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                         [](std::size_t a, int d) { return a * static_cast<std::size_t>(d); });
}

int excitation_count(std::size_t flat, std::span<const int> dims) {
  int total = 0;
  for (std::size_t k = dims.size(); k-- > 0;) {
    const auto d = static_cast<std::size_t>(dims[k]);
    total += static_cast<int>(flat % d);
    flat /= d;
  }
  return total;
}

// Hamiltonians restricted to levels <= n + 1 reproduce the n-excitation
// sectors exactly, so sector-only computations run on this reduced config.
HilbertConfig sector_config(const HilbertConfig& cfg, int max_excitations) {
  HilbertConfig reduced = cfg;
  const int levels = max_excitations + 1;
  reduced.n_levels_qubit = std::min(cfg.n_levels_qubit, levels);
  reduced.n_levels_magnon = std::min(cfg.n_levels_magnon, levels);
  reduced.n_levels_cavity = std::min(cfg.n_levels_cavity, levels);
  return reduced;
}

}  // namespace

void CavityModeParams::validate() const {
  require(finite_all({omega_p, kappa_total, kappa_in, kappa_out, kappa_int, g_qp, g_mp}),
          "cavity mode parameters must be finite");
  require(kappa_total >= 0 && kappa_in >= 0 && kappa_out >= 0 && kappa_int >= 0,
          "cavity rates must be non-negative");
  const double tol = 0.02 * kappa_total + 1e-9;
  require(kappa_total + tol >= kappa_in + kappa_out,
          "kappa_total must be at least kappa_in + kappa_out");
  if (kappa_int > 0) {
    require(std::abs(kappa_total - kappa_in - kappa_out - kappa_int) <= tol,
            "kappa_int must equal kappa_total - kappa_in - kappa_out");
  }
}

void QubitParams::validate() const {
  require(finite_all({omega_q, alpha, alpha0, omega_q0, n_th_q, eps_ini}),
          "qubit parameters must be finite");
  // T1 = T2* = infinity switches decoherence off.
  require(T1 > 0, "T1 must be positive");
  require(T2_star > 0, "T2_star must be positive");
  require(T2_star <= 2.0 * T1 * (1.0 + 1e-9), "T2_star must not exceed 2*T1");
  require(n_th_q >= 0, "n_th_q must be non-negative");
  require(eps_ini >= 0 && eps_ini < 1, "eps_ini must lie in [0, 1)");
}

void MagnonParams::validate() const {
  require(finite_all({omega_m, omega_m_g, gamma_m, n_th_m, T1_m, omega_m0, xi}),
          "magnon parameters must be finite");
  require(gamma_m > 0, "gamma_m must be positive");
  require(n_th_m >= 0, "n_th_m must be non-negative");
}

void HilbertConfig::validate() const {
  require(n_levels_qubit >= 2, "n_levels_qubit must be at least 2");
  require(n_levels_magnon >= 2, "n_levels_magnon must be at least 2");
  require(n_levels_cavity >= 2, "n_levels_cavity must be at least 2");
  require(n_cavity_modes_included >= 0, "n_cavity_modes_included must be non-negative");
}

std::vector<CavityModeParams> default_cavity_modes() {
  // TE101..TE104. Mode 4 has no measured linewidths.
  return {
      {1, ghz(6.98985), mhz(1.26), mhz(0.27), mhz(0.13), mhz(0.85), mhz(83.2), mhz(-15.3)},
      {2, ghz(8.41164), mhz(2.06), mhz(0.70), mhz(0.51), mhz(0.85), mhz(128.8), mhz(22.85)},
      {3, ghz(10.43852), mhz(3.64), mhz(0.27), mhz(1.27), mhz(2.10), mhz(135.1), mhz(-21.5)},
      {4, ghz(12.9202), 0.0, 0.0, 0.0, 0.0, mhz(116.4), mhz(12.7)},
  };
}

QubitParams default_qubit() {
  QubitParams q;
  q.omega_q = ghz(7.96563);
  q.alpha = mhz(-144.0);
  q.alpha0 = mhz(-123.0);
  q.omega_q0 = ghz(7.92813);
  q.T1 = us(0.797);
  q.T2_star = us(0.970);
  q.n_th_q = 0.0;
  q.eps_ini = 0.04;
  return q;
}

MagnonParams default_magnon() {
  MagnonParams m;
  m.omega_m0 = ghz(8.148);
  m.xi = mhz(48.2) / 1e-3;
  m.omega_m = m.omega_at_current(-7.92e-3);
  m.omega_m_g = ghz(7.78861);
  m.gamma_m = mhz(1.61);
  m.n_th_m = 0.0;
  m.T1_m = ns(82.0);
  return m;
}

OperatorMatrix annihilation(int n_levels) {
  require(n_levels >= 2, "annihilation: dimension must be at least 2");
  OperatorMatrix a = OperatorMatrix::Zero(n_levels, n_levels);
  for (int k = 1; k < n_levels; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  return a;
}

OperatorMatrix number_operator(int n_levels) {
  require(n_levels >= 1, "number_operator: dimension must be positive");
  OperatorMatrix n = OperatorMatrix::Zero(n_levels, n_levels);
  for (int k = 0; k < n_levels; ++k) n(k, k) = static_cast<double>(k);
  return n;
}

OperatorMatrix identity(int n_levels) {
  require(n_levels >= 1, "identity: dimension must be positive");
  return OperatorMatrix::Identity(n_levels, n_levels);
}

std::size_t flat_index(std::span<const int> levels, std::span<const int> dims) {
  require(levels.size() == dims.size(), "flat_index: rank mismatch");
  std::size_t flat = 0;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    require(levels[k] >= 0 && levels[k] < dims[k], "flat_index: level out of range");
    flat = flat * static_cast<std::size_t>(dims[k]) + static_cast<std::size_t>(levels[k]);
  }
  return flat;
}

std::vector<int> multi_index(std::size_t flat, std::span<const int> dims) {
  std::vector<int> levels(dims.size());
  for (std::size_t k = dims.size(); k-- > 0;) {
    const auto d = static_cast<std::size_t>(dims[k]);
    levels[k] = static_cast<int>(flat % d);
    flat /= d;
  }
  return levels;
}

OperatorMatrix embed(const OperatorMatrix& op, std::size_t slot, std::span<const int> dims) {
  require(slot < dims.size(), "embed: slot out of range");
  require(op.rows() == op.cols(), "embed: operator must be square");
  require(op.rows() == dims[slot], "embed: operator dimension does not match dims[slot]");

  std::size_t inner = 1;
  for (std::size_t k = slot + 1; k < dims.size(); ++k) inner *= static_cast<std::size_t>(dims[k]);
  std::size_t outer = 1;
  for (std::size_t k = 0; k < slot; ++k) outer *= static_cast<std::size_t>(dims[k]);
  const auto d = static_cast<std::size_t>(dims[slot]);
  const std::size_t total = outer * d * inner;

  OperatorMatrix out = OperatorMatrix::Zero(static_cast<Eigen::Index>(total),
                                            static_cast<Eigen::Index>(total));
  for (Eigen::Index r = 0; r < op.rows(); ++r) {
    for (Eigen::Index c = 0; c < op.cols(); ++c) {
      const Complex v = op(r, c);
      if (v == Complex{}) continue;
      for (std::size_t o = 0; o < outer; ++o) {
        const std::size_t row0 = (o * d + static_cast<std::size_t>(r)) * inner;
        const std::size_t col0 = (o * d + static_cast<std::size_t>(c)) * inner;
        for (std::size_t i = 0; i < inner; ++i) {
          out(static_cast<Eigen::Index>(row0 + i), static_cast<Eigen::Index>(col0 + i)) = v;
        }
      }
    }
  }
  return out;
}

std::vector<int> total_dims(const HilbertConfig& cfg) {
  std::vector<int> dims{cfg.n_levels_qubit, cfg.n_levels_magnon};
  for (int p = 0; p < cfg.n_cavity_modes_included; ++p) dims.push_back(cfg.n_levels_cavity);
  return dims;
}

OperatorMatrix build_total_hamiltonian(const QubitParams& qubit, const MagnonParams& magnon,
                                       std::span<const CavityModeParams> cavities,
                                       const HilbertConfig& cfg) {
  cfg.validate();
  require(cfg.n_cavity_modes_included >= 1, "at least one cavity mode must be retained");
  require(static_cast<std::size_t>(cfg.n_cavity_modes_included) <= cavities.size(),
          "fewer cavity modes supplied than requested");
  require(finite_all({qubit.omega_q, qubit.alpha, magnon.omega_m}),
          "Hamiltonian parameters must be finite");
  for (int p = 0; p < cfg.n_cavity_modes_included; ++p) {
    const auto& mode = cavities[static_cast<std::size_t>(p)];
    require(finite_all({mode.omega_p, mode.g_qp, mode.g_mp}),
            "Hamiltonian parameters must be finite");
  }

  const auto dims = total_dims(cfg);
  const OperatorMatrix nb_local = number_operator(cfg.n_levels_qubit);
  const OperatorMatrix hq_local =
      (qubit.omega_q - 0.5 * qubit.alpha) * nb_local + 0.5 * qubit.alpha * nb_local * nb_local;

  OperatorMatrix H = embed(hq_local, 0, dims);
  H += magnon.omega_m * embed(number_operator(cfg.n_levels_magnon), 1, dims);

  const OperatorMatrix b = embed(annihilation(cfg.n_levels_qubit), 0, dims);
  const OperatorMatrix c = embed(annihilation(cfg.n_levels_magnon), 1, dims);
  const OperatorMatrix a_local = annihilation(cfg.n_levels_cavity);
  for (int p = 0; p < cfg.n_cavity_modes_included; ++p) {
    const auto& mode = cavities[static_cast<std::size_t>(p)];
    const auto slot = static_cast<std::size_t>(2 + p);
    const OperatorMatrix a = embed(a_local, slot, dims);
    H += mode.omega_p * (a.adjoint() * a);
    const OperatorMatrix ab = b.adjoint() * a;
    const OperatorMatrix ac = c.adjoint() * a;
    H += mode.g_qp * (ab + OperatorMatrix(ab.adjoint()));
    H += mode.g_mp * (ac + OperatorMatrix(ac.adjoint()));
  }
  return H;
}

SectorSpectrum diagonalize_sector(const OperatorMatrix& H, std::span<const int> dims,
                                  int excitations) {
  const std::size_t total = product(dims);
  require(static_cast<std::size_t>(H.rows()) == total && H.rows() == H.cols(),
          "diagonalize_sector: Hamiltonian does not match dims");

  std::vector<int> count(total);
  for (std::size_t i = 0; i < total; ++i) count[i] = excitation_count(i, dims);

  SectorSpectrum out;
  for (std::size_t i = 0; i < total; ++i) {
    if (count[i] == excitations) out.basis.push_back(i);
  }
  if (out.basis.empty()) {
    throw LabelingError("diagonalize_sector: empty excitation sector");
  }

  const double scale = std::max(H.cwiseAbs().maxCoeff(), 1.0);
  for (std::size_t i : out.basis) {
    for (std::size_t j = 0; j < total; ++j) {
      if (count[j] != excitations &&
          std::abs(H(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) > 1e-12 * scale) {
        throw LabelingError(
            "diagonalize_sector: excitation number is not conserved by the Hamiltonian");
      }
    }
  }

  const auto n = static_cast<Eigen::Index>(out.basis.size());
  Eigen::MatrixXcd block(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) {
      block(r, c) = H(static_cast<Eigen::Index>(out.basis[static_cast<std::size_t>(r)]),
                      static_cast<Eigen::Index>(out.basis[static_cast<std::size_t>(c)]));
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(block);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("diagonalize_sector: eigen decomposition failed");
  }
  out.energies = solver.eigenvalues();
  out.vectors = solver.eigenvectors();
  return out;
}

double dressed_energy(const SectorSpectrum& sector, std::span<const int> levels,
                      std::span<const int> dims) {
  const std::size_t target = flat_index(levels, dims);
  const auto it = std::find(sector.basis.begin(), sector.basis.end(), target);
  if (it == sector.basis.end()) {
    throw LabelingError("dressed_energy: bare state is not part of the sector");
  }
  const auto row = static_cast<Eigen::Index>(std::distance(sector.basis.begin(), it));

  Eigen::Index best = 0;
  double best_overlap = -1.0;
  for (Eigen::Index k = 0; k < sector.vectors.cols(); ++k) {
    const double overlap = std::norm(sector.vectors(row, k));
    if (overlap > best_overlap + 1e-9) {
      best_overlap = overlap;
      best = k;
    }
  }
  if (best_overlap < 0.5) {
    std::ostringstream msg;
    msg << "dressed_energy: ambiguous labeling, maximal overlap " << best_overlap;
    throw LabelingError(msg.str());
  }
  return sector.energies(best);
}

double coupling_perturbative(std::span<const CavityModeParams> cavities, double omega_qm) {
  double g = 0.0;
  for (const auto& mode : cavities) {
    const double detuning = omega_qm - mode.omega_p;
    if (detuning == 0.0) {
      throw std::domain_error("coupling_perturbative: resonance with cavity mode " +
                              std::to_string(mode.index_p));
    }
    g += mode.g_qp * mode.g_mp / detuning;
  }
  return g;
}

namespace {

// Splitting of the two single-excitation eigenstates with the largest
// combined qubit + Kittel-mode weight.
double hybrid_splitting(const QubitParams& qubit, const MagnonParams& magnon,
                        std::span<const CavityModeParams> cavities, const HilbertConfig& cfg) {
  const auto dims = total_dims(cfg);
  const OperatorMatrix H = build_total_hamiltonian(qubit, magnon, cavities, cfg);
  const SectorSpectrum sector = diagonalize_sector(H, dims, 1);

  std::vector<int> e_state(dims.size(), 0);
  e_state[0] = 1;
  std::vector<int> m_state(dims.size(), 0);
  m_state[1] = 1;
  const std::size_t ie = flat_index(e_state, dims);
  const std::size_t im = flat_index(m_state, dims);
  Eigen::Index row_e = -1;
  Eigen::Index row_m = -1;
  for (std::size_t r = 0; r < sector.basis.size(); ++r) {
    if (sector.basis[r] == ie) row_e = static_cast<Eigen::Index>(r);
    if (sector.basis[r] == im) row_m = static_cast<Eigen::Index>(r);
  }

  std::vector<std::pair<double, Eigen::Index>> weights;
  for (Eigen::Index k = 0; k < sector.vectors.cols(); ++k) {
    const double w = std::norm(sector.vectors(row_e, k)) + std::norm(sector.vectors(row_m, k));
    weights.emplace_back(w, k);
  }
  std::sort(weights.begin(), weights.end(), [](const auto& a, const auto& b) {
    return a.first > b.first || (a.first == b.first && a.second < b.second);
  });
  if (weights.size() < 2 || weights[1].first < 0.5) {
    throw LabelingError("coupling_numeric: hybridized qubit-magnon doublet not identifiable");
  }
  return std::abs(sector.energies(weights[0].second) - sector.energies(weights[1].second));
}

}  // namespace

NumericCoupling coupling_numeric(const QubitParams& qubit, const MagnonParams& magnon,
                                 std::span<const CavityModeParams> cavities,
                                 const HilbertConfig& cfg) {
  const HilbertConfig reduced = sector_config(cfg, 1);
  auto splitting = [&](double omega_m) {
    MagnonParams m = magnon;
    m.omega_m = omega_m;
    return hybrid_splitting(qubit, m, cavities, reduced);
  };

  // Golden-section search for the avoided-crossing minimum around the bare qubit.
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = qubit.omega_q - mhz(250.0);
  double hi = qubit.omega_q + mhz(250.0);
  double x1 = hi - invphi * (hi - lo);
  double x2 = lo + invphi * (hi - lo);
  double f1 = splitting(x1);
  double f2 = splitting(x2);
  while (hi - lo > khz(0.1)) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - invphi * (hi - lo);
      f1 = splitting(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + invphi * (hi - lo);
      f2 = splitting(x2);
    }
  }
  const double omega_min = 0.5 * (lo + hi);
  return {0.5 * splitting(omega_min), omega_min};
}

double dispersive_shift_perturbative(double g_qm, double alpha0, double delta_qm) {
  if (delta_qm == 0.0 || delta_qm + alpha0 == 0.0) {
    throw std::domain_error(
        "dispersive_shift_perturbative: pole at the straddling-regime boundary "
        "(delta_qm = 0 or delta_qm = -alpha0)");
  }
  return alpha0 * g_qm * g_qm / (delta_qm * (delta_qm + alpha0));
}

DispersiveAnalysis dispersive_analysis(const OperatorMatrix& H, std::span<const int> dims) {
  require(dims.size() >= 2, "dispersive_analysis: need qubit and magnon subsystems");
  require(dims[0] >= 3, "dispersive_analysis: qubit truncation must include |f>");
  const SectorSpectrum s0 = diagonalize_sector(H, dims, 0);
  const SectorSpectrum s1 = diagonalize_sector(H, dims, 1);
  const SectorSpectrum s2 = diagonalize_sector(H, dims, 2);

  auto state = [&](int q, int m) {
    std::vector<int> levels(dims.size(), 0);
    levels[0] = q;
    levels[1] = m;
    return levels;
  };
  const double e_g0 = dressed_energy(s0, state(0, 0), dims);
  const double e_e0 = dressed_energy(s1, state(1, 0), dims);
  const double e_g1 = dressed_energy(s1, state(0, 1), dims);
  const double e_e1 = dressed_energy(s2, state(1, 1), dims);
  const double e_f0 = dressed_energy(s2, state(2, 0), dims);

  DispersiveAnalysis out;
  out.omega_q0 = e_e0 - e_g0;
  out.omega_q1 = e_e1 - e_g1;
  out.omega_m_g = e_g1 - e_g0;
  out.chi_qm = 0.5 * (out.omega_q1 - out.omega_q0);
  out.alpha0 = e_f0 - 2.0 * e_e0 + e_g0;
  return out;
}

double dispersive_shift_numeric(const OperatorMatrix& H, std::span<const int> dims) {
  return dispersive_analysis(H, dims).chi_qm;
}

double bare_magnon_for_dressed(const QubitParams& qubit, const MagnonParams& magnon,
                               std::span<const CavityModeParams> cavities,
                               const HilbertConfig& cfg, double omega_m_g_target) {
  const HilbertConfig reduced = sector_config(cfg, 1);
  const auto dims = total_dims(reduced);
  auto dressed = [&](double omega_m) {
    MagnonParams m = magnon;
    m.omega_m = omega_m;
    const OperatorMatrix H = build_total_hamiltonian(qubit, m, cavities, reduced);
    std::vector<int> g0(dims.size(), 0);
    std::vector<int> g1(dims.size(), 0);
    g1[1] = 1;
    const double e0 = dressed_energy(diagonalize_sector(H, dims, 0), g0, dims);
    const double e1 = dressed_energy(diagonalize_sector(H, dims, 1), g1, dims);
    return e1 - e0 - omega_m_g_target;
  };
  // The dressing shift is a few tens of MHz at most away from avoided crossings.
  double lo = omega_m_g_target - mhz(60.0);
  double hi = omega_m_g_target + mhz(60.0);
  double flo = dressed(lo);
  double fhi = dressed(hi);
  if (flo * fhi > 0) {
    throw std::runtime_error("bare_magnon_for_dressed: target not bracketed");
  }
  for (int it = 0; it < 200 && hi - lo > hz(1e-3); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fmid = dressed(mid);
    if ((fmid < 0) == (flo < 0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::optional<double> purcell_limit(const QubitParams& qubit,
                                    std::span<const CavityModeParams> cavities) {
  double rate = 0.0;
  for (const auto& mode : cavities) {
    const double detuning = qubit.omega_q - mode.omega_p;
    if (detuning == 0.0) {
      throw std::domain_error("purcell_limit: qubit resonant with cavity mode " +
                              std::to_string(mode.index_p));
    }
    const double ratio = mode.g_qp / detuning;
    rate += mode.kappa_total * ratio * ratio;
  }
  if (rate <= 0.0) return std::nullopt;
  return 1.0 / rate;
}

}  // namespace mqnd::hilbert
