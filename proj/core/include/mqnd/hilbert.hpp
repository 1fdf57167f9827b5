#pragma once

// Truncated Fock-space operators for the qubit / Kittel-mode / cavity hybrid
// and the quantities extracted from them: dressed couplings, dispersive
// shifts and the Purcell bound on the qubit lifetime.

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mqnd::hilbert {

using Complex = std::complex<double>;
using OperatorMatrix = Eigen::MatrixXcd;

/// Error raised when a dressed state cannot be matched to a bare product
/// state (overlap below one half) or a sector is not closed under H.
class LabelingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One TE10p mode of the 3D cavity. All rates and couplings in rad/s.
struct CavityModeParams {
  int index_p = 1;
  double omega_p = 0.0;
  double kappa_total = 0.0;
  double kappa_in = 0.0;
  double kappa_out = 0.0;
  double kappa_int = 0.0;
  double g_qp = 0.0;  // electric-dipole coupling to the qubit
  double g_mp = 0.0;  // magnetic-dipole coupling to the Kittel mode

  void validate() const;
};

struct QubitParams {
  double omega_q = 0.0;   // bare |g>-|e> frequency
  double alpha = 0.0;     // bare anharmonicity (negative for a transmon)
  double alpha0 = 0.0;    // dressed anharmonicity
  double omega_q0 = 0.0;  // dressed frequency with the magnon in vacuum
  double T1 = 0.0;
  double T2_star = 0.0;
  double n_th_q = 0.0;
  double eps_ini = 0.0;

  double gamma_1() const { return 1.0 / T1; }
  double gamma_q() const { return 2.0 / T2_star; }
  double gamma_phi() const { return 0.5 * (gamma_q() - gamma_1()); }

  void validate() const;
};

struct MagnonParams {
  double omega_m = 0.0;    // bare Kittel-mode frequency
  double omega_m_g = 0.0;  // dressed, qubit in |g>
  double gamma_m = 0.0;
  double n_th_m = 0.0;
  double T1_m = 0.0;
  double omega_m0 = 0.0;  // coil calibration offset, omega_m(I) = omega_m0 + xi * I
  double xi = 0.0;        // rad/s per ampere

  double omega_at_current(double current_amps) const {
    return omega_m0 + xi * current_amps;
  }
  void validate() const;
};

struct HilbertConfig {
  int n_levels_qubit = 3;
  int n_levels_magnon = 8;
  int n_levels_cavity = 3;
  int n_cavity_modes_included = 4;

  void validate() const;
};

/// Device constants of the measured hybrid system (cavity modes, bare qubit,
/// Kittel mode). Values in square brackets in the device tables are
/// simulated, not measured; they are carried the same way here.
std::vector<CavityModeParams> default_cavity_modes();
QubitParams default_qubit();
MagnonParams default_magnon();

// --- Elementary operators -------------------------------------------------

OperatorMatrix annihilation(int n_levels);
OperatorMatrix number_operator(int n_levels);
OperatorMatrix identity(int n_levels);

/// Lift `op` acting on subsystem `slot` to the tensor product with
/// truncations `dims` (slot 0 is the most significant index).
OperatorMatrix embed(const OperatorMatrix& op, std::size_t slot,
                     std::span<const int> dims);

/// Row-major multi-index <-> flat index helpers for product bases.
std::size_t flat_index(std::span<const int> levels, std::span<const int> dims);
std::vector<int> multi_index(std::size_t flat, std::span<const int> dims);

// --- Full hybrid Hamiltonian ----------------------------------------------

/// Subsystem ordering used by build_total_hamiltonian: qubit, Kittel mode,
/// then the retained cavity modes in the order given.
std::vector<int> total_dims(const HilbertConfig& cfg);

/// H_c + H_q + H_m + H_{q-c} + H_{m-c} (rotating-wave couplings), in rad/s.
OperatorMatrix build_total_hamiltonian(const QubitParams& qubit,
                                       const MagnonParams& magnon,
                                       std::span<const CavityModeParams> cavities,
                                       const HilbertConfig& cfg);

/// Eigen-decomposition of the block of H with a fixed total excitation number.
struct SectorSpectrum {
  std::vector<std::size_t> basis;  // flat indices of the bare states spanning the sector
  Eigen::VectorXd energies;        // ascending
  Eigen::MatrixXcd vectors;        // columns, expressed in `basis`
};

SectorSpectrum diagonalize_sector(const OperatorMatrix& H, std::span<const int> dims,
                                  int excitations);

/// Dressed energy of the eigenstate with maximal overlap onto the bare state
/// `levels`. Ties (within 1e-9) go to the lowest eigen index. Throws
/// LabelingError when the best overlap is below 0.5.
double dressed_energy(const SectorSpectrum& sector, std::span<const int> levels,
                      std::span<const int> dims);

// --- Couplings and shifts ------------------------------------------------

/// Cavity-mediated qubit-magnon coupling, sum_p g_qp g_mp / (omega_qm - omega_p).
double coupling_perturbative(std::span<const CavityModeParams> cavities, double omega_qm);

/// Half the minimal splitting of the two dressed single-excitation states
/// that carry the qubit and Kittel-mode character, with the bare Kittel
/// frequency swept through the qubit frequency.
struct NumericCoupling {
  double g_qm = 0.0;
  double omega_m_at_min = 0.0;  // bare Kittel frequency at the minimal splitting
};
NumericCoupling coupling_numeric(const QubitParams& qubit, const MagnonParams& magnon,
                                 std::span<const CavityModeParams> cavities,
                                 const HilbertConfig& cfg);

/// alpha0 g^2 / (Delta (Delta + alpha0)); throws std::domain_error at the poles.
double dispersive_shift_perturbative(double g_qm, double alpha0, double delta_qm);

/// Dressed frequencies around the dispersive operating point.
struct DispersiveAnalysis {
  double chi_qm = 0.0;     // [E(e,1) - E(g,1) - E(e,0) + E(g,0)] / 2
  double omega_q0 = 0.0;   // E(e,0) - E(g,0)
  double omega_q1 = 0.0;   // E(e,1) - E(g,1)
  double omega_m_g = 0.0;  // E(g,1) - E(g,0)
  double alpha0 = 0.0;     // E(f,0) - 2 E(e,0) + E(g,0)
};
DispersiveAnalysis dispersive_analysis(const OperatorMatrix& H, std::span<const int> dims);
double dispersive_shift_numeric(const OperatorMatrix& H, std::span<const int> dims);

/// Bare Kittel frequency whose dressed value (qubit in |g>) equals
/// `omega_m_g_target`. Used to place the model at a measured operating point.
double bare_magnon_for_dressed(const QubitParams& qubit, const MagnonParams& magnon,
                               std::span<const CavityModeParams> cavities,
                               const HilbertConfig& cfg, double omega_m_g_target);

/// Purcell-limited T1 in seconds; std::nullopt when every coupling vanishes.
std::optional<double> purcell_limit(const QubitParams& qubit,
                                    std::span<const CavityModeParams> cavities);

}  // namespace mqnd::hilbert
