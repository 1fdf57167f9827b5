#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "mqnd/hilbert.hpp"
#include "mqnd/units.hpp"

using namespace mqnd;
using namespace mqnd::hilbert;

TEST(Operators, AnnihilationMatrixElements) {
  const auto a = annihilation(5);
  for (int n = 1; n < 5; ++n) EXPECT_DOUBLE_EQ(a.coeff(n - 1, n).real(), std::sqrt(n));
  const OperatorMatrix n_op = number_operator(5);
  const OperatorMatrix ada = a.adjoint() * a;
  EXPECT_LT((ada - n_op).norm(), 1e-12);
}

TEST(Operators, CommutatorIsIdentityBelowTruncation) {
  const auto a = annihilation(6);
  const OperatorMatrix c = a * a.adjoint() - a.adjoint() * a;
  for (int n = 0; n < 5; ++n) EXPECT_NEAR(c.coeff(n, n).real(), 1.0, 1e-12);
  EXPECT_NEAR(c.coeff(5, 5).real(), -5.0, 1e-12);  // truncation artefact
}

TEST(Operators, FlatIndexRoundTrip) {
  const std::vector<int> dims{3, 4, 2};
  for (std::size_t f = 0; f < 24; ++f) {
    const auto m = multi_index(f, dims);
    EXPECT_EQ(flat_index(m, dims), f);
  }
  const std::vector<int> levels{2, 1, 1};
  EXPECT_EQ(flat_index(levels, dims), 2u * 8 + 1 * 2 + 1);
}

TEST(Operators, EmbedMatchesKroneckerOrdering) {
  const std::vector<int> dims{2, 3};
  const OperatorMatrix a = annihilation(3);
  const OperatorMatrix lifted = embed(a, 1, dims);
  for (std::size_t r = 0; r < 6; ++r) {
    for (std::size_t c = 0; c < 6; ++c) {
      const auto mr = multi_index(r, dims);
      const auto mc = multi_index(c, dims);
      const std::complex<double> expect =
          mr[0] == mc[0] ? a.coeff(mr[1], mc[1]) : std::complex<double>(0.0);
      EXPECT_EQ(lifted.coeff(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)), expect);
    }
  }
}

TEST(Sectors, SectorEnergiesAreEigenvaluesOfTheFullHamiltonian) {
  HilbertConfig cfg;
  cfg.n_levels_magnon = 3;
  cfg.n_levels_cavity = 2;
  cfg.n_cavity_modes_included = 2;
  const auto cav = default_cavity_modes();
  const auto H = build_total_hamiltonian(default_qubit(), default_magnon(), cav, cfg);
  const Eigen::MatrixXcd dense = H;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(dense);
  const auto dims = total_dims(cfg);
  const auto sector = diagonalize_sector(H, dims, 1);
  for (Eigen::Index k = 0; k < sector.energies.size(); ++k) {
    const double e = sector.energies(k);
    double best = 1e300;
    for (Eigen::Index j = 0; j < es.eigenvalues().size(); ++j) {
      best = std::min(best, std::abs(es.eigenvalues()(j) - e));
    }
    EXPECT_LT(best, 1e-6 * std::abs(e));
  }
}

TEST(Couplings, PerturbativeCouplingAtBareQubitFrequency) {
  const auto cav = default_cavity_modes();
  const double g = coupling_perturbative(cav, default_qubit().omega_q);
  EXPECT_NEAR(std::abs(to_mhz(g)), 7.03, 0.05);
}

TEST(Couplings, NumericCouplingFromAvoidedCrossing) {
  HilbertConfig cfg;
  const auto nc = coupling_numeric(default_qubit(), default_magnon(), default_cavity_modes(), cfg);
  EXPECT_NEAR(to_mhz(nc.g_qm), 6.33, 0.3);
}

TEST(Couplings, PerturbativeDispersiveShiftFormulaAndPoles) {
  const double g = mhz(7.0), a = mhz(-123.0), d = mhz(140.0);
  EXPECT_DOUBLE_EQ(dispersive_shift_perturbative(g, a, d), a * g * g / (d * (d + a)));
  EXPECT_LT(dispersive_shift_perturbative(g, a, d), 0.0);
  EXPECT_THROW(dispersive_shift_perturbative(g, a, 0.0), std::domain_error);
  EXPECT_THROW(dispersive_shift_perturbative(g, a, -a), std::domain_error);
}

namespace {

DispersiveAnalysis operating_point(int magnon_levels) {
  HilbertConfig cfg;
  cfg.n_levels_magnon = magnon_levels;
  const auto q = default_qubit();
  auto m = default_magnon();
  const auto cav = default_cavity_modes();
  m.omega_m = bare_magnon_for_dressed(q, m, cav, cfg, m.omega_m_g);
  const auto H = build_total_hamiltonian(q, m, cav, cfg);
  return dispersive_analysis(H, total_dims(cfg));
}

}  // namespace

TEST(Couplings, NumericDispersiveShiftAtOperatingPoint) {
  const auto d = operating_point(3);
  EXPECT_NEAR(to_mhz(d.chi_qm), -1.49, 0.08);
  EXPECT_NEAR(to_hz(d.omega_m_g) / 1e9, 7.78861, 1e-6);
  EXPECT_NEAR(to_mhz(d.alpha0), -123.0, 2.0);
}

TEST(Couplings, DispersiveShiftConvergesWithTruncation) {
  const double a = operating_point(3).chi_qm;
  const double b = operating_point(4).chi_qm;
  EXPECT_LT(std::abs(a - b), khz(1.0));
}

TEST(Couplings, AmbiguousLabelingIsReported) {
  // Kittel mode placed on the |e,1> <-> |f,0> resonance.
  HilbertConfig cfg;
  cfg.n_levels_magnon = 3;
  cfg.n_levels_cavity = 2;
  auto m = default_magnon();
  m.omega_m = ghz(7.805);
  const auto H = build_total_hamiltonian(default_qubit(), m, default_cavity_modes(), cfg);
  EXPECT_THROW(dispersive_analysis(H, total_dims(cfg)), LabelingError);
}

TEST(Purcell, LimitOverTheMeasuredModes) {
  const auto t1 = purcell_limit(default_qubit(), default_cavity_modes());
  ASSERT_TRUE(t1.has_value());
  EXPECT_NEAR(*t1 * 1e6, 0.83, 0.083);
}

TEST(Purcell, NoCouplingGivesNoLimit) {
  auto cav = default_cavity_modes();
  for (auto& c : cav) c.g_qp = 0.0;
  EXPECT_FALSE(purcell_limit(default_qubit(), cav).has_value());
}

TEST(Validation, NegativeT1IsRejected) {
  auto q = default_qubit();
  q.T1 = -1.0;
  try {
    q.validate();
    FAIL() << "expected std::invalid_argument";
  } catch (const std::invalid_argument& e) {
    EXPECT_STREQ(e.what(), "T1 must be positive");
  }
}

TEST(Validation, CavityRatesMustAddUp) {
  auto c = default_cavity_modes()[1];
  c.kappa_in = c.kappa_total;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Operators, SmallLadders) {
  const Eigen::MatrixXcd a2 = annihilation(2);
  EXPECT_EQ(a2, (Eigen::MatrixXcd(2, 2) << 0, 1, 0, 0).finished());
  const Eigen::MatrixXcd a3 = annihilation(3);
  EXPECT_DOUBLE_EQ(a3(0, 1).real(), 1.0);
  EXPECT_DOUBLE_EQ(a3(1, 2).real(), std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(a3.cwiseAbs().sum(), 1.0 + std::sqrt(2.0));
}

TEST(Operators, EmbedSigmaZAndIdentity) {
  const std::vector<int> dims{2, 3};
  OperatorMatrix sz = OperatorMatrix::Zero(2, 2);
  sz(0, 0) = 1.0;
  sz(1, 1) = -1.0;
  const Eigen::MatrixXcd lifted = embed(sz, 0, dims);
  Eigen::MatrixXcd expect = Eigen::MatrixXcd::Zero(6, 6);
  expect.topLeftCorner(3, 3).setIdentity();
  expect.bottomRightCorner(3, 3) = -Eigen::MatrixXcd::Identity(3, 3);
  EXPECT_EQ(lifted, expect);
  const Eigen::MatrixXcd id = embed(identity(3), 1, dims);
  EXPECT_EQ(id, Eigen::MatrixXcd::Identity(6, 6));
  const std::vector<int> dims34{3, 4};
  const Eigen::MatrixXcd n = embed(number_operator(3), 0, dims34);
  EXPECT_DOUBLE_EQ(n.trace().real(), 12.0);
}

TEST(Sectors, DecoupledEnergiesAreBareLadderSums) {
  HilbertConfig cfg;
  cfg.n_levels_magnon = 3;
  cfg.n_levels_cavity = 2;
  cfg.n_cavity_modes_included = 1;
  auto q = default_qubit();
  auto m = default_magnon();
  auto cav = default_cavity_modes();
  cav.resize(1);
  cav[0].g_qp = cav[0].g_mp = 0.0;
  const auto H = build_total_hamiltonian(q, m, cav, cfg);
  const auto dims = total_dims(cfg);
  const Eigen::MatrixXcd dense = H;
  EXPECT_LT((dense - dense.adjoint()).norm(), 1e-12 * dense.norm());
  const auto sector = diagonalize_sector(H, dims, 2);
  std::vector<double> bare;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b + a <= 2 && b < 3; ++b) {
      const int c = 2 - a - b;
      if (c > 1) continue;
      bare.push_back(a * q.omega_q + 0.5 * q.alpha * a * (a - 1) + b * m.omega_m + c * cav[0].omega_p);
    }
  std::sort(bare.begin(), bare.end());
  ASSERT_EQ(static_cast<std::size_t>(sector.energies.size()), bare.size());
  for (std::size_t k = 0; k < bare.size(); ++k) EXPECT_NEAR(sector.energies(k), bare[k], 1e-6 * bare[k]);
}

TEST(Sectors, ResonantJaynesCummingsDoubletSplitsByTwoG) {
  HilbertConfig cfg;
  cfg.n_levels_qubit = 2;
  cfg.n_levels_magnon = 2;
  cfg.n_levels_cavity = 3;
  cfg.n_cavity_modes_included = 1;
  auto q = default_qubit();
  auto m = default_magnon();
  auto cav = default_cavity_modes();
  cav.resize(1);
  cav[0].omega_p = q.omega_q;
  cav[0].g_qp = mhz(20.0);
  cav[0].g_mp = 0.0;
  m.omega_m = q.omega_q + ghz(1.0);  // far away
  const auto s = diagonalize_sector(build_total_hamiltonian(q, m, cav, cfg), total_dims(cfg), 1);
  EXPECT_NEAR(s.energies(1) - s.energies(0), 2.0 * mhz(20.0), 1.0);
}

TEST(Couplings, PerturbativeSumIsLinearInEachTerm) {
  CavityModeParams c;
  c.omega_p = ghz(8.0);
  c.g_qp = mhz(100.0);
  c.g_mp = mhz(100.0);
  const std::vector<CavityModeParams> one{c};
  EXPECT_NEAR(coupling_perturbative(one, ghz(7.5)), c.g_qp * c.g_qp / (ghz(7.5) - ghz(8.0)), 1e-6);
  auto cav = default_cavity_modes();
  const double base = coupling_perturbative(cav, ghz(7.95));
  const double term = cav[1].g_qp * cav[1].g_mp / (ghz(7.95) - cav[1].omega_p);
  cav[1].g_mp = -cav[1].g_mp;
  EXPECT_NEAR(coupling_perturbative(cav, ghz(7.95)), base - 2.0 * term, 1e-6 * std::abs(base));
}

TEST(Couplings, NumericCouplingAgreesWithPerturbativeTo15Percent) {
  HilbertConfig cfg;
  cfg.n_levels_magnon = 3;
  const auto q = default_qubit();
  const auto nc = coupling_numeric(q, default_magnon(), default_cavity_modes(), cfg);
  const double gp = std::abs(coupling_perturbative(default_cavity_modes(), q.omega_q));
  EXPECT_NEAR(std::abs(nc.g_qm) / gp, 1.0, 0.15);
}

TEST(Couplings, DecoupledMagnonHasNoSplittingOrShift) {
  HilbertConfig cfg;
  cfg.n_levels_magnon = 3;
  cfg.n_levels_cavity = 2;
  auto cav = default_cavity_modes();
  for (auto& c : cav) c.g_mp = 0.0;
  const auto q = default_qubit();
  const auto m = default_magnon();
  EXPECT_NEAR(coupling_numeric(q, m, cav, cfg).g_qm, 0.0, khz(1.0));
  const auto H = build_total_hamiltonian(q, m, cav, cfg);
  EXPECT_NEAR(dispersive_shift_numeric(H, total_dims(cfg)), 0.0, 1.0);
}

TEST(Couplings, PerturbativeShiftLimits) {
  const double g = mhz(7.13), d = mhz(132.0);
  EXPECT_EQ(dispersive_shift_perturbative(g, 0.0, d), 0.0);
  EXPECT_NEAR(dispersive_shift_perturbative(g, mhz(-123.0), 1e6 * d), 0.0, 1e-3);
  // Same order of magnitude and sign as the measured -1.91 MHz.
  const double chi = to_mhz(dispersive_shift_perturbative(g, mhz(-123.0), d));
  EXPECT_LT(chi, 0.0);
  EXPECT_GT(std::abs(chi), 0.5);
  EXPECT_LT(std::abs(chi), 20.0);
}

TEST(Purcell, DoublingTheLinewidthHalvesTheLimit) {
  auto cav = default_cavity_modes();
  cav.resize(1);
  const auto q = default_qubit();
  const double t1 = *purcell_limit(q, cav);
  cav[0].kappa_total *= 2.0;
  cav[0].kappa_int = cav[0].kappa_total - cav[0].kappa_in - cav[0].kappa_out;
  EXPECT_NEAR(*purcell_limit(q, cav), 0.5 * t1, 1e-9 * t1);
}
