// Hot paths of a detection sweep: the Lindblad generator, one protocol run
// and the closed-form spectrum.

#include <benchmark/benchmark.h>

#include <vector>

#include "mqnd/detection.hpp"
#include "mqnd/dynamics.hpp"
#include "mqnd/spectra.hpp"
#include "mqnd/units.hpp"

using namespace mqnd;

namespace {

void BM_LindbladRhs(benchmark::State& state) {
  auto s = detection::SystemParams::defaults();
  s.n_levels_magnon = static_cast<int>(state.range(0));
  const auto spec = s.hamiltonian(0.0);
  const dynamics::LindbladSystem sys(spec, dynamics::standard_channels(s.rates(), spec));
  const dynamics::Matrix rho = dynamics::initial_state(spec, s.qubit.eps_ini);
  dynamics::Matrix out;
  for (auto _ : state) {
    sys.rhs(rho, mhz(1.0), mhz(0.5), out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_LindbladRhs)->Arg(4)->Arg(8)->Arg(12);

void BM_ProtocolRun(benchmark::State& state) {
  const auto s = detection::SystemParams::defaults();
  const double tau = static_cast<double>(state.range(0)) * 1e-9;
  const double amp = pulses::analytic_pi_amplitude(tau);
  for (auto _ : state) {
    benchmark::DoNotOptimize(detection::simulate_protocol(s, 0.0, tau, amp, 1.0 / s.timing.tau_d).p_tilde_g);
  }
}
BENCHMARK(BM_ProtocolRun)->Arg(40)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_GambettaSpectrum(benchmark::State& state) {
  spectra::GambettaSpectrumParams p;
  p.gamma_q = 2.0 / 0.97e-6;
  p.gamma_m = mhz(1.61);
  p.chi_qm = mhz(-1.91);
  p.delta_d = mhz(-0.01);
  p.omega_d = spectra::drive_for_population(0.53, p.gamma_m, p.delta_d);
  std::vector<double> w(2048);
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = mhz(-15.0 + 20.0 * i / w.size());
  for (auto _ : state) benchmark::DoNotOptimize(spectra::gambetta_spectrum(w, p).data());
}
BENCHMARK(BM_GambettaSpectrum);

}  // namespace

BENCHMARK_MAIN();
