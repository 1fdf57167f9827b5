// magnon-qnd: command line front end for the single-magnon detector model.
//
//   magnon-qnd <subcommand> [--config path] [--jobs N] [--out dir] [--seed S]
//                           [--emit-trajectory]
//
// Every run writes metrics.json and sweep.csv (plus trajectory.csv on
// request) into the output directory. Failures exit nonzero and print a JSON
// error record on stderr.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mqnd/config.hpp"
#include "mqnd/csv.hpp"
#include "mqnd/detection.hpp"
#include "mqnd/dynamics.hpp"
#include "mqnd/hilbert.hpp"
#include "mqnd/parallel.hpp"
#include "mqnd/readout.hpp"
#include "mqnd/regression.hpp"
#include "mqnd/spectra.hpp"
#include "mqnd/units.hpp"
#include "mqnd/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mqnd;

namespace {

struct Context {
  config::RunConfig cfg;
  Provenance provenance;
  fs::path out;
  unsigned jobs = 1;
};

json metrics_json(const detection::DetectorMetrics& m) {
  return {{"scheme", m.scheme},
          {"click", detection::to_string(m.click)},
          {"tau_pi_s", m.tau_pi},
          {"dark_count", m.dark_count},
          {"efficiency", m.efficiency},
          {"inefficiency", 1.0 - m.efficiency},
          {"intercept", m.intercept},
          {"efficiency_stderr", m.efficiency_stderr},
          {"intercept_stderr", m.intercept_stderr},
          {"rms_residual", m.rms_residual}};
}

json readout_json(const readout::ReadoutModel& r) {
  return {{"eps_g", r.eps_g}, {"eps_e", r.eps_e}, {"delta_t_r_s", r.delta_t_r},
          {"fidelity", r.fidelity()}};
}

json invariants_json(const dynamics::StateDiagnostics& d) {
  return {{"max_trace_error", d.trace_error},
          {"max_hermiticity_error", d.hermiticity_error},
          {"min_eigenvalue", d.min_eigenvalue}};
}

void write_metrics(const Context& ctx, const std::string& subcommand, json body) {
  body["provenance"] = {{"config_hash", ctx.provenance.config_hash},
                        {"tool_version", ctx.provenance.tool_version},
                        {"seed", ctx.provenance.seed}};
  body["subcommand"] = subcommand;
  std::ofstream os(ctx.out / "metrics.json");
  os << body.dump(2) << '\n';
}

void write_table(const Context& ctx, const std::string& name,
                 const std::vector<std::string>& header,
                 const std::vector<std::vector<double>>& rows) {
  std::ofstream os(ctx.out / name);
  write_csv(os, ctx.provenance, header, rows);
}

void write_trajectory(const Context& ctx, const dynamics::Trajectory& traj) {
  std::ofstream os(ctx.out / "trajectory.csv");
  write_provenance(os, ctx.provenance);
  dynamics::write_trajectory_csv(os, traj);
}

detection::DetectionScheme scheme_of(const config::RunConfig& cfg) {
  return cfg.protocol.scheme == "exactly_one" ? detection::exactly_one_scheme(cfg.system)
                                              : detection::at_least_one_scheme();
}

detection::SweepOptions sweep_options(const Context& ctx) {
  detection::SweepOptions o;
  o.n_points = ctx.cfg.protocol.n_points;
  o.nbar_max = ctx.cfg.protocol.nbar_max;
  o.jobs = ctx.jobs;
  return o;
}

// System parameters, with the readout model replaced by the derived bounds
// when the config asks for it.
detection::SystemParams system_for_run(const Context& ctx, json& body) {
  if (!ctx.cfg.readout.derive) return ctx.cfg.system;
  const auto b = detection::readout_bounds(ctx.cfg.system, ctx.cfg.readout.calibration_tau_pi,
                                           ctx.cfg.readout.scan_step, ctx.cfg.readout.scan_cap);
  body["derived_readout"] = readout_json(b.midrange);
  return detection::with_derived_readout(ctx.cfg.system, b);
}

// --- subcommands ------------------------------------------------------------

int run_detect(const Context& ctx) {
  json body;
  const auto s = system_for_run(ctx, body);
  const auto scheme = scheme_of(ctx.cfg);
  const auto model = detection::FitModel::at_least_one;
  const auto sweep = detection::detection_sweep(s, scheme, ctx.cfg.protocol.tau_pi, sweep_options(ctx));
  const auto m = detection::fit_metrics(sweep, model);

  std::vector<std::vector<double>> rows;
  for (const auto& p : sweep.points) {
    rows.push_back({to_hz(p.omega_d), p.nbar, p.p_click, p.p_g, p.p_tilde_g});
  }
  write_table(ctx, "sweep.csv", {"omega_d_over_2pi_hz", "nbar", "p_click", "p_g", "p_tilde_g"}, rows);

  // Single-shot estimate of the dark count from the thresholded signal.
  const double p_click0 = sweep.points.front().p_click;
  const auto shots = readout::sample_shots(p_click0, 100000, readout::VoltageModel{}, ctx.cfg.seed);

  body["metrics"] = metrics_json(m);
  body["omega_s_over_2pi_hz"] = to_hz(sweep.omega_s);
  body["delta_s_over_2pi_hz"] = to_hz(sweep.delta_s);
  body["invariants"] = invariants_json(sweep.worst);
  body["shots"] = {{"n", shots.shots.size()},
                   {"p_click_thresholded", shots.p_e_thresholded},
                   {"p_click_averaged", shots.p_e_average}};
  write_metrics(ctx, "detect", body);

  if (ctx.cfg.emit_trajectory) {
    const auto& last = sweep.points.back();
    const auto run = detection::simulate_protocol(s, sweep.delta_s, sweep.tau_pi, sweep.omega_s,
                                                  last.omega_d);
    write_trajectory(ctx, run.trajectory);
  }
  std::cout << "dark count " << m.dark_count << ", efficiency " << m.efficiency << '\n';
  return 0;
}

int run_sweep_tau(const Context& ctx) {
  json body;
  const auto s = system_for_run(ctx, body);
  const auto pts = detection::sweep_tau(s, ctx.cfg.protocol.tau_pi_list, scheme_of(ctx.cfg),
                                        sweep_options(ctx));
  std::vector<std::vector<double>> rows;
  json arr = json::array();
  bool monotone = true;
  std::size_t best = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& m = pts[i].metrics;
    rows.push_back({pts[i].tau_pi * 1e9, m.dark_count, m.efficiency, 1.0 - m.efficiency, m.intercept});
    arr.push_back(metrics_json(m));
    if (i > 0 && !(m.dark_count > pts[i - 1].metrics.dark_count)) monotone = false;
    if (m.efficiency > pts[best].metrics.efficiency) best = i;
  }
  write_table(ctx, "sweep.csv", {"tau_pi_ns", "dark_count", "efficiency", "inefficiency", "intercept"},
              rows);
  body["points"] = arr;
  body["dark_count_monotone"] = monotone;
  body["tau_pi_max_efficiency_s"] = pts[best].tau_pi;
  write_metrics(ctx, "sweep-tau", body);
  for (const auto& p : pts) {
    std::cout << "tau_pi " << p.tau_pi * 1e9 << " ns: dark " << p.metrics.dark_count
              << ", efficiency " << p.metrics.efficiency << '\n';
  }
  return 0;
}

int run_budget(const Context& ctx) {
  json body;
  const auto s = system_for_run(ctx, body);
  const auto b = detection::error_budget(s, ctx.cfg.protocol.tau_pi, sweep_options(ctx));
  body["tau_pi_s"] = b.tau_pi;
  body["full"] = metrics_json(b.full);
  body["no_initialization"] = metrics_json(b.no_initialization);
  body["no_decoherence"] = metrics_json(b.no_decoherence);
  body["no_readout"] = metrics_json(b.no_readout);
  body["entanglement_only"] = metrics_json(b.entanglement_only);
  json rows = json::array();
  std::vector<std::vector<double>> table;
  for (std::size_t i = 0; i < b.rows.size(); ++i) {
    const auto& r = b.rows[i];
    rows.push_back({{"source", r.source},
                    {"delta_dark_count", r.delta_dark_count},
                    {"delta_inefficiency", r.delta_inefficiency}});
    table.push_back({static_cast<double>(i), r.delta_dark_count, r.delta_inefficiency});
    std::cout << r.source << ": dark " << r.delta_dark_count << ", inefficiency "
              << r.delta_inefficiency << '\n';
  }
  body["rows"] = rows;
  write_table(ctx, "sweep.csv", {"row", "delta_dark_count", "delta_inefficiency"}, table);
  write_metrics(ctx, "budget", body);
  return 0;
}

int run_readout_bounds(const Context& ctx) {
  const auto& s = ctx.cfg.system;
  const auto b = detection::readout_bounds(s, ctx.cfg.readout.calibration_tau_pi,
                                           ctx.cfg.readout.scan_step, ctx.cfg.readout.scan_cap);
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < b.delays.size(); ++k) {
    const auto [eg, ee] = readout::solve_readout_errors_raw(s.measured, b.eps_pi[k]);
    rows.push_back({b.delays[k] * 1e9, b.eps_pi[k], eg, ee, 1.0 - eg - ee});
    if (b.delays[k] >= b.max_delay) break;
  }
  write_table(ctx, "sweep.csv", {"delta_t_r_ns", "eps_pi", "eps_g", "eps_e", "fidelity"}, rows);

  const auto sens = detection::readout_delay_sensitivity(s, b, ctx.cfg.protocol.tau_pi,
                                                         sweep_options(ctx));
  json body;
  body["at_min_delay"] = readout_json(b.at_min_delay);
  body["at_max_delay"] = readout_json(b.at_max_delay);
  body["midrange"] = readout_json(b.midrange);
  body["max_delay_s"] = b.max_delay;
  body["crossing_delay_s"] = b.crossing_delay;
  body["fidelity_min"] = b.fidelity_min();
  body["fidelity_max"] = b.fidelity_max();
  body["sensitivity"] = {{"tau_pi_s", ctx.cfg.protocol.tau_pi},
                         {"at_min_delay", metrics_json(sens.at_min_delay)},
                         {"at_max_delay", metrics_json(sens.at_max_delay)},
                         {"dark_count_spread", sens.dark_count_spread},
                         {"efficiency_spread", sens.efficiency_spread}};
  write_metrics(ctx, "readout-bounds", body);
  std::cout << "F_r min " << b.fidelity_min() << ", max " << b.fidelity_max() << " at "
            << b.max_delay * 1e9 << " ns, midrange " << b.midrange.fidelity() << '\n';
  return 0;
}

// Peaks (local maxima above `floor`) of a sampled curve, largest first.
std::vector<std::size_t> peaks(const std::vector<double>& y, double floor) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 1; i + 1 < y.size(); ++i) {
    if (y[i] > y[i - 1] && y[i] >= y[i + 1] && y[i] > floor) idx.push_back(i);
  }
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return y[a] > y[b]; });
  return idx;
}

int run_spectrum(const Context& ctx) {
  const auto& c = ctx.cfg;
  const auto& s = c.system;
  const auto& sp = c.spectrum;
  const double omega_d = spectra::drive_for_population(sp.nbar, s.magnon.gamma_m, s.delta_d);

  // Ramsey interferometry under a continuous magnon drive.
  const auto spec = s.hamiltonian(sp.delta_s);
  const dynamics::LindbladSystem system(spec, dynamics::standard_channels(s.rates(), spec));
  dynamics::RamseySpec r;
  r.pulse_duration = sp.pulse_duration;
  r.half_pi_amplitude = 0.5 * pulses::analytic_pi_amplitude(sp.pulse_duration);
  r.omega_d = omega_d;
  r.settle_time = sp.settle_time;
  for (double tau = 2.0 * sp.pulse_duration; tau <= sp.tau_max + 1e-15; tau += sp.tau_step) {
    r.taus.push_back(tau);
  }
  const auto ramsey = dynamics::ramsey_evolve(dynamics::initial_state(spec, s.qubit.eps_ini),
                                              system, r, s.integrator);
  // Phase accumulates over the centre-to-centre pulse separation.
  std::vector<double> separation;
  for (double tau : ramsey.taus) separation.push_back(tau + sp.pulse_duration);
  const auto fft = spectra::normalized_fft_spectrum(separation, ramsey.p_e, true, sp.pad_to);

  // Closed-form prediction in the same frame. The frame frequency of the
  // qubit is delta_s, which the FFT reports at |delta_s|; evaluate the model
  // at -2 pi f when delta_s < 0.
  spectra::GambettaSpectrumParams g;
  g.gamma_q = s.qubit.gamma_q();
  g.gamma_m = s.magnon.gamma_m;
  g.chi_qm = s.chi_qm;
  g.delta_d = s.delta_d;
  g.omega_ref = sp.delta_s;
  g.omega_d = omega_d;
  const double sign = sp.delta_s < 0 ? -1.0 : 1.0;
  std::vector<double> omegas;
  for (double f : fft.frequency_hz) omegas.push_back(sign * hz(f));
  auto model = spectra::gambetta_spectrum(omegas, g);
  const double mmax = *std::max_element(model.begin(), model.end());
  for (auto& v : model) v /= mmax;

  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < omegas.size(); ++i) {
    rows.push_back({fft.frequency_hz[i], fft.value[i], model[i]});
  }
  write_table(ctx, "sweep.csv", {"frequency_hz", "S_fft", "S_model"}, rows);
  if (c.emit_trajectory) {
    std::vector<std::vector<double>> tr;
    for (std::size_t i = 0; i < ramsey.taus.size(); ++i) tr.push_back({ramsey.taus[i] * 1e9, ramsey.p_e[i]});
    write_table(ctx, "trajectory.csv", {"tau_ns", "p_e"}, tr);
  }

  json body;
  const double bin = fft.frequency_hz.size() > 1 ? fft.frequency_hz[1] : 0.0;
  auto two_peaks = [&](const std::vector<double>& y) {
    const auto p = peaks(y, 0.05);
    json j = json::array();
    for (std::size_t k = 0; k < std::min<std::size_t>(2, p.size()); ++k) j.push_back(fft.frequency_hz[p[k]]);
    return j;
  };
  body["nbar"] = sp.nbar;
  body["frequency_bin_hz"] = bin;
  body["peaks_fft_hz"] = two_peaks(fft.value);
  body["peaks_model_hz"] = two_peaks(model);
  body["expected_separation_hz"] = std::abs(to_hz(2.0 * s.chi_qm + s.delta_d));

  // Fit of the simulated spectrum, gamma_q and delta_d held fixed.
  try {
    spectra::SpectrumFitGuess guess{g.omega_ref, g.gamma_m, g.chi_qm, sp.nbar, 0.0, 0.0};
    std::vector<double> w, v;
    for (std::size_t i = 0; i < omegas.size(); ++i) {
      w.push_back(omegas[i]);
      v.push_back(fft.value[i]);
    }
    const auto fit = spectra::fit_spectrum(w, v, g, guess);
    body["fit"] = {{"converged", fit.fit.converged},
                   {"gamma_m_over_2pi_hz", to_hz(fit.params.gamma_m)},
                   {"chi_qm_over_2pi_hz", to_hz(fit.params.chi_qm)},
                   {"nbar", fit.nbar},
                   {"rms_residual", fit.fit.rms}};
  } catch (const std::exception& e) {
    body["fit"] = {{"converged", false}, {"error", e.what()}};
  }
  write_metrics(ctx, "spectrum", body);
  std::cout << "FFT peaks " << body["peaks_fft_hz"].dump() << " Hz, model peaks "
            << body["peaks_model_hz"].dump() << " Hz\n";
  return 0;
}

int run_calibrate(const Context& ctx) {
  const auto& s = ctx.cfg.system;
  const auto& taus = ctx.cfg.protocol.tau_pi_list;
  struct Cal {
    double amplitude;
    double p_tilde_g;
  };
  const auto cals = parallel_map<Cal>(taus.size(), ctx.jobs, [&](std::size_t i) {
    const double a = detection::calibrate_qubit_amplitude(s, taus[i]);
    return Cal{a, detection::simulate_protocol(s, 0.0, taus[i], a, 0.0).p_tilde_g};
  });
  std::vector<std::vector<double>> rows;
  json arr = json::array();
  for (std::size_t i = 0; i < taus.size(); ++i) {
    const double ratio = cals[i].amplitude / pulses::analytic_pi_amplitude(taus[i]);
    rows.push_back({taus[i] * 1e9, to_hz(cals[i].amplitude), ratio, cals[i].p_tilde_g});
    arr.push_back({{"tau_pi_s", taus[i]},
                   {"amplitude_over_2pi_hz", to_hz(cals[i].amplitude)},
                   {"ratio_to_analytic", ratio},
                   {"p_tilde_g", cals[i].p_tilde_g}});
    std::cout << "tau_pi " << taus[i] * 1e9 << " ns: amplitude/2pi " << to_hz(cals[i].amplitude)
              << " Hz (" << ratio << " x analytic)\n";
  }
  write_table(ctx, "sweep.csv", {"tau_pi_ns", "amplitude_over_2pi_hz", "ratio_to_analytic", "p_tilde_g"},
              rows);

  // Device couplings from the full hybrid Hamiltonian.
  json body;
  body["points"] = arr;
  const auto& cav = ctx.cfg.cavities;
  body["coupling"] = {{"g_qm_perturbative_over_2pi_hz", to_hz(hilbert::coupling_perturbative(cav, s.qubit.omega_q))}};
  if (const auto t1 = hilbert::purcell_limit(s.qubit, cav)) body["coupling"]["purcell_limit_s"] = *t1;
  write_metrics(ctx, "calibrate", body);
  return 0;
}

void print_chain(std::ostream& os, const std::exception& e, json& chain) {
  chain.push_back(e.what());
  try {
    std::rethrow_if_nested(e);
  } catch (const std::exception& inner) {
    print_chain(os, inner, chain);
  }
}

int fail(const std::string& subcommand, const std::exception& e) {
  json chain = json::array();
  print_chain(std::cerr, e, chain);
  std::string point;
  try {
    throw;
  } catch (const detection::GridPointError& g) {
    point = g.point;
  } catch (...) {
  }
  json err = {{"error", {{"subcommand", subcommand}, {"message", e.what()}, {"chain", chain}}}};
  if (!point.empty()) err["error"]["grid_point"] = point;
  std::cerr << err.dump() << '\n';
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Single-magnon detector simulation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  std::string config_path;
  std::optional<unsigned> jobs;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  bool emit_trajectory = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run configuration (defaults if omitted)");
    sub->add_option("--jobs", jobs, "worker threads (default: logical cores)");
    sub->add_option("--out", out, "output directory");
    sub->add_option("--seed", seed, "random seed");
    sub->add_flag("--emit-trajectory", emit_trajectory, "also write trajectory.csv");
  };
  const std::vector<std::pair<std::string, std::string>> commands{
      {"detect", "detector metrics for one pulse duration"},
      {"sweep-tau", "detector metrics versus pulse duration"},
      {"budget", "error budget of the detector"},
      {"spectrum", "Ramsey spectrum under a continuous magnon drive"},
      {"readout-bounds", "bounds on the readout fidelity"},
      {"calibrate", "pi-pulse amplitude calibration and device couplings"},
  };
  for (const auto& [name, help] : commands) add_common(app.add_subcommand(name, help));

  std::string result_path, baseline_path;
  double abs_tol = 1e-9, rel_tol = 1e-9;
  auto* cmp = app.add_subcommand("compare", "compare a metrics.json against a baseline");
  cmp->add_option("result", result_path)->required();
  cmp->add_option("baseline", baseline_path)->required();
  cmp->add_option("--abs", abs_tol, "absolute tolerance");
  cmp->add_option("--rel", rel_tol, "relative tolerance");

  CLI11_PARSE(app, argc, argv);
  const std::string sub = app.get_subcommands().front()->get_name();

  try {
    if (sub == "compare") {
      RegressionTolerances tol;
      tol.fallback = {abs_tol, rel_tol};
      const auto report = regression_compare(result_path, baseline_path, tol);
      for (const auto& v : report.violations) std::cout << "FAIL " << v << '\n';
      std::cout << (report.passed ? "PASS" : "FAIL") << ' ' << report.fields_checked
                << " fields checked\n";
      return report.passed ? 0 : 2;
    }

    Context ctx;
    ctx.cfg = config_path.empty() ? config::default_config() : config::load_config(config_path);
    if (jobs) ctx.cfg.jobs = *jobs;
    if (out) ctx.cfg.output_dir = *out;
    if (seed) ctx.cfg.seed = *seed;
    if (emit_trajectory) ctx.cfg.emit_trajectory = true;
    ctx.cfg.validate();
    ctx.jobs = ctx.cfg.jobs == 0 ? default_jobs() : ctx.cfg.jobs;
    ctx.out = ctx.cfg.output_dir;
    fs::create_directories(ctx.out);
    ctx.provenance = {config::config_hash(ctx.cfg), kVersion, ctx.cfg.seed};

    if (sub == "detect") return run_detect(ctx);
    if (sub == "sweep-tau") return run_sweep_tau(ctx);
    if (sub == "budget") return run_budget(ctx);
    if (sub == "spectrum") return run_spectrum(ctx);
    if (sub == "readout-bounds") return run_readout_bounds(ctx);
    if (sub == "calibrate") return run_calibrate(ctx);
  } catch (const std::exception& e) {
    return fail(sub, e);
  }
  return 1;
}
