#pragma once

// Run configuration: strict JSON with every physics field defaulted to the
// measured device. Frequencies and rates are written in Hz (cyclic) and
// converted to rad/s on load; times are in seconds.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "mqnd/detection.hpp"
#include "mqnd/hilbert.hpp"

namespace mqnd::config {

/// Malformed JSON, unknown key, wrong type or failed validation.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProtocolConfig {
  std::string scheme = "at_least_one";  // or "exactly_one"
  double tau_pi = 200e-9;
  std::vector<double> tau_pi_list{40e-9, 80e-9, 120e-9, 160e-9, 200e-9, 240e-9, 320e-9, 480e-9};
  std::vector<double> delta_s_list;  // rad/s, generalized scheme scan
  int n_points = 8;
  double nbar_max = 1.5;
};

struct ReadoutConfig {
  bool derive = false;  // derive (eps_g, eps_e, delta_t_r) from the bounds
  double calibration_tau_pi = 12e-9;
  double scan_step = 1e-9;
  double scan_cap = 200e-9;
};

struct SpectrumConfig {
  double nbar = 0.53;            // steady-state magnon population
  double delta_s = 0.0;          // rad/s, omega_q^0 - omega_s of the pi/2 pulses
  double pulse_duration = 20e-9;
  double settle_time = 1e-6;
  double tau_step = 10e-9;
  double tau_max = 3e-6;
  std::size_t pad_to = 4096;
  double exclusion_half_width = 0.0;  // rad/s, e-f window in magnon spectroscopy
};

struct RunConfig {
  detection::SystemParams system;
  std::vector<hilbert::CavityModeParams> cavities;
  hilbert::HilbertConfig hilbert;
  ProtocolConfig protocol;
  ReadoutConfig readout;
  SpectrumConfig spectrum;
  std::string output_dir = "out";
  std::uint64_t seed = 0;
  unsigned jobs = 0;  // 0: logical cores
  bool emit_trajectory = false;

  /// Validates every embedded type; throws ConfigError naming the problem.
  void validate() const;
};

RunConfig default_config();

RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& path);

/// Canonical JSON (Hz units, sorted keys). Parsing it yields the same config.
std::string to_json(const RunConfig& cfg);

/// FNV-1a 64-bit hash of the canonical JSON, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

}  // namespace mqnd::config
