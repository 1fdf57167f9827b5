#include "mqnd/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"
#include "mqnd/units.hpp"

namespace mqnd::config {

using nlohmann::json;

namespace {

// Reads the keys of one JSON object, remembering which were consumed so that
// leftovers can be rejected.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + " must be an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json* take(const std::string& key) {
    used_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void number(const std::string& key, double& out, double factor = 1.0) {
    if (const auto* v = take(key)) {
      if (!v->is_number()) throw ConfigError(where(key) + " must be a number");
      out = v->get<double>() * factor;
    }
  }
  // null stands for infinity (e.g. no decoherence).
  void number_or_inf(const std::string& key, double& out) {
    if (const auto* v = take(key)) {
      if (v->is_null()) {
        out = std::numeric_limits<double>::infinity();
      } else if (v->is_number()) {
        out = v->get<double>();
      } else {
        throw ConfigError(where(key) + " must be a number or null");
      }
    }
  }
  void frequency(const std::string& key, double& out) { number(key, out, kTwoPi); }

  template <class Int>
  void integer(const std::string& key, Int& out) {
    if (const auto* v = take(key)) {
      if (!v->is_number_integer()) throw ConfigError(where(key) + " must be an integer");
      if constexpr (std::is_unsigned_v<Int>) {
        if (v->get<long long>() < 0) throw ConfigError(where(key) + " must be non-negative");
      }
      out = v->get<Int>();
    }
  }
  void boolean(const std::string& key, bool& out) {
    if (const auto* v = take(key)) {
      if (!v->is_boolean()) throw ConfigError(where(key) + " must be true or false");
      out = v->get<bool>();
    }
  }
  void string(const std::string& key, std::string& out) {
    if (const auto* v = take(key)) {
      if (!v->is_string()) throw ConfigError(where(key) + " must be a string");
      out = v->get<std::string>();
    }
  }
  void numbers(const std::string& key, std::vector<double>& out, double factor = 1.0) {
    if (const auto* v = take(key)) {
      if (!v->is_array()) throw ConfigError(where(key) + " must be an array of numbers");
      out.clear();
      for (const auto& e : *v) {
        if (!e.is_number()) throw ConfigError(where(key) + " must be an array of numbers");
        out.push_back(e.get<double>() * factor);
      }
    }
  }

  std::string where(const std::string& key = {}) const {
    const std::string p = key.empty() ? path_ : (path_.empty() ? key : path_ + "." + key);
    return "'" + (p.empty() ? std::string("<root>") : p) + "'";
  }
  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!used_.count(key)) throw ConfigError("unknown key " + where(key));
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

template <class Fn>
void with_section(Section& parent, const std::string& key, Fn&& fn) {
  if (const auto* v = parent.take(key)) {
    Section s(*v, parent.child(key));
    fn(s);
    s.finish();
  }
}

void read_cavity(Section& s, hilbert::CavityModeParams& c) {
  s.integer("index", c.index_p);
  s.frequency("omega_hz", c.omega_p);
  s.frequency("kappa_total_hz", c.kappa_total);
  s.frequency("kappa_in_hz", c.kappa_in);
  s.frequency("kappa_out_hz", c.kappa_out);
  s.frequency("kappa_int_hz", c.kappa_int);
  s.frequency("g_q_hz", c.g_qp);
  s.frequency("g_m_hz", c.g_mp);
}

json inf_or(double v) { return std::isinf(v) ? json(nullptr) : json(v); }

std::string line_context(const std::string& text, std::size_t byte) {
  std::size_t line = 1, start = 0;
  const std::size_t end = std::min(byte, text.size());
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      start = i + 1;
    }
  }
  auto stop = text.find('\n', start);
  if (stop == std::string::npos) stop = text.size();
  return "line " + std::to_string(line) + ", column " + std::to_string(end - start + 1) +
         ": " + text.substr(start, stop - start);
}

template <class Fn>
void guarded(Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

RunConfig default_config() {
  RunConfig c;
  c.system = detection::SystemParams::defaults();
  c.cavities = hilbert::default_cavity_modes();
  c.hilbert.n_levels_qubit = c.system.n_levels_qubit;
  c.hilbert.n_levels_magnon = c.system.n_levels_magnon;
  c.spectrum.delta_s = mhz(-4.0);
  c.spectrum.exclusion_half_width = mhz(3.0);
  return c;
}

void RunConfig::validate() const {
  guarded([&] {
    system.validate();
    for (const auto& c : cavities) c.validate();
    hilbert.validate();
  });
  if (protocol.scheme != "at_least_one" && protocol.scheme != "exactly_one") {
    throw ConfigError("protocol.scheme must be \"at_least_one\" or \"exactly_one\"");
  }
  if (!(protocol.tau_pi > 0)) throw ConfigError("tau_pi must be positive");
  if (protocol.tau_pi_list.empty()) throw ConfigError("tau_pi_list must not be empty");
  for (double t : protocol.tau_pi_list) {
    if (!(t > 0)) throw ConfigError("tau_pi_list entries must be positive");
  }
  for (double d : protocol.delta_s_list) {
    if (!std::isfinite(d)) throw ConfigError("delta_s_list entries must be finite");
  }
  if (protocol.n_points < 3) throw ConfigError("n_points must be at least 3");
  if (!(protocol.nbar_max > 0)) throw ConfigError("nbar_max must be positive");
  if (!(readout.calibration_tau_pi > 0)) throw ConfigError("calibration_tau_pi must be positive");
  if (!(readout.scan_step > 0)) throw ConfigError("scan_step must be positive");
  if (!(readout.scan_cap >= readout.scan_step)) throw ConfigError("scan_cap must be at least scan_step");
  if (!(spectrum.nbar >= 0)) throw ConfigError("spectrum nbar must be non-negative");
  if (!std::isfinite(spectrum.delta_s)) throw ConfigError("spectrum delta_s must be finite");
  if (!(spectrum.pulse_duration > 0)) throw ConfigError("pulse_duration must be positive");
  if (!(spectrum.settle_time >= 0)) throw ConfigError("settle_time must be non-negative");
  if (!(spectrum.tau_step > 0)) throw ConfigError("tau_step must be positive");
  if (!(spectrum.tau_max > 2.0 * spectrum.pulse_duration + spectrum.tau_step)) {
    throw ConfigError("tau_max must exceed two pulse durations plus one step");
  }
  if (!(spectrum.exclusion_half_width >= 0)) throw ConfigError("exclusion_half_width must be non-negative");
  if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("JSON parse error at " + line_context(text, e.byte) + " (" + e.what() + ")");
  }
  RunConfig c = default_config();
  auto& s = c.system;
  Section top(root, "");

  with_section(top, "qubit", [&](Section& q) {
    q.frequency("omega_q_hz", s.qubit.omega_q);
    q.frequency("alpha_hz", s.qubit.alpha);
    q.frequency("alpha0_hz", s.qubit.alpha0);
    q.frequency("omega_q0_hz", s.qubit.omega_q0);
    q.number_or_inf("T1_s", s.qubit.T1);
    q.number_or_inf("T2_star_s", s.qubit.T2_star);
    q.number("eps_ini", s.qubit.eps_ini);
    q.number("n_th_q", s.qubit.n_th_q);
    q.boolean("thermal_from_eps_ini", s.thermal_from_eps_ini);
  });
  s.measured.eps_ini = s.qubit.eps_ini;

  with_section(top, "magnon", [&](Section& m) {
    m.frequency("omega_m_hz", s.magnon.omega_m);
    m.frequency("omega_m_g_hz", s.magnon.omega_m_g);
    m.frequency("gamma_m_hz", s.magnon.gamma_m);
    m.number("n_th_m", s.magnon.n_th_m);
    m.number("T1_m_s", s.magnon.T1_m);
    m.frequency("omega_m0_hz", s.magnon.omega_m0);
    m.frequency("xi_hz_per_A", s.magnon.xi);
  });

  with_section(top, "coupling", [&](Section& k) {
    k.frequency("chi_qm_hz", s.chi_qm);
    k.frequency("delta_d_hz", s.delta_d);
  });

  if (const auto* arr = top.take("cavities")) {
    if (!arr->is_array()) throw ConfigError("'cavities' must be an array");
    c.cavities.clear();
    for (std::size_t i = 0; i < arr->size(); ++i) {
      hilbert::CavityModeParams mode;
      mode.index_p = static_cast<int>(i) + 1;
      Section cs((*arr)[i], "cavities[" + std::to_string(i) + "]");
      read_cavity(cs, mode);
      cs.finish();
      c.cavities.push_back(mode);
    }
  }

  with_section(top, "truncation", [&](Section& t) {
    t.integer("qubit_levels", s.n_levels_qubit);
    t.integer("magnon_levels", s.n_levels_magnon);
    t.integer("cavity_levels", c.hilbert.n_levels_cavity);
    t.integer("cavity_modes", c.hilbert.n_cavity_modes_included);
  });
  c.hilbert.n_levels_qubit = s.n_levels_qubit;
  c.hilbert.n_levels_magnon = s.n_levels_magnon;

  with_section(top, "readout", [&](Section& r) {
    r.number("eps_g", s.readout.eps_g);
    r.number("eps_e", s.readout.eps_e);
    r.number("delta_t_r_s", s.readout.delta_t_r);
    r.boolean("derive", c.readout.derive);
    r.number("calibration_tau_pi_s", c.readout.calibration_tau_pi);
    r.number("scan_step_s", c.readout.scan_step);
    r.number("scan_cap_s", c.readout.scan_cap);
    r.number("p_e_given_g_prep", s.measured.p_e_given_g_prep);
    r.number("p_e_given_e_prep", s.measured.p_e_given_e_prep);
  });
  s.timing.delta_t_r = s.readout.delta_t_r;

  with_section(top, "timing", [&](Section& t) {
    t.number("tau_d_s", s.timing.tau_d);
    t.number("readout_gap_s", s.timing.readout_gap);
  });

  with_section(top, "integrator", [&](Section& i) {
    i.number("atol", s.integrator.atol);
    i.number("rtol", s.integrator.rtol);
    i.integer("max_steps", s.integrator.max_steps);
    i.boolean("check_invariants", s.integrator.check_invariants);
    i.number("sample_step_s", s.sample_step);
  });

  with_section(top, "protocol", [&](Section& p) {
    p.string("scheme", c.protocol.scheme);
    p.number("tau_pi_s", c.protocol.tau_pi);
    p.numbers("tau_pi_list_s", c.protocol.tau_pi_list);
    p.numbers("delta_s_list_hz", c.protocol.delta_s_list, kTwoPi);
    p.integer("n_points", c.protocol.n_points);
    p.number("nbar_max", c.protocol.nbar_max);
  });

  with_section(top, "spectrum", [&](Section& p) {
    p.number("nbar", c.spectrum.nbar);
    p.frequency("delta_s_hz", c.spectrum.delta_s);
    p.number("pulse_duration_s", c.spectrum.pulse_duration);
    p.number("settle_time_s", c.spectrum.settle_time);
    p.number("tau_step_s", c.spectrum.tau_step);
    p.number("tau_max_s", c.spectrum.tau_max);
    p.integer("pad_to", c.spectrum.pad_to);
    p.frequency("exclusion_half_width_hz", c.spectrum.exclusion_half_width);
  });

  top.string("output_dir", c.output_dir);
  top.integer("seed", c.seed);
  top.integer("jobs", c.jobs);
  top.boolean("emit_trajectory", c.emit_trajectory);
  top.finish();

  guarded([&] {
    if (!(s.integrator.atol > 0) || !(s.integrator.rtol > 0)) {
      throw ConfigError("integrator tolerances must be positive");
    }
  });
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_json(const RunConfig& c) {
  const auto& s = c.system;
  auto f = [](double omega) { return omega / kTwoPi; };
  json j;
  j["qubit"] = {{"omega_q_hz", f(s.qubit.omega_q)},
                {"alpha_hz", f(s.qubit.alpha)},
                {"alpha0_hz", f(s.qubit.alpha0)},
                {"omega_q0_hz", f(s.qubit.omega_q0)},
                {"T1_s", inf_or(s.qubit.T1)},
                {"T2_star_s", inf_or(s.qubit.T2_star)},
                {"eps_ini", s.qubit.eps_ini},
                {"n_th_q", s.qubit.n_th_q},
                {"thermal_from_eps_ini", s.thermal_from_eps_ini}};
  j["magnon"] = {{"omega_m_hz", f(s.magnon.omega_m)},
                 {"omega_m_g_hz", f(s.magnon.omega_m_g)},
                 {"gamma_m_hz", f(s.magnon.gamma_m)},
                 {"n_th_m", s.magnon.n_th_m},
                 {"T1_m_s", s.magnon.T1_m},
                 {"omega_m0_hz", f(s.magnon.omega_m0)},
                 {"xi_hz_per_A", f(s.magnon.xi)}};
  j["coupling"] = {{"chi_qm_hz", f(s.chi_qm)}, {"delta_d_hz", f(s.delta_d)}};
  j["cavities"] = json::array();
  for (const auto& m : c.cavities) {
    j["cavities"].push_back({{"index", m.index_p},
                             {"omega_hz", f(m.omega_p)},
                             {"kappa_total_hz", f(m.kappa_total)},
                             {"kappa_in_hz", f(m.kappa_in)},
                             {"kappa_out_hz", f(m.kappa_out)},
                             {"kappa_int_hz", f(m.kappa_int)},
                             {"g_q_hz", f(m.g_qp)},
                             {"g_m_hz", f(m.g_mp)}});
  }
  j["truncation"] = {{"qubit_levels", s.n_levels_qubit},
                     {"magnon_levels", s.n_levels_magnon},
                     {"cavity_levels", c.hilbert.n_levels_cavity},
                     {"cavity_modes", c.hilbert.n_cavity_modes_included}};
  j["readout"] = {{"eps_g", s.readout.eps_g},
                  {"eps_e", s.readout.eps_e},
                  {"delta_t_r_s", s.readout.delta_t_r},
                  {"derive", c.readout.derive},
                  {"calibration_tau_pi_s", c.readout.calibration_tau_pi},
                  {"scan_step_s", c.readout.scan_step},
                  {"scan_cap_s", c.readout.scan_cap},
                  {"p_e_given_g_prep", s.measured.p_e_given_g_prep},
                  {"p_e_given_e_prep", s.measured.p_e_given_e_prep}};
  j["timing"] = {{"tau_d_s", s.timing.tau_d}, {"readout_gap_s", s.timing.readout_gap}};
  j["integrator"] = {{"atol", s.integrator.atol},
                     {"rtol", s.integrator.rtol},
                     {"max_steps", s.integrator.max_steps},
                     {"check_invariants", s.integrator.check_invariants},
                     {"sample_step_s", s.sample_step}};
  json delta_s = json::array();
  for (double d : c.protocol.delta_s_list) delta_s.push_back(f(d));
  j["protocol"] = {{"scheme", c.protocol.scheme},
                   {"tau_pi_s", c.protocol.tau_pi},
                   {"tau_pi_list_s", c.protocol.tau_pi_list},
                   {"delta_s_list_hz", delta_s},
                   {"n_points", c.protocol.n_points},
                   {"nbar_max", c.protocol.nbar_max}};
  j["spectrum"] = {{"nbar", c.spectrum.nbar},
                   {"delta_s_hz", f(c.spectrum.delta_s)},
                   {"pulse_duration_s", c.spectrum.pulse_duration},
                   {"settle_time_s", c.spectrum.settle_time},
                   {"tau_step_s", c.spectrum.tau_step},
                   {"tau_max_s", c.spectrum.tau_max},
                   {"pad_to", c.spectrum.pad_to},
                   {"exclusion_half_width_hz", f(c.spectrum.exclusion_half_width)}};
  j["output_dir"] = c.output_dir;
  j["seed"] = c.seed;
  j["jobs"] = c.jobs;
  j["emit_trajectory"] = c.emit_trajectory;
  return j.dump(2);
}

std::string config_hash(const RunConfig& cfg) {
  // Run-environment fields do not change the physics payload.
  RunConfig c = cfg;
  c.output_dir = "out";
  c.jobs = 0;
  c.emit_trajectory = false;
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_json(c)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace mqnd::config
