#pragma once

// Classical readout-error model: correction of ideal probabilities, bounds on
// the errors from measurable quantities, and single-shot sampling.

#include <complex>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

namespace mqnd::readout {

/// Inputs that admit no readout errors in [0, 1].
class InconsistentReadoutError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ReadoutModel {
  double eps_g = 0.0;  // P(report e | qubit in g)
  double eps_e = 0.0;  // P(report g | qubit in e)
  double delta_t_r = 0.0;

  double fidelity() const { return 1.0 - eps_g - eps_e; }
  void validate() const;
};

struct MeasuredProbabilities {
  double p_e_given_g_prep = 0.0802;
  double p_e_given_e_prep = 0.8409;
  double eps_ini = 0.04;

  double visibility() const { return p_e_given_e_prep - p_e_given_g_prep; }
  void validate() const;
};

/// p_g = (1 - eps_g) p~_g + eps_e (1 - p~_g).
double apply_readout_correction(double p_tilde_g, const ReadoutModel& model);

/// Forward model: (p_e^{|g>}, p_e^{|e>}) for given errors.
std::pair<double, double> predicted_probabilities(double eps_g, double eps_e, double eps_ini,
                                                  double eps_pi);

/// Unchecked solution of the 2x2 system; may fall outside [0, 1].
std::pair<double, double> solve_readout_errors_raw(const MeasuredProbabilities& measured,
                                                   double eps_pi);

/// Readout errors reproducing the measured probabilities for a control
/// error eps_pi. Throws InconsistentReadoutError outside [0, 1].
ReadoutModel solve_readout_errors(const MeasuredProbabilities& measured, double eps_pi,
                                  double delta_t_r = 0.0);

struct ReadoutBounds {
  ReadoutModel at_min_delay;  // instantaneous readout, lowest fidelity
  ReadoutModel at_max_delay;  // one error reaches zero, highest fidelity
  ReadoutModel midrange;
  double max_delay = 0.0;       // first scanned delay with an error <= 0
  double crossing_delay = 0.0;  // interpolated zero crossing
  std::vector<double> delays;  // scanned delays
  std::vector<double> eps_pi;  // control error at each scanned delay

  double fidelity_min() const { return at_min_delay.fidelity(); }
  double fidelity_max() const { return at_max_delay.fidelity(); }
};

/// Scan delays 0, step, 2 step, ... up to `cap`; `eps_pi_at` returns the
/// control error for each requested delay. The maximal delay is the first
/// grid delay at which either error is <= 0; the model there is evaluated at
/// the interpolated zero crossing. The midrange delay is half the crossing
/// delay, rounded to the scan grid. A control error that does not vary with
/// the delay gives coinciding bounds at zero delay; otherwise a scan without a
/// zero crossing throws.
ReadoutBounds bound_readout_fidelity(
    const std::function<std::vector<double>(std::span<const double>)>& eps_pi_at,
    const MeasuredProbabilities& measured, double step = 1e-9, double cap = 200e-9);

// --- Single shots ---------------------------------------------------------

struct VoltageModel {
  std::complex<double> v_g{0.0, 0.0};
  std::complex<double> v_e{0.074, 0.0};
  double sigma = 1.8e-3;  // isotropic Gaussian noise per quadrature (V)
};

struct ShotRecord {
  std::complex<double> v;
  double delta_v = 0.0;
  bool excited = false;  // delta_v > threshold
};

struct ShotSet {
  std::vector<ShotRecord> shots;
  double threshold = 0.0;       // delta V_e / 2
  double p_e_average = 0.0;     // averaged calibrated signal
  double p_e_thresholded = 0.0;  // fraction of shots assigned to e
};

/// Rotation angle aligning V_e - V_g with the in-phase axis.
double rotation_angle(const VoltageModel& model);
/// Re[R(theta)(v - V_g)].
double corrected_signal(std::complex<double> v, const VoltageModel& model);

ShotSet sample_shots(double p_e, std::size_t n_shots, const VoltageModel& model,
                     std::uint64_t seed);

/// Probability that one shot lands on the wrong side of the mid-range threshold.
double misassignment_probability(const VoltageModel& model);

/// CSV with columns re_V, im_V, dV, state.
void write_shots_csv(std::ostream& os, const ShotSet& set);

}  // namespace mqnd::readout
