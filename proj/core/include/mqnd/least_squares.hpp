#pragma once

// Damped nonlinear least squares with finite-difference Jacobians.

#include <functional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace mqnd {

struct LeastSquaresOptions {
  int max_iterations = 200;
  double ftol = 1e-10;  // relative cost change
  double xtol = 1e-12;  // relative step, in scaled parameters
};

struct LeastSquaresResult {
  Eigen::VectorXd params;
  Eigen::VectorXd residuals;
  double cost = 0.0;  // 0.5 * |r|^2
  double rms = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  std::string status;
};

/// Raised when the iteration limit is reached; carries the last iterate.
class NonConvergenceError : public std::runtime_error {
 public:
  NonConvergenceError(const std::string& what, LeastSquaresResult last)
      : std::runtime_error(what), last(std::move(last)) {}
  LeastSquaresResult last;
};

using ResidualFunction = std::function<void(const Eigen::VectorXd& p, Eigen::VectorXd& r)>;

/// Minimizes |r(p)|^2 starting at p0. `scale` gives the typical magnitude of
/// each parameter; the solver works on p / scale so that parameters of very
/// different units are differenced sensibly. Does not throw on
/// non-convergence; check `converged`.
LeastSquaresResult least_squares(const ResidualFunction& residual, int n_residuals,
                                 const Eigen::VectorXd& p0, const Eigen::VectorXd& scale,
                                 const LeastSquaresOptions& options = {});

/// As least_squares, but throws NonConvergenceError when not converged.
LeastSquaresResult least_squares_checked(const ResidualFunction& residual, int n_residuals,
                                         const Eigen::VectorXd& p0, const Eigen::VectorXd& scale,
                                         const LeastSquaresOptions& options = {});

}  // namespace mqnd
