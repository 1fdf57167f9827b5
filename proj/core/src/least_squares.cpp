#include "mqnd/least_squares.hpp"

#include <cmath>

#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

namespace mqnd {

namespace {

struct ScaledFunctor {
  using Scalar = double;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;

  const ResidualFunction* fn = nullptr;
  Eigen::VectorXd scale;
  int n_values = 0;
  mutable int evaluations = 0;

  int inputs() const { return static_cast<int>(scale.size()); }
  int values() const { return n_values; }

  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& r) const {
    ++evaluations;
    const Eigen::VectorXd p = x.cwiseProduct(scale);
    r.resize(n_values);
    (*fn)(p, r);
    if (r.size() != n_values) throw std::logic_error("least_squares: residual size changed");
    if (!r.allFinite()) return -1;  // aborts the minimization
    return 0;
  }
};

std::string status_text(Eigen::LevenbergMarquardtSpace::Status s) {
  using namespace Eigen::LevenbergMarquardtSpace;
  switch (s) {
    case RelativeReductionTooSmall: return "relative cost reduction below ftol";
    case RelativeErrorTooSmall: return "relative step below xtol";
    case RelativeErrorAndReductionTooSmall: return "cost and step below tolerance";
    case CosinusTooSmall: return "residual orthogonal to Jacobian";
    case TooManyFunctionEvaluation: return "iteration limit reached";
    case FtolTooSmall: return "ftol too small";
    case XtolTooSmall: return "xtol too small";
    case GtolTooSmall: return "gtol too small";
    case UserAsked: return "non-finite residual";
    case ImproperInputParameters: return "improper input parameters";
    default: return "running";
  }
}

}  // namespace

LeastSquaresResult least_squares(const ResidualFunction& residual, int n_residuals,
                                 const Eigen::VectorXd& p0, const Eigen::VectorXd& scale,
                                 const LeastSquaresOptions& options) {
  const auto n = p0.size();
  if (n == 0) throw std::invalid_argument("least_squares: no parameters");
  if (scale.size() != n) throw std::invalid_argument("least_squares: scale has wrong size");
  if (n_residuals < n) throw std::invalid_argument("least_squares: fewer residuals than parameters");
  if (!((scale.array() > 0).all())) throw std::invalid_argument("least_squares: scales must be positive");

  ScaledFunctor f;
  f.fn = &residual;
  f.scale = scale;
  f.n_values = n_residuals;
  Eigen::NumericalDiff<ScaledFunctor> diff(f);
  Eigen::LevenbergMarquardt<Eigen::NumericalDiff<ScaledFunctor>> lm(diff);
  lm.parameters.ftol = options.ftol;
  lm.parameters.xtol = options.xtol;
  // Each iteration costs n + 1 evaluations of the residual.
  lm.parameters.maxfev = options.max_iterations * static_cast<int>(n + 1);

  Eigen::VectorXd x = p0.cwiseQuotient(scale);
  const auto status = lm.minimize(x);

  LeastSquaresResult out;
  out.params = x.cwiseProduct(scale);
  out.residuals.resize(n_residuals);
  residual(out.params, out.residuals);
  out.cost = 0.5 * out.residuals.squaredNorm();
  out.rms = std::sqrt(out.residuals.squaredNorm() / n_residuals);
  out.iterations = static_cast<int>(lm.iter);
  out.evaluations = static_cast<int>(lm.nfev);
  using namespace Eigen::LevenbergMarquardtSpace;
  out.converged = status == RelativeReductionTooSmall || status == RelativeErrorTooSmall ||
                  status == RelativeErrorAndReductionTooSmall || status == CosinusTooSmall ||
                  status == XtolTooSmall || status == FtolTooSmall;
  // An exact fit ends with the reduction test undefined; accept it.
  if (!out.converged && out.residuals.norm() == 0.0) out.converged = true;
  out.status = status_text(status);
  return out;
}

LeastSquaresResult least_squares_checked(const ResidualFunction& residual, int n_residuals,
                                         const Eigen::VectorXd& p0, const Eigen::VectorXd& scale,
                                         const LeastSquaresOptions& options) {
  auto r = least_squares(residual, n_residuals, p0, scale, options);
  if (!r.converged) {
    throw NonConvergenceError("least_squares: " + r.status + " after " +
                                  std::to_string(r.iterations) + " iterations (cost " +
                                  std::to_string(r.cost) + ")",
                              std::move(r));
  }
  return r;
}

}  // namespace mqnd
