#include "dda/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace dda {

void DifficultyPair::validate() const {
  if (actual.size() == 0) throw std::invalid_argument("difficulty vectors are empty");
  if (actual.size() != required.size()) {
    throw std::invalid_argument("actual and required difficulty lengths differ");
  }
  if (!actual.allFinite() || !required.allFinite()) {
    throw std::invalid_argument("non-finite difficulty entries");
  }
}

void CompletionSpec::validate() const {
  if (target < 0.0 || target > 1.0) throw std::invalid_argument("completion target outside [0, 1]");
  if (tolerance <= 0.0 || tolerance >= 1.0) {
    throw std::invalid_argument("completion tolerance outside (0, 1)");
  }
}

double ux_loss(const DifficultyPair& pair, const UxLossConfig& cfg) {
  pair.validate();
  const double m = static_cast<double>(pair.size());
  const double mean = pair.required.mean();
  const double variance = (pair.required.array() - mean).square().sum() / m;
  const double residual = (pair.actual - pair.required).squaredNorm() / m;
  return variance + cfg.alpha * residual;
}

Eigen::VectorXd ux_loss_output_grad(const DifficultyPair& pair, const UxLossConfig& cfg) {
  pair.validate();
  const double m = static_cast<double>(pair.size());
  const double mean = pair.required.mean();
  return (2.0 / m) * (pair.required.array() - mean).matrix() +
         (2.0 * cfg.alpha / m) * (pair.required - pair.actual);
}

Eigen::VectorXd analytic_ux_minimizer(const Eigen::VectorXd& actual, const UxLossConfig& cfg) {
  if (actual.size() == 0) throw std::invalid_argument("empty difficulty vector");
  const double mean = actual.mean();
  return (Eigen::VectorXd::Constant(actual.size(), mean) + cfg.alpha * actual) / (1.0 + cfg.alpha);
}

double achieved_completion_rate(const DifficultyPair& pair) {
  pair.validate();
  const Eigen::Index m = pair.size();
  Eigen::Index completed = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (pair.actual[i] >= pair.required[i]) ++completed;
  }
  return static_cast<double>(completed) / static_cast<double>(m);
}

Eigen::VectorXd ProjectionError::output_grad(Eigen::Index m) const {
  return Eigen::VectorXd::Constant(m, grad_sign / static_cast<double>(m));
}

ProjectionError projection_error(const DifficultyPair& pair, const CompletionSpec& spec) {
  spec.validate();
  const double achieved = achieved_completion_rate(pair);
  ProjectionError result;
  if (std::abs(achieved - spec.target) <= spec.tolerance) {
    result.satisfied = true;
    return result;
  }
  // Too few completions means difficulties are too high: descend the mean.
  result.grad_sign = achieved < spec.target ? 1.0 : -1.0;
  result.error = result.grad_sign * pair.required.mean();
  return result;
}

}  // namespace dda
