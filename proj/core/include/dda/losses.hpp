#pragma once

#include <Eigen/Core>

namespace dda {

/// Actual difficulties observed for a group of players paired with the
/// difficulties a model assigns them. Both vectors have the same length M.
struct DifficultyPair {
  Eigen::VectorXd actual;
  Eigen::VectorXd required;

  // Throws std::invalid_argument on empty or mismatched vectors.
  void validate() const;
  Eigen::Index size() const { return actual.size(); }
};

struct UxLossConfig {
  double alpha = 1.0;  // weight of the fidelity term, >= 0
};

/// Desired completion rate with the tolerance that defines "satisfied".
struct CompletionSpec {
  double target = 0.09;      // in [0, 1]
  double tolerance = 0.005;  // in (0, 1)

  void validate() const;
};

// var(required) + (alpha / M) * sum_i (actual_i - required_i)^2, where var is
// the population variance (divisor M).
double ux_loss(const DifficultyPair& pair, const UxLossConfig& cfg);

// Gradient of ux_loss w.r.t. each required difficulty:
//   (2/M)(r_j - mean(required)) + (2 alpha / M)(r_j - actual_j).
Eigen::VectorXd ux_loss_output_grad(const DifficultyPair& pair, const UxLossConfig& cfg);

// Unique unconstrained minimizer of the loss over the required vector:
//   r*_j = (mean(actual) + alpha * actual_j) / (1 + alpha).
Eigen::VectorXd analytic_ux_minimizer(const Eigen::VectorXd& actual, const UxLossConfig& cfg);

// (1/M) * sum_i [actual_i >= required_i]; ties count as completed.
double achieved_completion_rate(const DifficultyPair& pair);

/// Surrogate error whose descent direction moves the achieved completion rate
/// toward the target. When the constraint is met, `satisfied` is set and the
/// other fields are meaningless.
struct ProjectionError {
  bool satisfied = false;
  double error = 0.0;      // grad_sign * mean(required)
  double grad_sign = 0.0;  // d(error)/d(required_j) = grad_sign / M

  Eigen::VectorXd output_grad(Eigen::Index m) const;
};

// Satisfied when |achieved - target| <= tolerance. Otherwise the error is
// +mean(required) when achieved < target (descending lowers difficulties and
// raises completion) and -mean(required) when achieved > target.
ProjectionError projection_error(const DifficultyPair& pair, const CompletionSpec& spec);

}  // namespace dda
