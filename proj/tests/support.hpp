#pragma once

#include <cmath>
#include <random>

#include <Eigen/Core>

#include "dda/network.hpp"

namespace dda::test {

// Matrix of standard normal draws, deterministic per seed.
inline Eigen::MatrixXd randn(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = normal(gen);
  }
  return m;
}

inline Eigen::VectorXd randn_vec(Eigen::Index n, std::uint64_t seed) {
  return randn(n, 1, seed).col(0);
}

// Relative error with an absolute floor so near-zero pairs compare cleanly.
inline double rel_err(double a, double b, double floor = 1e-8) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

// Central finite difference of a scalar function of one network parameter.
template <typename Loss>
double central_diff(NetworkWeights w, int layer, Eigen::Index r, Eigen::Index c, bool bias,
                    double eps, Loss&& loss) {
  auto& target = bias ? w.layers[static_cast<std::size_t>(layer)].bias.coeffRef(r)
                      : w.layers[static_cast<std::size_t>(layer)].weights.coeffRef(r, c);
  const double saved = target;
  target = saved + eps;
  const double hi = loss(w);
  target = saved - eps;
  const double lo = loss(w);
  target = saved;
  return (hi - lo) / (2.0 * eps);
}

// Max relative error between backprop gradients and central differences of
// the induced scalar loss sum_i g_i * out_i, probing every parameter.
template <typename MakeLoss>
double max_grad_rel_err(const NetworkWeights& w, const Eigen::MatrixXd& X,
                        const Eigen::VectorXd& upstream, MakeLoss&& scalar_loss) {
  const WeightGradients grads = backward(w, X, upstream);
  double worst = 0.0;
  for (std::size_t l = 0; l < w.layers.size(); ++l) {
    const auto& layer = w.layers[l];
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
        const double fd = central_diff(w, static_cast<int>(l), r, c, false, 1e-6, scalar_loss);
        worst = std::max(worst, rel_err(grads.layers[l].weights(r, c), fd, 1e-6));
      }
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) {
      const double fd = central_diff(w, static_cast<int>(l), r, 0, true, 1e-6, scalar_loss);
      worst = std::max(worst, rel_err(grads.layers[l].bias[r], fd, 1e-6));
    }
  }
  return worst;
}

}  // namespace dda::test
