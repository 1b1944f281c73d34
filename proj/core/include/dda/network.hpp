#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace dda {

enum class Activation { ReLU, LeakyReLU, Tanh, Softplus, Identity };

std::string activation_name(Activation a);
Activation parse_activation(const std::string& name);

/// Shape of a dense feedforward net: input -> hidden layers -> scalar output.
/// The output layer is always linear; `activation` applies to hidden layers only.
struct NetworkArchitecture {
  int input_dim = 40;
  std::vector<int> hidden_dims = {64, 64, 64, 64, 64};
  Activation activation = Activation::LeakyReLU;

  static constexpr int output_dim = 1;

  // Throws std::invalid_argument on non-positive dimensions.
  void validate() const;

  // All layer widths, input first, scalar output last.
  std::vector<int> layer_dims() const;
  int num_layers() const { return static_cast<int>(hidden_dims.size()) + 1; }

  bool operator==(const NetworkArchitecture&) const = default;
};

// One dense layer: weights are out_dim x in_dim (row r holds the fan-in of unit r).
struct LayerParams {
  Eigen::MatrixXd weights;
  Eigen::VectorXd bias;
};

/// Full parameter set of a network. Immutable by convention: training
/// functions return new values instead of mutating.
struct NetworkWeights {
  NetworkArchitecture arch;
  std::vector<LayerParams> layers;

  // Shape chain consistent with arch and all entries finite.
  void validate() const;
  std::size_t parameter_count() const;
};

/// Same shape as the NetworkWeights it was computed from; entries are
/// d(loss)/d(parameter).
struct WeightGradients {
  std::vector<LayerParams> layers;
};

// Xavier/Glorot uniform init: W ~ U(-s, s) with s = sqrt(6 / (fan_in + fan_out)),
// biases zero. Deterministic per seed.
NetworkWeights xavier_init(const NetworkArchitecture& arch, std::uint64_t seed);

// Row-wise evaluation: X is M x input_dim, result is length M.
Eigen::VectorXd forward(const NetworkWeights& w, const Eigen::MatrixXd& X);

// Exact reverse-mode gradients of the scalar loss whose per-output gradient
// is `dloss_doutput`.
WeightGradients backward(const NetworkWeights& w, const Eigen::MatrixXd& X,
                         const Eigen::VectorXd& dloss_doutput);

// Elementwise w - eta * g.
NetworkWeights sgd_step(const NetworkWeights& w, const WeightGradients& g, double eta);

// Euclidean norm over all flattened parameters of a - b.
double weight_distance(const NetworkWeights& a, const NetworkWeights& b);

namespace detail {

// Forward pass keeping per-layer pre-activations and activations so a
// training loop can reuse them for the backward pass.
struct ForwardCache {
  std::vector<Eigen::MatrixXd> pre_activations;  // Z_l, l = 1..L
  std::vector<Eigen::MatrixXd> activations;      // A_0 = X, ..., A_L
  Eigen::VectorXd output;
};

ForwardCache forward_cached(const NetworkWeights& w, const Eigen::MatrixXd& X);
WeightGradients backward_cached(const NetworkWeights& w, const ForwardCache& cache,
                                const Eigen::VectorXd& dloss_doutput);

}  // namespace detail

}  // namespace dda
