#include "dda/network.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace dda {

namespace {

double activate(Activation a, double z) {
  switch (a) {
    case Activation::ReLU:
      return z > 0.0 ? z : 0.0;
    case Activation::LeakyReLU:
      return z > 0.0 ? z : 0.01 * z;
    case Activation::Tanh:
      return std::tanh(z);
    case Activation::Softplus:
      // max(z,0) + log1p(exp(-|z|)) keeps the large-|z| tails exact.
      return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
    case Activation::Identity:
      return z;
  }
  throw std::logic_error("unknown activation");
}

double activate_grad(Activation a, double z) {
  switch (a) {
    case Activation::ReLU:
      return z > 0.0 ? 1.0 : 0.0;
    case Activation::LeakyReLU:
      return z > 0.0 ? 1.0 : 0.01;
    case Activation::Tanh: {
      const double t = std::tanh(z);
      return 1.0 - t * t;
    }
    case Activation::Softplus:
      return 1.0 / (1.0 + std::exp(-z));
    case Activation::Identity:
      return 1.0;
  }
  throw std::logic_error("unknown activation");
}

void require_congruent(const std::vector<LayerParams>& a, const std::vector<LayerParams>& b,
                       const char* what) {
  if (a.size() != b.size()) throw std::invalid_argument(std::string(what) + ": layer count differs");
  for (std::size_t l = 0; l < a.size(); ++l) {
    if (a[l].weights.rows() != b[l].weights.rows() || a[l].weights.cols() != b[l].weights.cols() ||
        a[l].bias.size() != b[l].bias.size()) {
      throw std::invalid_argument(std::string(what) + ": layer shape differs");
    }
  }
}

}  // namespace

std::string activation_name(Activation a) {
  switch (a) {
    case Activation::ReLU: return "relu";
    case Activation::LeakyReLU: return "leaky_relu";
    case Activation::Tanh: return "tanh";
    case Activation::Softplus: return "softplus";
    case Activation::Identity: return "identity";
  }
  throw std::logic_error("unknown activation");
}

Activation parse_activation(const std::string& name) {
  if (name == "relu") return Activation::ReLU;
  if (name == "leaky_relu") return Activation::LeakyReLU;
  if (name == "tanh") return Activation::Tanh;
  if (name == "softplus") return Activation::Softplus;
  if (name == "identity") return Activation::Identity;
  throw std::invalid_argument("unknown activation: " + name);
}

void NetworkArchitecture::validate() const {
  if (input_dim < 1) throw std::invalid_argument("input_dim must be positive");
  for (int h : hidden_dims) {
    if (h < 1) throw std::invalid_argument("hidden dims must be positive");
  }
}

std::vector<int> NetworkArchitecture::layer_dims() const {
  std::vector<int> dims;
  dims.reserve(hidden_dims.size() + 2);
  dims.push_back(input_dim);
  dims.insert(dims.end(), hidden_dims.begin(), hidden_dims.end());
  dims.push_back(output_dim);
  return dims;
}

void NetworkWeights::validate() const {
  arch.validate();
  const auto dims = arch.layer_dims();
  if (layers.size() != dims.size() - 1) throw std::invalid_argument("layer count mismatch");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& p = layers[l];
    if (p.weights.rows() != dims[l + 1] || p.weights.cols() != dims[l]) {
      throw std::invalid_argument("weight matrix shape mismatch at layer " + std::to_string(l));
    }
    if (p.bias.size() != dims[l + 1]) {
      throw std::invalid_argument("bias shape mismatch at layer " + std::to_string(l));
    }
    if (!p.weights.allFinite() || !p.bias.allFinite()) {
      throw std::invalid_argument("non-finite parameters at layer " + std::to_string(l));
    }
  }
}

std::size_t NetworkWeights::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : layers) n += static_cast<std::size_t>(p.weights.size() + p.bias.size());
  return n;
}

NetworkWeights xavier_init(const NetworkArchitecture& arch, std::uint64_t seed) {
  arch.validate();
  std::mt19937_64 gen(seed);
  const auto dims = arch.layer_dims();

  NetworkWeights w;
  w.arch = arch;
  w.layers.resize(dims.size() - 1);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const int fan_in = dims[l];
    const int fan_out = dims[l + 1];
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-bound, bound);

    auto& p = w.layers[l];
    p.weights.resize(fan_out, fan_in);
    for (Eigen::Index r = 0; r < p.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < p.weights.cols(); ++c) {
        p.weights(r, c) = dist(gen);
      }
    }
    p.bias = Eigen::VectorXd::Zero(fan_out);
  }
  return w;
}

namespace detail {

ForwardCache forward_cached(const NetworkWeights& w, const Eigen::MatrixXd& X) {
  if (X.cols() != w.arch.input_dim) {
    throw std::invalid_argument("forward: input has " + std::to_string(X.cols()) +
                                " columns, network expects " + std::to_string(w.arch.input_dim));
  }
  const int num_layers = static_cast<int>(w.layers.size());
  ForwardCache cache;
  cache.activations.reserve(num_layers + 1);
  cache.pre_activations.reserve(num_layers);
  cache.activations.push_back(X);

  for (int l = 0; l < num_layers; ++l) {
    const auto& p = w.layers[l];
    Eigen::MatrixXd z = cache.activations.back() * p.weights.transpose();
    z.rowwise() += p.bias.transpose();
    cache.pre_activations.push_back(z);
    if (l + 1 == num_layers) {
      cache.activations.push_back(std::move(z));
    } else {
      const Activation act = w.arch.activation;
      cache.activations.push_back(
          cache.pre_activations.back().unaryExpr([act](double v) { return activate(act, v); }));
    }
  }
  cache.output = cache.activations.back().col(0);
  return cache;
}

WeightGradients backward_cached(const NetworkWeights& w, const ForwardCache& cache,
                                const Eigen::VectorXd& dloss_doutput) {
  const int num_layers = static_cast<int>(w.layers.size());
  if (dloss_doutput.size() != cache.output.size()) {
    throw std::invalid_argument("backward: upstream gradient length mismatch");
  }

  WeightGradients g;
  g.layers.resize(num_layers);

  // Output layer is linear, so dZ_L is just the upstream gradient.
  Eigen::MatrixXd dz = dloss_doutput;
  for (int l = num_layers - 1; l >= 0; --l) {
    const auto& p = w.layers[l];
    g.layers[l].weights = dz.transpose() * cache.activations[l];
    g.layers[l].bias = dz.colwise().sum().transpose();
    if (l > 0) {
      Eigen::MatrixXd upstream = dz * p.weights;
      const Activation act = w.arch.activation;
      dz = upstream.cwiseProduct(cache.pre_activations[l - 1].unaryExpr(
          [act](double v) { return activate_grad(act, v); }));
    }
  }
  return g;
}

}  // namespace detail

Eigen::VectorXd forward(const NetworkWeights& w, const Eigen::MatrixXd& X) {
  return detail::forward_cached(w, X).output;
}

WeightGradients backward(const NetworkWeights& w, const Eigen::MatrixXd& X,
                         const Eigen::VectorXd& dloss_doutput) {
  if (!dloss_doutput.allFinite()) throw std::invalid_argument("backward: non-finite upstream gradient");
  return detail::backward_cached(w, detail::forward_cached(w, X), dloss_doutput);
}

NetworkWeights sgd_step(const NetworkWeights& w, const WeightGradients& g, double eta) {
  require_congruent(w.layers, g.layers, "sgd_step");
  NetworkWeights out = w;
  for (std::size_t l = 0; l < out.layers.size(); ++l) {
    out.layers[l].weights -= eta * g.layers[l].weights;
    out.layers[l].bias -= eta * g.layers[l].bias;
  }
  return out;
}

double weight_distance(const NetworkWeights& a, const NetworkWeights& b) {
  require_congruent(a.layers, b.layers, "weight_distance");
  double sq = 0.0;
  for (std::size_t l = 0; l < a.layers.size(); ++l) {
    sq += (a.layers[l].weights - b.layers[l].weights).squaredNorm();
    sq += (a.layers[l].bias - b.layers[l].bias).squaredNorm();
  }
  return std::sqrt(sq);
}

}  // namespace dda
