#include "dda/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace dda {

void SyntheticScenario::validate() const {
  if (players < 2) throw std::invalid_argument("scenario needs at least 2 players");
  if (feature_dim < 1) throw std::invalid_argument("feature_dim must be positive");
  if (noise_sd && *noise_sd < 0.0) throw std::invalid_argument("noise_sd must be nonnegative");
  if (kind == ScenarioKind::HeterogeneousSegments && segments < 1) {
    throw std::invalid_argument("segments must be positive");
  }
}

std::string scenario_name(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::Linear: return "linear";
    case ScenarioKind::Piecewise: return "piecewise";
    case ScenarioKind::HeterogeneousSegments: return "heterogeneous-segments";
  }
  throw std::logic_error("unknown scenario kind");
}

ScenarioKind parse_scenario(const std::string& name) {
  if (name == "linear") return ScenarioKind::Linear;
  if (name == "piecewise") return ScenarioKind::Piecewise;
  if (name == "heterogeneous-segments") return ScenarioKind::HeterogeneousSegments;
  throw std::invalid_argument("unknown scenario: " + name);
}

namespace {

double population_sd(const Eigen::VectorXd& v) {
  const double mean = v.mean();
  return std::sqrt((v.array() - mean).square().sum() / static_cast<double>(v.size()));
}

}  // namespace

PlayerDataset generate(const SyntheticScenario& scenario) {
  scenario.validate();
  std::mt19937_64 gen(scenario.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  const int m = scenario.players;
  const int z = scenario.feature_dim;

  PlayerDataset ds;
  ds.scenario = scenario;
  ds.truth.kind = scenario.kind;
  ds.features.resize(m, z);

  Eigen::VectorXd noiseless(m);

  switch (scenario.kind) {
    case ScenarioKind::Linear: {
      ds.truth.weights.resize(z);
      for (int c = 0; c < z; ++c) ds.truth.weights[c] = normal(gen) / std::sqrt(double(z));
      for (int i = 0; i < m; ++i) {
        for (int c = 0; c < z; ++c) ds.features(i, c) = normal(gen);
      }
      noiseless = ds.features * ds.truth.weights;
      break;
    }
    case ScenarioKind::Piecewise: {
      ds.truth.thresholds = {-1.0, 0.0, 1.0};
      ds.truth.levels = {2.0, 5.0, 8.0, 11.0};
      for (int i = 0; i < m; ++i) {
        for (int c = 0; c < z; ++c) ds.features(i, c) = normal(gen);
      }
      for (int i = 0; i < m; ++i) {
        const double x0 = ds.features(i, 0);
        const auto it =
            std::lower_bound(ds.truth.thresholds.begin(), ds.truth.thresholds.end(), x0);
        noiseless[i] = ds.truth.levels[static_cast<std::size_t>(
            std::distance(ds.truth.thresholds.begin(), it))];
      }
      break;
    }
    case ScenarioKind::HeterogeneousSegments: {
      const int s = scenario.segments;
      ds.truth.segment_centers.resize(s, z);
      ds.truth.segment_weights.resize(s, z);
      ds.truth.segment_base.resize(s);
      for (int seg = 0; seg < s; ++seg) {
        for (int c = 0; c < z; ++c) ds.truth.segment_centers(seg, c) = 3.0 * normal(gen);
      }
      std::uniform_real_distribution<double> slope_dist(0.2, 1.0);
      std::uniform_real_distribution<double> base_dist(4.0, 12.0);
      for (int seg = 0; seg < s; ++seg) {
        Eigen::VectorXd direction(z);
        for (int c = 0; c < z; ++c) direction[c] = normal(gen);
        direction.normalize();
        ds.truth.segment_weights.row(seg) = slope_dist(gen) * direction.transpose();
        ds.truth.segment_base[seg] = base_dist(gen);
      }
      ds.truth.segment_of_player.resize(static_cast<std::size_t>(m));
      std::uniform_int_distribution<int> seg_dist(0, s - 1);
      for (int i = 0; i < m; ++i) {
        const int seg = seg_dist(gen);
        ds.truth.segment_of_player[static_cast<std::size_t>(i)] = seg;
        for (int c = 0; c < z; ++c) {
          ds.features(i, c) = ds.truth.segment_centers(seg, c) + normal(gen);
        }
        noiseless[i] =
            ds.truth.segment_base[seg] +
            ds.truth.segment_weights.row(seg).dot(ds.features.row(i) -
                                                  ds.truth.segment_centers.row(seg));
      }
      break;
    }
  }

  const double noise_sd =
      scenario.noise_sd ? *scenario.noise_sd : 0.1 * population_sd(noiseless);
  ds.truth.noise_sd = noise_sd;
  ds.difficulty = noiseless;
  if (noise_sd > 0.0) {
    for (int i = 0; i < m; ++i) ds.difficulty[i] += noise_sd * normal(gen);
  }
  return ds;
}

std::string mapping_name(MappingKind k) {
  switch (k) {
    case MappingKind::Identity: return "identity";
    case MappingKind::Affine: return "affine";
    case MappingKind::Exponential: return "exponential";
  }
  throw std::logic_error("unknown mapping kind");
}

MappingKind parse_mapping(const std::string& name) {
  if (name == "identity") return MappingKind::Identity;
  if (name == "affine") return MappingKind::Affine;
  if (name == "exponential") return MappingKind::Exponential;
  throw std::invalid_argument("unknown mapping: " + name);
}

void DifficultyMapping::validate() const {
  if (kind != MappingKind::Identity && scale <= 0.0) {
    throw std::invalid_argument("mapping scale must be positive");
  }
}

double DifficultyMapping::apply(double d) const {
  switch (kind) {
    case MappingKind::Identity: return d;
    case MappingKind::Affine: return scale * d + offset;
    case MappingKind::Exponential: return scale * std::exp(d);
  }
  throw std::logic_error("unknown mapping kind");
}

double DifficultyMapping::invert(double pd) const {
  switch (kind) {
    case MappingKind::Identity: return pd;
    case MappingKind::Affine: return (pd - offset) / scale;
    case MappingKind::Exponential:
      if (pd <= 0.0) throw std::domain_error("exponential mapping inverse needs positive input");
      return std::log(pd / scale);
  }
  throw std::logic_error("unknown mapping kind");
}

Eigen::VectorXd apply_mapping(const DifficultyMapping& m, const Eigen::VectorXd& d) {
  m.validate();
  Eigen::VectorXd out(d.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) out[i] = m.apply(d[i]);
  return out;
}

Eigen::VectorXd invert_mapping(const DifficultyMapping& m, const Eigen::VectorXd& pd) {
  m.validate();
  Eigen::VectorXd out(pd.size());
  for (Eigen::Index i = 0; i < pd.size(); ++i) out[i] = m.invert(pd[i]);
  return out;
}

void RuleBasedPolicy::validate(int feature_dim) const {
  for (const auto& rule : rules) {
    if (rule.feature < 0 || rule.feature >= feature_dim) {
      throw std::invalid_argument("rule references feature " + std::to_string(rule.feature) +
                                  " outside dimension " + std::to_string(feature_dim));
    }
  }
}

Eigen::VectorXd rule_based_assign(const RuleBasedPolicy& policy, const Eigen::MatrixXd& X) {
  policy.validate(static_cast<int>(X.cols()));
  Eigen::VectorXd out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    double assigned = policy.default_difficulty;
    for (const auto& rule : policy.rules) {
      if (X(i, rule.feature) > rule.threshold) {
        assigned = rule.difficulty;
        break;
      }
    }
    out[i] = assigned;
  }
  return out;
}

RuleBasedPolicy default_benchmark_policy() {
  // Thresholds on a handful of raw features route players to coarse
  // difficulty tiers; constants were fitted once against the default
  // benchmark dataset (seed 42) and are fixed.
  RuleBasedPolicy p;
  p.rules = {
      {1, 3.6, 7.55},
      {0, 4.6, 9.55},
      {0, 3.25, 6.8},
      {1, -0.4, 11.4},
      {0, -0.4, 13.2},
  };
  p.default_difficulty = 11.5;
  return p;
}

std::vector<bool> simulate_outcomes(const Eigen::VectorXd& actual,
                                    const Eigen::VectorXd& assigned) {
  if (actual.size() != assigned.size()) {
    throw std::invalid_argument("simulate_outcomes: length mismatch");
  }
  std::vector<bool> flags(static_cast<std::size_t>(actual.size()));
  for (Eigen::Index i = 0; i < actual.size(); ++i) {
    flags[static_cast<std::size_t>(i)] = actual[i] >= assigned[i];
  }
  return flags;
}

}  // namespace dda
