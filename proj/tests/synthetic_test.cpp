#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <random>

#include "dda/clustering.hpp"
#include "dda/losses.hpp"
#include "dda/synthetic.hpp"
#include "support.hpp"

using namespace dda;

namespace {

SyntheticScenario scenario(ScenarioKind kind, int players, int features, std::uint64_t seed,
                           std::optional<double> noise = std::nullopt, int segments = 10) {
  SyntheticScenario s;
  s.kind = kind;
  s.players = players;
  s.feature_dim = features;
  s.seed = seed;
  s.noise_sd = noise;
  s.segments = segments;
  return s;
}

}  // namespace

TEST_CASE("generation is deterministic per seed") {
  const auto s = scenario(ScenarioKind::HeterogeneousSegments, 300, 6, 17, std::nullopt, 4);
  const PlayerDataset a = generate(s);
  const PlayerDataset b = generate(s);
  CHECK((a.features - b.features).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.difficulty - b.difficulty).cwiseAbs().maxCoeff() == 0.0);

  auto s2 = s;
  s2.seed = 18;
  const PlayerDataset c = generate(s2);
  CHECK((a.features - c.features).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("noiseless linear difficulty is recovered by least squares") {
  const PlayerDataset ds = generate(scenario(ScenarioKind::Linear, 400, 8, 23, 0.0));
  REQUIRE(ds.truth.noise_sd == 0.0);

  // d = X w exactly, so the regression residual vanishes.
  const Eigen::VectorXd w_hat =
      ds.features.colPivHouseholderQr().solve(ds.difficulty);
  CHECK((ds.features * w_hat - ds.difficulty).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((w_hat - ds.truth.weights).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("piecewise difficulty matches manual thresholding") {
  const PlayerDataset ds = generate(scenario(ScenarioKind::Piecewise, 500, 3, 29, 0.0));
  REQUIRE(ds.truth.thresholds == std::vector<double>{-1.0, 0.0, 1.0});
  REQUIRE(ds.truth.levels == std::vector<double>{2.0, 5.0, 8.0, 11.0});
  for (Eigen::Index i = 0; i < ds.players(); ++i) {
    const double x0 = ds.features(i, 0);
    double expect = 11.0;
    if (x0 <= -1.0) {
      expect = 2.0;
    } else if (x0 <= 0.0) {
      expect = 5.0;
    } else if (x0 <= 1.0) {
      expect = 8.0;
    }
    CHECK(ds.difficulty[i] == expect);
  }
}

TEST_CASE("heterogeneous segments reproduce their ground-truth function") {
  const auto s = scenario(ScenarioKind::HeterogeneousSegments, 400, 5, 31, 0.0, 6);
  const PlayerDataset ds = generate(s);
  for (Eigen::Index i = 0; i < ds.players(); ++i) {
    const int seg = ds.truth.segment_of_player[static_cast<std::size_t>(i)];
    const Eigen::VectorXd offset =
        ds.features.row(i).transpose() - ds.truth.segment_centers.row(seg).transpose();
    const double expect =
        ds.truth.segment_base[seg] + ds.truth.segment_weights.row(seg).dot(offset);
    CHECK(ds.difficulty[i] == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("far-apart segments are recovered by kmeans") {
  const auto s = scenario(ScenarioKind::HeterogeneousSegments, 300, 8, 37, 0.0, 3);
  const PlayerDataset ds = generate(s);
  const FeatureNormalizer n = fit_normalizer(ds.features);
  const ClusterAssignment a = kmeans(n.apply(ds.features), 3, 43);

  // Exhaustive permutation match between cluster labels and true segments.
  std::array<int, 3> perm{0, 1, 2};
  bool matched = false;
  std::sort(perm.begin(), perm.end());
  do {
    bool all = true;
    for (Eigen::Index i = 0; i < ds.players() && all; ++i) {
      all = perm[static_cast<std::size_t>(
                ds.truth.segment_of_player[static_cast<std::size_t>(i)])] ==
            a.labels[static_cast<std::size_t>(i)];
    }
    matched = matched || all;
  } while (std::next_permutation(perm.begin(), perm.end()));
  CHECK(matched);
}

TEST_CASE("linear feature moments match their targets at scale") {
  const PlayerDataset ds = generate(scenario(ScenarioKind::Linear, 10000, 6, 41));
  for (Eigen::Index c = 0; c < ds.feature_dim(); ++c) {
    const double mean = ds.features.col(c).mean();
    const double var =
        (ds.features.col(c).array() - mean).square().sum() / static_cast<double>(ds.players());
    CHECK(std::abs(mean) < 0.05);
    CHECK(std::abs(var - 1.0) < 0.05);
  }
}

TEST_CASE("default noise level tracks the noiseless spread") {
  const auto quiet = scenario(ScenarioKind::HeterogeneousSegments, 2000, 6, 47, 0.0, 8);
  const PlayerDataset noiseless = generate(quiet);
  const double mean = noiseless.difficulty.mean();
  const double sd = std::sqrt((noiseless.difficulty.array() - mean).square().sum() /
                              static_cast<double>(noiseless.players()));

  auto loud = quiet;
  loud.noise_sd.reset();  // scenario default: 0.1 * sd(noiseless)
  const PlayerDataset noisy = generate(loud);
  CHECK(noisy.truth.noise_sd == doctest::Approx(0.1 * sd).epsilon(1e-9));
}

TEST_CASE("difficulty mappings apply and invert") {
  DifficultyMapping affine{MappingKind::Affine, 2.0, 1.0};
  CHECK(affine.apply(3.0) == doctest::Approx(7.0));
  CHECK(affine.invert(7.0) == doctest::Approx(3.0));

  DifficultyMapping ident;
  CHECK(ident.apply(-2.5) == -2.5);
  CHECK(ident.invert(-2.5) == -2.5);

  DifficultyMapping expo{MappingKind::Exponential, 1.0, 0.0};
  CHECK_THROWS_AS(expo.invert(0.0), std::domain_error);
  CHECK_THROWS_AS((DifficultyMapping{MappingKind::Affine, 0.0, 0.0}).validate(),
                  std::invalid_argument);

  std::mt19937_64 gen(53);
  std::uniform_real_distribution<double> uni(-5.0, 5.0);
  for (const auto& m : {affine, ident, expo}) {
    for (int i = 0; i < 1000; ++i) {
      const double d = uni(gen);
      CHECK(std::abs(m.invert(m.apply(d)) - d) <= 1e-9);
    }
  }

  const Eigen::VectorXd d = test::randn_vec(50, 59);
  const Eigen::VectorXd pd = apply_mapping(affine, d);
  CHECK((invert_mapping(affine, pd) - d).cwiseAbs().maxCoeff() <= 1e-9);

  // Strict monotonicity on a sampled grid.
  for (const auto& m : {affine, ident, expo}) {
    double prev = m.apply(-5.0);
    for (int i = 1; i <= 100; ++i) {
      const double cur = m.apply(-5.0 + 0.1 * i);
      CHECK(cur > prev);
      prev = cur;
    }
  }
}

TEST_CASE("rule cascade semantics") {
  Eigen::MatrixXd X(2, 3);
  X << 1, 0, 0, -1, 0, 0;

  const RuleBasedPolicy only_default{{}, 1.5};
  CHECK(rule_based_assign(only_default, X).isApproxToConstant(1.5));

  const RuleBasedPolicy one_rule{{{0, 0.0, 5.0}}, 1.0};
  const Eigen::VectorXd out = rule_based_assign(one_rule, X);
  CHECK(out[0] == 5.0);
  CHECK(out[1] == 1.0);

  // First match wins: overlapping rules change outputs when swapped.
  const RuleBasedPolicy ab{{{0, 0.0, 5.0}, {0, 0.5, 9.0}}, 1.0};
  const RuleBasedPolicy ba{{{0, 0.5, 9.0}, {0, 0.0, 5.0}}, 1.0};
  CHECK(rule_based_assign(ab, X)[0] == 5.0);
  CHECK(rule_based_assign(ba, X)[0] == 9.0);

  const RuleBasedPolicy bad{{{7, 0.0, 5.0}}, 1.0};
  CHECK_THROWS_AS(bad.validate(3), std::invalid_argument);
}

TEST_CASE("simulate_outcomes agrees with the completion rate") {
  Eigen::VectorXd d(3), dh(3);
  d << 1, 2, 3;
  dh << 2, 2, 2;
  const std::vector<bool> flags = simulate_outcomes(d, dh);
  CHECK(flags == std::vector<bool>{false, true, true});
  CHECK(simulate_outcomes(d, d) == std::vector<bool>{true, true, true});

  std::mt19937_64 gen(67);
  std::normal_distribution<double> normal(0.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index m = 1 + static_cast<Eigen::Index>(gen() % 12);
    Eigen::VectorXd actual(m), assigned(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      actual[i] = normal(gen);
      assigned[i] = normal(gen);
    }
    const std::vector<bool> f = simulate_outcomes(actual, assigned);
    const double mean =
        static_cast<double>(std::count(f.begin(), f.end(), true)) / static_cast<double>(m);
    CHECK(mean == achieved_completion_rate({actual, assigned}));
  }
}

TEST_CASE("scenario validation") {
  CHECK_THROWS_AS(generate(scenario(ScenarioKind::Linear, 1, 4, 1)), std::invalid_argument);
  CHECK_THROWS_AS(generate(scenario(ScenarioKind::Linear, 100, 0, 1)), std::invalid_argument);
  auto s = scenario(ScenarioKind::Linear, 100, 4, 1);
  s.noise_sd = -0.5;
  CHECK_THROWS_AS(generate(s), std::invalid_argument);
  CHECK(parse_scenario("linear") == ScenarioKind::Linear);
  CHECK(parse_scenario(scenario_name(ScenarioKind::Piecewise)) == ScenarioKind::Piecewise);
  CHECK_THROWS_AS(parse_scenario("bogus"), std::invalid_argument);
}
