#include <doctest.h>

#include <cmath>
#include <random>

#include "dda/losses.hpp"
#include "support.hpp"

using namespace dda;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (const double x : xs) v[i++] = x;
  return v;
}

}  // namespace

TEST_CASE("ux_loss scalar cases") {
  const Eigen::VectorXd c = Eigen::VectorXd::Constant(4, 3.5);
  CHECK(ux_loss({c, c}, {1.0}) == 0.0);

  // var([1,2,3]) = 2/3, mean residual = (0+1+4)/3 = 5/3.
  CHECK(ux_loss({vec({1, 1, 1}), vec({1, 2, 3})}, {1.0}) == doctest::Approx(7.0 / 3.0));

  const Eigen::VectorXd req = vec({1, 2, 3});
  CHECK(ux_loss({vec({9, -4, 0}), req}, {0.0}) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("ux_loss_output_grad cases and finite differences") {
  CHECK(ux_loss_output_grad({vec({0, 2, 4}), vec({1, 2, 3})}, {1.0}).cwiseAbs().maxCoeff() ==
        0.0);
  CHECK(ux_loss_output_grad({vec({5, 1, 2}), Eigen::VectorXd::Constant(3, 7.0)}, {0.0})
            .isZero(0.0));

  std::mt19937_64 gen(99);
  std::normal_distribution<double> normal(0.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index m = 2 + static_cast<Eigen::Index>(gen() % 7);
    Eigen::VectorXd actual(m), required(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      actual[i] = normal(gen);
      required[i] = normal(gen);
    }
    const UxLossConfig cfg{trial % 3 == 0 ? 0.0 : 1.7};
    const Eigen::VectorXd grad = ux_loss_output_grad({actual, required}, cfg);
    for (Eigen::Index j = 0; j < m; ++j) {
      const double eps = 1e-6;
      Eigen::VectorXd hi = required, lo = required;
      hi[j] += eps;
      lo[j] -= eps;
      const double fd =
          (ux_loss({actual, hi}, cfg) - ux_loss({actual, lo}, cfg)) / (2.0 * eps);
      CHECK(test::rel_err(grad[j], fd, 1e-6) <= 1e-6);
    }
  }
}

TEST_CASE("analytic_ux_minimizer closed form") {
  const Eigen::VectorXd min1 = analytic_ux_minimizer(vec({0, 2, 4}), {1.0});
  CHECK(min1.isApprox(vec({1, 2, 3})));
  CHECK(ux_loss({vec({0, 2, 4}), min1}, {1.0}) == doctest::Approx(4.0 / 3.0));

  // alpha -> 0 collapses to mean(actual).
  const Eigen::VectorXd min0 = analytic_ux_minimizer(vec({0, 2, 4}), {0.0});
  CHECK((min0.array() - 2.0).abs().maxCoeff() < 1e-15);

  // constant actual is a fixed point for every alpha.
  const Eigen::VectorXd c = Eigen::VectorXd::Constant(5, -3.0);
  CHECK(analytic_ux_minimizer(c, {0.3}).isApprox(c));
  CHECK(analytic_ux_minimizer(c, {8.0}).isApprox(c));
}

TEST_CASE("minimizer optimality over random probes") {
  std::mt19937_64 gen(7);
  std::normal_distribution<double> normal(0.0, 3.0);
  std::uniform_real_distribution<double> alpha_of(0.0, 4.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::Index m = 1 + static_cast<Eigen::Index>(gen() % 8);
    Eigen::VectorXd actual(m), probe(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      actual[i] = normal(gen);
      probe[i] = normal(gen);
    }
    const UxLossConfig cfg{alpha_of(gen)};
    const Eigen::VectorXd best = analytic_ux_minimizer(actual, cfg);
    CHECK(ux_loss({actual, best}, cfg) <= ux_loss({actual, probe}, cfg) + 1e-12);
    CHECK(ux_loss_output_grad({actual, best}, cfg).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("ux_loss nonnegative, zero only at constant-and-equal") {
  std::mt19937_64 gen(15);
  std::normal_distribution<double> normal(0.0, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index m = 1 + static_cast<Eigen::Index>(gen() % 6);
    Eigen::VectorXd actual(m), required(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      actual[i] = normal(gen);
      required[i] = normal(gen);
    }
    CHECK(ux_loss({actual, required}, {1.0}) >= 0.0);
  }
  const Eigen::VectorXd c = Eigen::VectorXd::Constant(3, 2.0);
  CHECK(ux_loss({c, c}, {1.0}) == 0.0);
  // Constant required differing from actual is nonzero whenever alpha > 0.
  CHECK(ux_loss({c, Eigen::VectorXd::Constant(3, 1.0)}, {1.0}) > 0.0);
}

TEST_CASE("achieved_completion_rate cases") {
  const Eigen::VectorXd d = vec({1, 2, 3});
  CHECK(achieved_completion_rate({d, d}) == 1.0);
  CHECK(achieved_completion_rate({d, vec({2, 2, 2})}) == doctest::Approx(2.0 / 3.0));
  CHECK(achieved_completion_rate({d, vec({4, 4, 4})}) == 0.0);
}

TEST_CASE("completion rate monotone and quantized") {
  std::mt19937_64 gen(31);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const Eigen::Index m = 1 + static_cast<Eigen::Index>(gen() % 10);
    Eigen::VectorXd actual(m), required(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      actual[i] = normal(gen);
      required[i] = normal(gen);
    }
    const double before = achieved_completion_rate({actual, required});

    // Quantization: rate * M is an integer.
    const double scaled = before * static_cast<double>(m);
    CHECK(std::abs(scaled - std::round(scaled)) < 1e-12);

    // Raising any single requirement never raises the rate.
    const Eigen::Index j = static_cast<Eigen::Index>(gen() % m);
    Eigen::VectorXd bumped = required;
    bumped[j] += std::abs(normal(gen)) + 1e-3;
    CHECK(achieved_completion_rate({actual, bumped}) <= before);
  }
}

TEST_CASE("projection_error branches") {
  const CompletionSpec spec{0.5, 0.01};

  // Nobody completes: rate 0 < 0.5, push difficulties down.
  const ProjectionError low = projection_error({vec({1, 1, 1}), vec({2, 2, 2})}, spec);
  CHECK_FALSE(low.satisfied);
  CHECK(low.error == doctest::Approx(2.0));
  CHECK(low.grad_sign == 1.0);
  CHECK(low.output_grad(3).isApproxToConstant(1.0 / 3.0));

  // Everybody completes: rate 1 > 0.5, push difficulties up.
  const ProjectionError high = projection_error({vec({3, 3, 3}), vec({1, 1, 1})}, spec);
  CHECK_FALSE(high.satisfied);
  CHECK(high.error == doctest::Approx(-1.0));
  CHECK(high.grad_sign == -1.0);
  CHECK(high.output_grad(3).isApproxToConstant(-1.0 / 3.0));

  // Within tolerance: satisfied.
  const ProjectionError ok =
      projection_error({vec({1, 2}), vec({1.5, 1.5})}, CompletionSpec{0.5, 0.01});
  CHECK(ok.satisfied);
}

TEST_CASE("projection_error sign moves the rate toward the target") {
  // One-parameter model: every required difficulty equals theta. Descending
  // the surrogate error steps theta by -eta * grad_sign, which must move the
  // achieved rate toward the target.
  std::mt19937_64 gen(47);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uni(0.05, 0.95);
  for (int trial = 0; trial < 300; ++trial) {
    const Eigen::Index m = 5 + static_cast<Eigen::Index>(gen() % 20);
    Eigen::VectorXd actual(m);
    for (Eigen::Index i = 0; i < m; ++i) actual[i] = normal(gen);
    double theta = normal(gen);
    const CompletionSpec spec{uni(gen), 0.01};

    const auto rate_at = [&](double t) {
      return achieved_completion_rate({actual, Eigen::VectorXd::Constant(m, t)});
    };
    const ProjectionError err = projection_error({actual, Eigen::VectorXd::Constant(m, theta)}, spec);
    if (err.satisfied) continue;
    const double before = rate_at(theta);
    // Step far enough to cross at least one sample boundary.
    const double after = rate_at(theta - 2.0 * err.grad_sign * 3.0);
    if (before < spec.target) {
      CHECK(after >= before);
    } else {
      CHECK(after <= before);
    }
  }
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS((DifficultyPair{vec({1}), vec({1, 2})}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((DifficultyPair{Eigen::VectorXd(), Eigen::VectorXd()}.validate()),
                  std::invalid_argument);
  CHECK_THROWS_AS((CompletionSpec{-0.1, 0.01}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((CompletionSpec{0.5, 0.0}.validate()), std::invalid_argument);
}
