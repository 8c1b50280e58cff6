#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rerankkit/qp.hpp"
#include "support/oracles.hpp"

namespace rerankkit {
namespace {

Constraint make(std::initializer_list<double> delta, double loss) {
  Constraint c;
  std::size_t k = 0;
  for (double v : delta) c.delta[k++] = v;
  c.loss = loss;
  return c;
}

WorkingSet random_working_set(std::mt19937_64& rng, std::size_t examples, std::size_t per_example) {
  std::uniform_real_distribution<double> u(-1, 1), loss(0.05, 1);
  WorkingSet ws(examples);
  for (auto& block : ws) {
    for (std::size_t j = 0; j < per_example; ++j) {
      Constraint c;
      for (double& v : c.delta) v = u(rng);
      c.loss = loss(rng);
      c.candidate = j;
      block.push_back(c);
    }
  }
  return ws;
}

TEST(RestrictedQp, EmptyWorkingSetIsZero) {
  const WorkingSet ws(3);
  const RestrictedSolution s = solve_restricted(ws, 1.0, 1e-9);
  EXPECT_EQ(s.theta, FeatureVector{});
  EXPECT_EQ(s.objective, 0.0);
  ASSERT_EQ(s.slacks.size(), 3u);
  for (double xi : s.slacks) EXPECT_EQ(xi, 0.0);
}

TEST(RestrictedQp, SingleConstraintAnalytic) {
  // min theta0^2 s.t. 2 theta0 >= 1: theta0 = 1/2, objective 1/4.
  const WorkingSet ws{{make({2, 0, 0, 0, 0, 0, 0}, 1.0)}};
  const RestrictedSolution s = solve_restricted(ws, 1e6, 1e-9);
  EXPECT_NEAR(s.theta[0], 0.5, 1e-4);
  for (std::size_t k = 1; k < kNumFeatures; ++k) EXPECT_EQ(s.theta[k], 0.0);
  EXPECT_NEAR(s.objective, 0.25, 1e-4);
  EXPECT_NEAR(s.slacks[0], 0.0, 1e-6);
}

TEST(RestrictedQp, SoftMarginAnalytic) {
  // min t^2 + C xi s.t. 2t >= 1 - xi with a small C, checked by 1-D grid search.
  const double C = 0.5;
  double best = 1e300;
  for (int i = 0; i <= 200000; ++i) {
    const double t = i * 1e-5;
    best = std::min(best, t * t + C * std::max(0.0, 1.0 - 2.0 * t));
  }
  const WorkingSet ws{{make({2, 0, 0, 0, 0, 0, 0}, 1.0)}};
  const RestrictedSolution s = solve_restricted(ws, C, 1e-10);
  EXPECT_NEAR(s.objective, best, 1e-8);
}

TEST(RestrictedQp, OpposingConstraintsMatchGridSearch) {
  // t >= 1 - xi and -t >= 1 - xi in one example: no theta satisfies both, so
  // the best is t = 0 with xi = 1.
  const WorkingSet ws{{make({1, 0, 0, 0, 0, 0, 0}, 1.0), make({-1, 0, 0, 0, 0, 0, 0}, 1.0)}};
  double best = 1e300;
  for (int i = -20000; i <= 20000; ++i) {
    const double t = i * 1e-4;
    const double xi = std::max({0.0, 1.0 - t, 1.0 + t});
    best = std::min(best, t * t + 1.0 * xi);
  }
  const RestrictedSolution s = solve_restricted(ws, 1.0, 1e-10);
  EXPECT_NEAR(s.objective, best, 1e-8);
  EXPECT_NEAR(s.objective, 1.0, 1e-8);
  EXPECT_NEAR(s.theta[0], 0.0, 1e-6);
}

TEST(RestrictedQp, MatchesFistaOracle) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 8; ++trial) {
    const double C = trial % 2 ? 0.1 : 10.0;
    const WorkingSet ws = random_working_set(rng, 5, 6);
    const RestrictedSolution s = solve_restricted(ws, C, 1e-9);
    const testing::FistaResult ref = testing::fista_restricted(ws, C, 50000);
    ASSERT_LT(ref.primal - ref.dual, 1e-5) << "oracle did not converge";
    EXPECT_NEAR(s.objective, ref.primal, 1e-5);
    EXPECT_LE(s.dual_objective, ref.primal + 1e-9);
    EXPECT_LE(s.gap(), 1e-9);
  }
}

TEST(RestrictedQp, SolutionIsFeasible) {
  std::mt19937_64 rng(22);
  const WorkingSet ws = random_working_set(rng, 10, 8);
  const double C = 2.0;
  const RestrictedSolution s = solve_restricted(ws, C, 1e-9);
  double th2 = 0.0, xi_sum = 0.0;
  for (double v : s.theta) th2 += v * v;
  for (std::size_t i = 0; i < ws.size(); ++i) {
    EXPECT_GE(s.slacks[i], 0.0);
    xi_sum += s.slacks[i];
    for (const Constraint& c : ws[i]) {
      double margin = 0.0;
      for (std::size_t k = 0; k < kNumFeatures; ++k) margin += s.theta[k] * c.delta[k];
      EXPECT_GE(c.loss * margin, c.loss - s.slacks[i] - 1e-12);
    }
  }
  EXPECT_NEAR(s.objective, th2 + C * xi_sum, 1e-12);
}

TEST(RestrictedQp, WarmStartDualNeverDecreases) {
  std::mt19937_64 rng(23);
  const WorkingSet ws = random_working_set(rng, 6, 10);
  RestrictedQp qp(ws.size(), 1.0);
  double last = -1e300;
  for (std::size_t j = 0; j < 10; ++j) {
    for (std::size_t i = 0; i < ws.size(); ++i) qp.add(i, ws[i][j]);
    const RestrictedSolution s = qp.solve(1e-9);
    EXPECT_GE(s.dual_objective, last - 1e-12);
    last = s.dual_objective;
  }
  EXPECT_EQ(qp.num_constraints(), 60u);
  EXPECT_NEAR(last, solve_restricted(ws, 1.0, 1e-9).objective, 2e-9);
}

TEST(RestrictedQp, RejectsBadArguments) {
  EXPECT_THROW(RestrictedQp(2, 0.0), std::invalid_argument);
  RestrictedQp qp(2, 1.0);
  EXPECT_THROW(qp.add(5, Constraint{}), std::out_of_range);
}

}  // namespace
}  // namespace rerankkit
