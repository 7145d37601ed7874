#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "urex/analysis.hpp"
#include "urex/random.hpp"

namespace urex::analysis {
namespace {

std::vector<double> dirichlet(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  double s = 0.0;
  for (double& x : v) {
    x = -std::log(1.0 - uniform01(rng));
    s += x;
  }
  for (double& x : v) x /= s;
  return v;
}

SmallProblem random_problem(Rng& rng, std::size_t n) {
  SmallProblem p;
  p.tau = 0.05 + uniform01(rng);
  p.rewards.resize(n);
  for (double& r : p.rewards) r = 4.0 * uniform01(rng) - 2.0;
  return p;
}

TEST(Analysis, OptimalRlPolicyExamples) {
  const auto u = optimal_policy_rl({{0.3, 0.3, 0.3}, 0.7});
  for (double v : u) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
  const auto two = optimal_policy_rl({{1.0, 0.0}, 1.0});
  EXPECT_NEAR(two[0], std::exp(1.0) / (1.0 + std::exp(1.0)), 1e-15);
  EXPECT_NEAR(two[1], 1.0 / (1.0 + std::exp(1.0)), 1e-15);
  const auto sharp = optimal_policy_rl({{0.2, 0.5, 0.1}, 0.01});
  EXPECT_GE(sharp[1], 1.0 - 1e-9);
  EXPECT_THROW(optimal_policy_rl({{}, 1.0}), std::invalid_argument);
  EXPECT_THROW(optimal_policy_rl({{1.0}, 0.0}), std::invalid_argument);
}

TEST(Analysis, OptimalRlPolicyBeatsRandomPolicies) {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const SmallProblem p = random_problem(rng, 6);
    const double best = rl_objective(p, optimal_policy_rl(p));
    for (int i = 0; i < 1000; ++i) ASSERT_LE(rl_objective(p, dirichlet(rng, 6)), best + 1e-12);
  }
}

TEST(Analysis, UrexOptimumForConstantRewardsIsUniform) {
  const auto s = optimal_policy_urex({{2.0, 2.0, 2.0, 2.0}, 0.5});
  EXPECT_NEAR(s.alpha, 2.5, 1e-12);
  for (double v : s.policy) EXPECT_NEAR(v, 0.25, 1e-12);
}

TEST(Analysis, UrexOptimumMatchesADenseGridScan) {
  const SmallProblem p{{1.0, 0.0}, 1.0};
  const auto s = optimal_policy_urex(p);
  EXPECT_GT(s.alpha, 1.0);
  EXPECT_NEAR(std::accumulate(s.policy.begin(), s.policy.end(), 0.0), 1.0, 1e-12);
  EXPECT_LE(s.residual, 1e-12);
  // Scan α on a 1e-6 grid for the sign change of Σ τπ*/(α - r) - 1.
  const double e = std::exp(1.0);
  const double star[2] = {e / (1.0 + e), 1.0 / (1.0 + e)};
  auto mass = [&](double a) { return star[0] / (a - 1.0) + star[1] / a; };
  double alpha = 0.0;
  for (long i = 1; i < 10'000'000; ++i) {
    const double a = 1.0 + 1e-6 * static_cast<double>(i);
    if (mass(a) <= 1.0) {
      alpha = a;
      break;
    }
  }
  EXPECT_NEAR(s.alpha, alpha, 1e-6);
}

TEST(Analysis, UrexOptimumIsStationaryAndSharper) {
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const SmallProblem p = random_problem(rng, 1 + trial % 12);
    const auto s = optimal_policy_urex(p);
    const auto star = optimal_policy_rl(p);
    double rmax = p.rewards[0];
    std::size_t best = 0;
    for (std::size_t a = 0; a < p.rewards.size(); ++a)
      if (p.rewards[a] > rmax) rmax = p.rewards[best = a];
    EXPECT_GT(s.alpha, rmax);
    EXPECT_LE(s.residual, 1e-12);
    for (std::size_t a = 0; a < p.rewards.size(); ++a) {
      EXPECT_GT(s.policy[a], 0.0);
      EXPECT_NEAR(p.rewards[a] + p.tau * star[a] / s.policy[a], s.alpha, 1e-8);
    }
    EXPECT_GE(s.policy[best] / star[best], 1.0 - 1e-12);
  }
}

TEST(Analysis, UrexOptimumBeatsRandomPolicies) {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const SmallProblem p = random_problem(rng, 5);
    const double best = urex_objective(p, optimal_policy_urex(p).policy);
    for (int i = 0; i < 1000; ++i) ASSERT_LE(urex_objective(p, dirichlet(rng, 5)), best + 1e-12);
  }
}

TEST(Analysis, UrexObjectiveEdgeCases) {
  EXPECT_DOUBLE_EQ(urex_objective({{3.5}, 0.2}, std::vector<double>{1.0}), 3.5);
  EXPECT_THROW(urex_objective({{1.0, 2.0}, 0.2}, std::vector<double>{1.0, 0.0}), std::invalid_argument);
  const auto cold = optimal_policy_urex({{0.0, 1.0, 0.5}, 1e-3});
  EXPECT_GT(cold.policy[1], 0.99);
}

TEST(Analysis, KlIdentityHoldsInDifferenceForm) {
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const SmallProblem p = random_problem(rng, 16);
    const auto a = dirichlet(rng, 16), b = dirichlet(rng, 16);
    EXPECT_LE(kl_identity_gap(p, a, b), 1e-10);
    EXPECT_EQ(kl_identity_gap(p, a, a), 0.0);
    const auto star = optimal_policy_rl(p);
    EXPECT_NEAR(rl_objective(p, star) - rl_objective(p, b), p.tau * kl_divergence(b, star), 1e-10);
  }
}

TEST(Analysis, TemperatureBounds) {
  const auto big = temperature_bounds(100.0, 1e4);
  EXPECT_NEAR(big.ment, 1.0 / (100.0 * std::log(1e4)), 1e-15);
  EXPECT_NEAR(big.ment, 1.0857e-3, 1e-7);
  EXPECT_NEAR(big.urex, 0.0724, 1e-4);
  const double e = std::exp(1.0);
  const auto unit = temperature_bounds(e, e);
  EXPECT_NEAR(unit.ment, 1.0 / e, 1e-15);
  EXPECT_NEAR(unit.urex, 0.5, 1e-15);
  double prev_m = 1e9, prev_u = 1e9;
  for (double a : {2.0, 10.0, 100.0, 1e4}) {
    const auto t = temperature_bounds(10.0, a);
    EXPECT_LT(t.ment, prev_m);
    EXPECT_LT(t.urex, prev_u);
    prev_m = t.ment;
    prev_u = t.urex;
  }
  EXPECT_THROW(temperature_bounds(1.0, 10.0), std::invalid_argument);
  EXPECT_THROW(temperature_bounds(2.0, 1.0), std::invalid_argument);
}

TEST(Analysis, WeightVariance) {
  EXPECT_NEAR(weight_variance(std::vector<double>(10, 0.1)), 0.0, 1e-30);
  // (1/10) [0.9^2 + 9 * 0.1^2] = 0.09, the maximum (K - 1) / K^2.
  std::vector<double> one_hot(10, 0.0);
  one_hot[3] = 1.0;
  EXPECT_NEAR(weight_variance(one_hot), 0.09, 1e-15);
  Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const auto w = dirichlet(rng, 10);
    EXPECT_GE(weight_variance(w), 0.0);
    EXPECT_LE(weight_variance(w), 0.09 + 1e-15);
  }
}

}  // namespace
}  // namespace urex::analysis
