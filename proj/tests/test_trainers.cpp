#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "urex/envs.hpp"
#include "urex/policy/linear.hpp"
#include "urex/policy/recurrent.hpp"
#include "urex/trainers/coefficients.hpp"
#include "urex/trainers/optim.hpp"
#include "urex/trainers/train_step.hpp"
#include "support/three_arm_problem.hpp"

namespace urex {
namespace {

TEST(ImportanceWeights, DegenerateAndUniformCases) {
  const std::vector<double> one_r = {3.0}, one_lp = {-2.0};
  EXPECT_EQ(importance_weights(one_r, one_lp, 0.1), std::vector<double>{1.0});
  const std::vector<double> r = {1.0, 2.0, 3.0};
  const std::vector<double> lp = {-1.0 * 10 + 1.0, -1.0 * 10 + 2.0, -1.0 * 10 + 3.0};
  // r/τ - log π is constant at τ = 1 when log π = r - 10.
  for (double w : importance_weights(r, lp, 1.0)) EXPECT_NEAR(w, 1.0 / 3.0, 1e-15);
}

TEST(ImportanceWeights, TwoSampleValueMatchesDirectEvaluation) {
  const std::vector<double> r = {1.0, 0.0};
  const std::vector<double> lp = {std::log(0.5), std::log(0.5)};
  const auto w = importance_weights(r, lp, 0.1);
  // softmax(10, 0) = (1 / (1 + e^-10), e^-10 / (1 + e^-10)).
  const double e = std::exp(-10.0);
  EXPECT_NEAR(w[0], 1.0 / (1.0 + e), 1e-15);
  EXPECT_NEAR(w[1], e / (1.0 + e), 1e-15);
  EXPECT_NEAR(w[0], 0.9999546, 1e-7);
}

TEST(ImportanceWeights, SumToOneAndShiftInvariant) {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> r(10), lp(10);
    for (int k = 0; k < 10; ++k) {
      r[k] = 20.0 * uniform01(rng) - 10.0;
      lp[k] = -30.0 * uniform01(rng);
    }
    const auto w = importance_weights(r, lp, 0.1);
    EXPECT_NEAR(std::accumulate(w.begin(), w.end(), 0.0), 1.0, 1e-12);
    auto r2 = r, lp2 = lp;
    for (double& v : r2) v += 5.0;
    for (double& v : lp2) v -= 7.0;
    const auto w2 = importance_weights(r2, lp2, 0.1);
    for (int k = 0; k < 10; ++k) EXPECT_NEAR(w[k], w2[k], 1e-12);
  }
  const std::vector<double> bad = {1.0, NAN};
  EXPECT_THROW(importance_weights(bad, bad, 0.1), std::invalid_argument);
  EXPECT_THROW(importance_weights(std::vector<double>{1.0}, std::vector<double>{0.0}, 0.0),
               std::invalid_argument);
}

TEST(UrexCoefficients, EqualSamplesGiveTauOverK) {
  const std::vector<double> r(4, 2.5), lp(4, -3.0);
  for (double c : urex_coefficients(r, lp, 0.1)) EXPECT_NEAR(c, 0.1 / 4.0, 1e-15);
  for (double c : urex_coefficients(r, lp, 0.1, 40)) EXPECT_NEAR(c, 0.1 / 4.0 / 40.0, 1e-15);
}

TEST(UrexCoefficients, TwoSampleHandValue) {
  const std::vector<double> r = {1.0, 0.0};
  const std::vector<double> lp = {std::log(0.5), std::log(0.5)};
  const auto c = urex_coefficients(r, lp, 0.1);
  EXPECT_NEAR(c[0], 0.3499955, 1e-7);
  EXPECT_NEAR(c[1], -0.2499955, 1e-7);
  auto shifted = r;
  for (double& v : shifted) v += 5.0;
  const auto c2 = urex_coefficients(shifted, lp, 0.1);
  EXPECT_NEAR(c2[0], c[0], 1e-12);
  EXPECT_NEAR(c2[1], c[1], 1e-12);
  EXPECT_THROW(urex_coefficients(std::vector<double>{1.0}, std::vector<double>{0.0}, 0.1),
               std::invalid_argument);
}

TEST(MentCoefficients, HandValueAndReinforceLimit) {
  const std::vector<double> r = {2.0, 0.0}, lp = {-1.0, -3.0};
  const auto c = ment_coefficients(r, lp, 0.1);
  EXPECT_NEAR(c[0], 0.45, 1e-15);
  EXPECT_NEAR(c[1], -0.45, 1e-15);
  const std::vector<double> r3 = {1.0, 4.0, -2.0}, lp3 = {-0.5, -2.0, -9.0};
  const auto c0 = ment_coefficients(r3, lp3, 0.0, 5);
  const double mean = 1.0;
  for (int k = 0; k < 3; ++k) EXPECT_EQ(c0[k], (r3[k] - mean) / 15.0);
  const std::vector<double> same(5, 1.5), same_lp(5, -2.0);
  for (double v : ment_coefficients(same, same_lp, 0.3)) EXPECT_EQ(v, 0.0);
}

class EstimatorExpectation : public ::testing::Test, protected test_support::ThreeArmProblem {};

TEST_F(EstimatorExpectation, UncenteredMentIsUnbiasedForTheEntropyObjective) {
  const auto expected = expectation([&](const std::vector<double>& r, const std::vector<double>& lp) {
    return ment_coefficients(r, lp, tau, 1, false);
  });
  const auto exact = exact_entropy_gradient();
  for (int j = 0; j < kArms; ++j) EXPECT_NEAR(expected[j], exact[j], 1e-8);
}

TEST_F(EstimatorExpectation, CenteredMentIsScaledByKMinusOneOverK) {
  const auto expected = expectation([&](const std::vector<double>& r, const std::vector<double>& lp) {
    return ment_coefficients(r, lp, tau, 1, true);
  });
  const auto exact = exact_entropy_gradient();
  for (int j = 0; j < kArms; ++j) EXPECT_NEAR(expected[j], 0.5 * exact[j], 1e-8);
}

TEST_F(EstimatorExpectation, UrexMatchesTheConstantWeightSurrogate) {
  const auto expected = expectation([&](const std::vector<double>& r, const std::vector<double>& lp) {
    return urex_coefficients(r, lp, tau, 1);
  });
  const auto oracle = urex_surrogate_gradient();
  for (int j = 0; j < kArms; ++j) EXPECT_NEAR(expected[j], oracle[j], 1e-8);
}

TEST(ClipGradient, SpecExamples) {
  GradientEstimate small{{0.3, 0.4}, 1};
  EXPECT_EQ(clip_gradient(small, 1.0).values, small.values);
  GradientEstimate big{{120.0, 160.0}, 1};
  const auto c = clip_gradient(big, 100.0);
  EXPECT_NEAR(c.norm(), 100.0, 1e-9);
  const double cosine = (c.values[0] * 120.0 + c.values[1] * 160.0) / (c.norm() * 200.0);
  EXPECT_NEAR(cosine, 1.0, 1e-12);
  EXPECT_EQ(clip_gradient(c, 100.0).values, c.values);
  EXPECT_THROW(clip_gradient(big, 0.0), std::invalid_argument);
}

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
  ParamVector p;
  p.add_segment("w", 3, 1);
  p[0] = 1.0;
  p[1] = -2.0;
  const ParamVector before = p;
  OptimState s(p.size());
  adam_update(p, GradientEstimate{{0.0, 0.0, 0.0}, 1}, s, 0.1);
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_EQ(p[i], before[i]);
}

TEST(Adam, ConstantGradientStepsTendToEta) {
  ParamVector p;
  p.add_segment("w", 2, 1);
  OptimState s(p.size());
  const GradientEstimate g{{3.0, -0.002}, 1};
  double prev0 = 0.0, prev1 = 0.0;
  for (int t = 0; t < 200; ++t) {
    prev0 = p[0];
    prev1 = p[1];
    adam_update(p, g, s, 0.01);
  }
  EXPECT_NEAR(p[0] - prev0, 0.01, 1e-6);
  EXPECT_NEAR(p[1] - prev1, -0.01, 1e-5);
  EXPECT_EQ(s.step, 200);
}

TEST(Adam, IdenticalRunsAreIdentical) {
  auto run = [] {
    ParamVector p;
    p.add_segment("w", 4, 1);
    OptimState s(p.size());
    Rng rng(3);
    for (int t = 0; t < 50; ++t) {
      GradientEstimate g{{standard_normal(rng), standard_normal(rng), standard_normal(rng), 0.0}, 1};
      adam_update(p, g, s, 0.05);
    }
    return std::vector<double>(p.values().begin(), p.values().end());
  };
  EXPECT_EQ(run(), run());
}

double arm0_probability(const LinearSoftmaxPolicy& pi, const ParamVector& p) { return pi.probs(p)[0]; }

void two_arm_sign_test(Method method, double tau) {
  const BanditInstance inst{{1.0, 0.0}, Eigen::MatrixXd::Identity(2, 2)};
  int improved = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    BanditEnv env(seed, inst);
    LinearSoftmaxPolicy pi(env);
    ParamVector p = pi.init_params(seed);
    OptimState opt(p.size());
    TrainConfig cfg;
    cfg.method = method;
    cfg.tau = tau;
    cfg.learning_rate = 0.01;
    cfg.K = 10;
    cfg.N = 2;
    cfg.seed = seed;
    const double before = arm0_probability(pi, p);
    for (int step = 0; step < 5; ++step) train_step(pi, p, opt, env, cfg, step);
    improved += arm0_probability(pi, p) > before ? 1 : 0;
  }
  // One-sided binomial sign test at p < 0.01 needs at least 34 of 50.
  EXPECT_GE(improved, 34);
}

TEST(TrainStep, MentIncreasesTheBetterArmOnATwoArmBandit) { two_arm_sign_test(Method::MENT, 0.0); }
TEST(TrainStep, UrexIncreasesTheBetterArmOnATwoArmBandit) { two_arm_sign_test(Method::UREX, 0.1); }

TEST(TrainStep, MetricsAreFilledAndDeterministic) {
  auto run = [] {
    auto env = make_env(TaskId::Copy, 3, {2, 33});
    RecurrentNet net(policy_shape(*env, 8));
    ParamVector p = net.init_params(3);
    OptimState opt(p.size());
    Curriculum cur;
    TrainConfig cfg;
    cfg.method = Method::UREX;
    cfg.K = 4;
    cfg.N = 3;
    cfg.seed = 3;
    std::vector<StepMetrics> ms;
    for (int s = 0; s < 3; ++s) ms.push_back(train_step(net, p, opt, *env, cfg, s, &cur));
    return std::make_pair(ms, std::vector<double>(p.values().begin(), p.values().end()));
  };
  const auto [m1, p1] = run();
  const auto [m2, p2] = run();
  EXPECT_EQ(p1, p2);
  for (std::size_t i = 0; i < m1.size(); ++i) {
    EXPECT_EQ(m1[i].mean_reward, m2[i].mean_reward);
    EXPECT_TRUE(m1[i].weight_variance.has_value());
    EXPECT_GE(*m1[i].weight_variance, 0.0);
    EXPECT_LE(m1[i].grad_norm_post, m1[i].grad_norm_pre + 1e-15);
    EXPECT_LE(m1[i].coef_min, m1[i].coef_mean);
    EXPECT_GE(m1[i].max_len, 2);
  }
}

TEST(TrainStep, MentHasNoWeightVariance) {
  auto env = make_env(TaskId::Copy, 3, {2, 5});
  RecurrentNet net(policy_shape(*env, 4));
  ParamVector p = net.init_params(3);
  OptimState opt(p.size());
  TrainConfig cfg;
  cfg.method = Method::MENT;
  cfg.tau = 0.01;
  cfg.K = 2;
  cfg.N = 2;
  const auto m = train_step(net, p, opt, *env, cfg, 0);
  EXPECT_FALSE(m.weight_variance.has_value());
}

TEST(TrainConfig, ValidationRejectsBadSettings) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate());
  c.tau = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.method = Method::MENT;
  EXPECT_NO_THROW(c.validate());
  c.K = 1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.K = 10;
  c.clip_norm = -1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  EXPECT_EQ(parse_method("urex"), Method::UREX);
  EXPECT_THROW(parse_method("ppo"), std::invalid_argument);
}

}  // namespace
}  // namespace urex
