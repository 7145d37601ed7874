#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "urex/envs/bandit.hpp"
#include "urex/policy/params.hpp"
#include "urex/policy/softmax.hpp"
#include "urex/random.hpp"
#include "urex/trajectory.hpp"

namespace urex {

/// π_θ(a) ∝ exp(φ_a · θ) over a fixed feature matrix (one row per arm).
class LinearSoftmaxPolicy {
 public:
  explicit LinearSoftmaxPolicy(Eigen::MatrixXd features)
      : features_(std::make_shared<const Eigen::MatrixXd>(std::move(features))) {}
  explicit LinearSoftmaxPolicy(const BanditEnv& env) : LinearSoftmaxPolicy(env.features()) {}

  int num_actions() const { return static_cast<int>(features_->rows()); }
  int dim() const { return static_cast<int>(features_->cols()); }
  std::size_t parameter_count() const { return static_cast<std::size_t>(dim()); }

  /// θ ~ U[-0.08, 0.08]^d.
  ParamVector init_params(std::uint64_t seed) const {
    ParamVector p;
    p.add_segment("theta", dim(), 1);
    Rng rng(derive_seed(seed, {0x7e7a}));
    for (double& v : p.values()) v = 0.16 * uniform01(rng) - 0.08;
    return p;
  }

  Eigen::VectorXd log_probs(const ParamVector& p) const {
    const Eigen::VectorXd logits = *features_ * theta(p);
    Eigen::VectorXd out(logits.size());
    log_softmax(std::span<const double>(logits.data(), static_cast<std::size_t>(logits.size())),
                std::span<double>(out.data(), static_cast<std::size_t>(out.size())));
    return out;
  }

  Eigen::VectorXd probs(const ParamVector& p) const { return log_probs(p).array().exp(); }

  Trajectory sample(const ParamVector& p, Environment& env, std::uint64_t rng_seed) const {
    Rng rng(rng_seed);
    const Eigen::VectorXd lp = log_probs(p);
    if (!lp.allFinite()) throw std::runtime_error("non-finite logits in linear policy");
    return play(env, sample_categorical(std::span<const double>(lp.data(), lp.size()), rng), lp);
  }

  Trajectory greedy(const ParamVector& p, Environment& env) const {
    const Eigen::VectorXd lp = log_probs(p);
    return play(env, argmax(std::span<const double>(lp.data(), lp.size())), lp);
  }

  double log_prob(const ParamVector& p, const Trajectory& traj) const {
    if (traj.actions.size() != 1) throw std::invalid_argument("bandit trajectories have one step");
    return log_probs(p)[traj.actions[0][0]];
  }

  /// Σ_k c_k (φ_{a_k} - E_π[φ]), closed form.
  GradientEstimate weighted_logprob_grad(const ParamVector& p, const Batch& batch,
                                         std::span<const double> coefficients) const {
    if (coefficients.size() != batch.trajectory_count())
      throw std::invalid_argument("one coefficient per trajectory required");
    const Eigen::VectorXd mean_feature = features_->transpose() * probs(p);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(dim());
    GradientEstimate out;
    std::size_t idx = 0;
    for (const auto& group : batch.groups) {
      for (const auto& traj : group.samples) {
        const double c = coefficients[idx++];
        ++out.sample_count;
        if (c == 0.0) continue;
        g += c * (features_->row(traj.actions.at(0)[0]).transpose() - mean_feature);
      }
    }
    if (!g.allFinite()) throw std::runtime_error("non-finite gradient in segment theta");
    out.values.assign(g.data(), g.data() + g.size());
    return out;
  }

 private:
  static Eigen::Map<const Eigen::VectorXd> theta(const ParamVector& p) {
    return {p.values().data(), static_cast<Eigen::Index>(p.size())};
  }

  Trajectory play(Environment& env, int arm, const Eigen::VectorXd& lp) const {
    if (env.done()) throw EnvError("environment must be reset before a rollout");
    Trajectory t;
    t.env_seed = env.episode().seed;
    t.input_length = env.input_length();
    t.observations.push_back(env.observe().index());
    t.actions.push_back({arm, 0, 0});
    t.log_prob = lp[arm];
    StepResult r = env.step(env.decode(t.actions.back()));
    t.per_step_rewards.push_back(r.reward);
    t.total_reward = r.reward;
    t.cause = r.cause;
    return t;
  }

  std::shared_ptr<const Eigen::MatrixXd> features_;
};

}  // namespace urex
