#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "urex/envs/environment.hpp"

namespace urex {

struct BanditOptions {
  int num_actions = 10000;
  int dim = 30;
  double beta = 8.0;
};

/// Payoffs r_i = u_i^beta with u_i ~ U[0, 1), and one standard-normal
/// feature row per arm.
struct BanditInstance {
  std::vector<double> payoffs;
  Eigen::MatrixXd features;  // num_actions x dim
};

inline BanditInstance bandit_payoffs(std::uint64_t seed, int num_actions, double beta,
                                     int dim = 30) {
  if (num_actions < 1) throw std::invalid_argument("bandit needs at least one action");
  if (!(beta >= 0.0)) throw std::invalid_argument("bandit beta must be non-negative");
  if (dim < 1) throw std::invalid_argument("bandit feature dimension must be positive");
  Rng rng(derive_seed(seed, {0xBA}));
  BanditInstance inst;
  inst.payoffs.resize(static_cast<std::size_t>(num_actions));
  for (double& r : inst.payoffs) r = std::pow(uniform01(rng), beta);
  inst.features.resize(num_actions, dim);
  for (int a = 0; a < num_actions; ++a)
    for (int j = 0; j < dim; ++j) inst.features(a, j) = standard_normal(rng);
  return inst;
}

/// Single-step task: choose an arm, receive its payoff. The hidden state is
/// fixed for the lifetime of the instance.
class BanditEnv final : public Environment {
 public:
  BanditEnv(std::uint64_t seed, BanditOptions opts = {})
      : Environment(TaskId::Bandit, seed, LengthRange{1, 1}),
        opts_(opts),
        inst_(bandit_payoffs(seed, opts.num_actions, opts.beta, opts.dim)) {}

  /// Fixed payoffs and features; `seed` only names the instance.
  BanditEnv(std::uint64_t seed, BanditInstance inst)
      : Environment(TaskId::Bandit, seed, LengthRange{1, 1}), inst_(std::move(inst)) {
    if (inst_.payoffs.empty()) throw std::invalid_argument("bandit needs at least one action");
    if (inst_.features.rows() != static_cast<Eigen::Index>(inst_.payoffs.size()))
      throw std::invalid_argument("one feature row per arm required");
    opts_.num_actions = static_cast<int>(inst_.payoffs.size());
    opts_.dim = static_cast<int>(inst_.features.cols());
    opts_.beta = 0.0;
  }

  const BanditInstance& instance() const { return inst_; }
  const std::vector<double>& payoffs() const { return inst_.payoffs; }
  const Eigen::MatrixXd& features() const { return inst_.features; }
  int num_actions() const { return opts_.num_actions; }

  double max_total_reward() const override {
    return *std::max_element(inst_.payoffs.begin(), inst_.payoffs.end());
  }
  std::vector<int> head_sizes() const override { return {opts_.num_actions}; }
  int observation_size() const override { return 1; }

  Action decode(const FactorIndices& f) const override { return BanditAction{f[0]}; }
  FactorIndices encode(const Action& a) const override {
    const auto* b = std::get_if<BanditAction>(&a);
    if (b == nullptr) throw EnvError("Bandit expects a BanditAction");
    return {b->arm, 0, 0};
  }
  Observation observe() const override { return Observation::unit(); }
  std::string describe_observation(const Observation&) const override { return "."; }
  std::string describe_action(const Action& a) const override {
    return "ARM(" + std::to_string(std::get<BanditAction>(a).arm) + ")";
  }

  Trajectory oracle_rollout(SearchStrategy) override {
    throw EnvError("no oracle rollout for the bandit task");
  }

  std::unique_ptr<Environment> clone() const override { return std::make_unique<BanditEnv>(*this); }

 protected:
  Observation resample(Rng&, int) override { return Observation::unit(); }

  StepResult apply(const Action& action) override {
    const auto* b = std::get_if<BanditAction>(&action);
    if (b == nullptr) throw EnvError("Bandit expects a BanditAction");
    if (b->arm < 0 || b->arm >= opts_.num_actions) throw EnvError("arm index out of range");
    StepResult r;
    r.obs = Observation::unit();
    r.reward = inst_.payoffs[static_cast<std::size_t>(b->arm)];
    r.done = true;
    r.cause = TerminationCause::Completed;
    return r;
  }

 private:
  BanditOptions opts_;
  BanditInstance inst_;
};

}  // namespace urex
