#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "urex/envs/environment.hpp"
#include "urex/policy/recurrent.hpp"
#include "urex/random.hpp"
#include "urex/trainers/optim.hpp"

namespace urex {

/// Exploration rate decays linearly from eps_start to eps_end over
/// eps_decay_steps episodes.
struct QConfig {
  double eps_start = 1.0;
  double eps_end = 0.05;
  int eps_decay_steps = 1000;
  int sync_every = 10;
  double learning_rate = 1e-3;
  double discount = 0.99;
  double clip_norm = 10.0;

  void validate() const {
    if (eps_start < 0.0 || eps_start > 1.0 || eps_end < 0.0 || eps_end > 1.0)
      throw std::invalid_argument("epsilon must lie in [0, 1]");
    if (eps_decay_steps < 0) throw std::invalid_argument("epsilon decay steps must be >= 0");
    if (sync_every < 1) throw std::invalid_argument("sync frequency must be >= 1");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
    if (discount < 0.0 || discount > 1.0) throw std::invalid_argument("discount must lie in [0, 1]");
  }

  double epsilon(long episode) const {
    if (eps_decay_steps == 0 || episode >= eps_decay_steps) return eps_end;
    const double frac = static_cast<double>(episode) / eps_decay_steps;
    return eps_start + frac * (eps_end - eps_start);
  }
};

/// Flattens factored actions into one index (row-major over the factors).
class JointActionCodec {
 public:
  explicit JointActionCodec(std::vector<int> head_sizes) : sizes_(std::move(head_sizes)) {
    count_ = 1;
    for (int n : sizes_) count_ *= n;
  }
  int count() const { return count_; }
  int encode(const FactorIndices& f) const {
    int idx = 0;
    for (std::size_t j = 0; j < sizes_.size(); ++j) idx = idx * sizes_[j] + f[j];
    return idx;
  }
  FactorIndices decode(int idx) const {
    FactorIndices f{};
    for (std::size_t j = sizes_.size(); j-- > 0;) {
      f[j] = idx % sizes_[j];
      idx /= sizes_[j];
    }
    return f;
  }

 private:
  std::vector<int> sizes_;
  int count_ = 1;
};

/// Recurrent Q-network shape: the policy's LSTM with one linear head over
/// the joint action space.
inline NetworkShape q_shape(const Environment& env, int hidden) {
  NetworkShape s;
  s.observation_size = env.observation_size();
  s.head_sizes = {JointActionCodec(env.head_sizes()).count()};
  s.head_names = {"q"};
  s.hidden = hidden;
  return s;
}

struct QStepMetrics {
  double episode_reward = 0.0;
  double td_loss = 0.0;  // ½ Σ (y - Q)^2 over the episode
  double epsilon = 0.0;
  int steps = 0;
  bool synced = false;
};

/// One-step double Q-learning over one episode. Actions are ε-greedy on the
/// online network; each transition's target is
///   y = r                                        (terminal)
///   y = r + γ Q_target(s', argmax_a Q_online(s', a))   (otherwise)
/// and the squared TD errors of the episode are accumulated into one update
/// of the online parameters. The target network copies the online one
/// every `sync_every` updates. Uses per-step rewards.
inline QStepMetrics q_train_step(const RecurrentNet& net, ParamVector& online, ParamVector& target,
                                 OptimState& optim, Environment& env, const QConfig& cfg,
                                 long episode, std::uint64_t seed) {
  const JointActionCodec codec(env.head_sizes());
  if (net.shape().head_sizes.size() != 1 || net.shape().head_sizes[0] != codec.count())
    throw std::invalid_argument("Q-network head must cover the joint action space");
  Rng rng(seed);
  QStepMetrics m;
  m.epsilon = cfg.epsilon(episode);

  env.reset();
  ForwardTape tape = net.make_tape();
  std::vector<int> obs;
  std::vector<FactorIndices> acts;  // joint index in slot 0
  std::vector<double> rewards;
  while (!env.done()) {
    obs.push_back(env.observe().index());
    const auto q = net.forward_step(online, tape, obs.back(), acts.empty() ? nullptr : &acts.back());
    int a = 0;
    if (uniform01(rng) < m.epsilon) {
      a = static_cast<int>(uniform_int(rng, 0, codec.count() - 1));
    } else {
      a = argmax(q);
    }
    acts.push_back({a, 0, 0});
    const StepResult r = env.step(env.decode(codec.decode(a)));
    rewards.push_back(r.reward);
    m.episode_reward += r.reward;
  }
  m.steps = static_cast<int>(acts.size());

  // Target-network values along the same history.
  ForwardTape ttape = net.make_tape();
  for (std::size_t t = 0; t < obs.size(); ++t)
    net.forward_step(target, ttape, obs[t], t > 0 ? &acts[t - 1] : nullptr);

  const int A = codec.count();
  std::vector<double> G(obs.size() * static_cast<std::size_t>(A), 0.0);
  for (std::size_t t = 0; t < obs.size(); ++t) {
    double y = rewards[t];
    if (t + 1 < obs.size()) {
      const int best = argmax(tape.outputs(static_cast<int>(t + 1)));
      y += cfg.discount * ttape.outputs(static_cast<int>(t + 1))[static_cast<std::size_t>(best)];
    }
    const int a = acts[t][0];
    const double err = y - tape.outputs(static_cast<int>(t))[static_cast<std::size_t>(a)];
    G[t * static_cast<std::size_t>(A) + static_cast<std::size_t>(a)] = err;
    m.td_loss += 0.5 * err * err;
  }

  GradientEstimate g;
  g.values.assign(online.size(), 0.0);
  g.sample_count = 1;
  net.backward(online, tape, G, g.values);
  g = clip_gradient(std::move(g), cfg.clip_norm);
  adam_update(online, g, optim, cfg.learning_rate);
  if (!online.all_finite()) throw std::runtime_error("Q-network diverged to non-finite values");
  if (optim.step % cfg.sync_every == 0) {
    target = online;
    m.synced = true;
  }
  return m;
}

/// Greedy rollout under the Q-network (argmax Q, lowest index on ties).
inline Trajectory q_greedy_rollout(const RecurrentNet& net, const ParamVector& online,
                                   Environment& env) {
  const JointActionCodec codec(env.head_sizes());
  Trajectory traj;
  traj.env_seed = env.episode().seed;
  traj.input_length = env.input_length();
  ForwardTape tape = net.make_tape();
  while (!env.done()) {
    const int o = env.observe().index();
    const auto q = net.forward_step(online, tape, o, traj.actions.empty() ? nullptr : &traj.actions.back());
    const int a = argmax(q);
    traj.observations.push_back(o);
    traj.actions.push_back({a, 0, 0});
    const StepResult r = env.step(env.decode(codec.decode(a)));
    traj.per_step_rewards.push_back(r.reward);
    traj.total_reward += r.reward;
    traj.cause = r.cause;
  }
  return traj;
}

}  // namespace urex
