#pragma once

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <vector>

#include "urex/envs/types.hpp"

namespace urex {

/// One episode: the observation fed to the policy before each action, the
/// factored action taken, and the rewards the environment returned.
struct Trajectory {
  std::vector<int> observations;
  std::vector<FactorIndices> actions;
  std::vector<double> per_step_rewards;
  double total_reward = 0.0;
  double log_prob = 0.0;
  std::uint64_t env_seed = 0;
  int input_length = 0;
  TerminationCause cause = TerminationCause::None;

  std::size_t size() const { return actions.size(); }

  double reward_sum() const {
    return std::accumulate(per_step_rewards.begin(), per_step_rewards.end(), 0.0);
  }
};

/// K trajectories sampled from the same hidden initialization h.
struct TrajectoryGroup {
  EpisodeKey key;
  std::vector<Trajectory> samples;
};

/// N groups; the sampling unit of the policy-gradient estimators.
struct Batch {
  std::vector<TrajectoryGroup> groups;

  std::size_t trajectory_count() const {
    std::size_t n = 0;
    for (const auto& g : groups) n += g.samples.size();
    return n;
  }
};

}  // namespace urex
