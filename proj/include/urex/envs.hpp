#pragma once

#include <cstdint>
#include <memory>
#include <sstream>
#include <string>

#include "urex/envs/bandit.hpp"
#include "urex/envs/binary_search.hpp"
#include "urex/envs/environment.hpp"
#include "urex/envs/tape.hpp"
#include "urex/envs/types.hpp"

namespace urex {

struct EnvOptions {
  TapeOptions tape{};
  SearchOptions search{};
  BanditOptions bandit{};
};

/// Default episode-length range per task: [2, 33] for tape tasks, n in
/// [32, 512] for BinarySearch.
inline LengthRange default_length_range(TaskId task) {
  if (task == TaskId::BinarySearch) return {32, 512};
  if (task == TaskId::Bandit) return {1, 1};
  return {2, 33};
}

inline std::unique_ptr<Environment> make_env(TaskId task, std::uint64_t seed, LengthRange range,
                                             const EnvOptions& opts = {}) {
  if (range.empty()) throw std::invalid_argument("empty length range");
  switch (task) {
    case TaskId::Copy:
    case TaskId::DuplicatedInput:
    case TaskId::RepeatCopy:
    case TaskId::Reverse:
    case TaskId::ReversedAddition:
      return std::make_unique<TapeEnv>(task, seed, range, opts.tape);
    case TaskId::BinarySearch:
      return std::make_unique<BinarySearchEnv>(seed, range, opts.search);
    case TaskId::Bandit:
      return std::make_unique<BanditEnv>(seed, opts.bandit);
  }
  throw std::invalid_argument("unknown task");
}

inline std::unique_ptr<Environment> make_env(TaskId task, std::uint64_t seed) {
  return make_env(task, seed, default_length_range(task));
}

/// One line per step: `t, obs, action, reward, done`, where obs is the
/// observation the action was chosen from.
inline std::string dump_trace(Environment& env, const Trajectory& traj) {
  std::ostringstream out;
  bool done = false;
  for (std::size_t t = 0; t < traj.size(); ++t) {
    done = t + 1 == traj.size() && traj.cause != TerminationCause::None;
    Observation o = env.observe();
    o.value = traj.observations[t];
    out << (t + 1) << ", " << env.describe_observation(o) << ", "
        << env.describe_action(env.decode(traj.actions[t])) << ", " << traj.per_step_rewards[t]
        << ", " << (done ? 1 : 0) << "\n";
  }
  return out.str();
}

}  // namespace urex
