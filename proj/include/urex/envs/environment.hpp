#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "urex/envs/types.hpp"
#include "urex/random.hpp"
#include "urex/trajectory.hpp"

namespace urex {

class EnvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scripted strategies available to oracle_rollout on BinarySearch.
enum class SearchStrategy { Linear, Binary };

/// Episodic environment driven by a hidden initialization.
///
/// Every episode is fully determined by an EpisodeKey. reset() draws the
/// next key from a sub-stream seeded by the environment seed, so a fresh
/// instance built from the same (task, seed, range) replays the same
/// sequence of episodes.
class Environment {
 public:
  Environment(TaskId task, std::uint64_t seed, LengthRange range)
      : task_(task), seed_(seed), range_(range), key_stream_(mix64(seed)) {}
  virtual ~Environment() = default;

  TaskId task() const { return task_; }
  std::uint64_t seed() const { return seed_; }
  const LengthRange& length_range() const { return range_; }
  void set_length_range(LengthRange r) {
    validate_range(r);
    range_ = r;
  }

  Observation reset() { return reset_episode(EpisodeKey{key_stream_(), 0}); }

  Observation reset_episode(EpisodeKey key) {
    int length = key.length;
    if (length == 0) {
      Rng len_rng(derive_seed(key.seed, {0x1E}));
      length = static_cast<int>(uniform_int(len_rng, range_.lo, range_.hi));
    }
    Rng rng(mix64(key.seed));
    key_ = EpisodeKey{key.seed, length};
    steps_ = 0;
    done_ = false;
    return resample(rng, length);
  }

  StepResult step(const Action& action) {
    if (done_) throw EnvError("step() called after the episode ended");
    ++steps_;
    StepResult r = apply(action);
    done_ = r.done;
    return r;
  }

  bool done() const { return done_; }
  int steps() const { return steps_; }
  const EpisodeKey& episode() const { return key_; }
  int input_length() const { return key_.length; }

  /// Total reward collected by a perfect policy on the current episode.
  virtual double max_total_reward() const = 0;

  /// Sizes of the categorical factors of an action.
  virtual std::vector<int> head_sizes() const = 0;
  virtual int observation_size() const = 0;
  virtual Action decode(const FactorIndices& f) const = 0;
  virtual FactorIndices encode(const Action& a) const = 0;

  /// Plays a perfect scripted policy from the current (freshly reset) state.
  virtual Trajectory oracle_rollout(SearchStrategy strategy = SearchStrategy::Binary) = 0;

  virtual std::string describe_observation(const Observation& o) const = 0;
  virtual std::string describe_action(const Action& a) const = 0;

  /// Current observation without advancing the episode.
  virtual Observation observe() const = 0;

  virtual std::unique_ptr<Environment> clone() const = 0;

 protected:
  virtual Observation resample(Rng& rng, int length) = 0;
  virtual StepResult apply(const Action& action) = 0;
  virtual void validate_range(const LengthRange& r) const {
    if (r.empty()) throw std::invalid_argument("empty length range");
  }

  /// Shared by oracle implementations: run `action` and record it.
  void record(Trajectory& t, const Action& a) {
    t.observations.push_back(observe().index());
    t.actions.push_back(encode(a));
    StepResult r = step(a);
    t.per_step_rewards.push_back(r.reward);
    t.total_reward += r.reward;
    t.cause = r.cause;
  }
  Trajectory begin_trajectory() const {
    Trajectory t;
    t.env_seed = key_.seed;
    t.input_length = key_.length;
    return t;
  }

 private:
  TaskId task_;
  std::uint64_t seed_;
  LengthRange range_;
  Rng key_stream_;
  EpisodeKey key_{};
  int steps_ = 0;
  bool done_ = true;
};

}  // namespace urex
