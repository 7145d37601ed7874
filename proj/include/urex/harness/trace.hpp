#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "urex/envs.hpp"

namespace urex::harness {

/// One line of a rendered episode: the environment state the agent acted
/// from, what it observed, and what it did. The terminal row has action "--".
struct TraceStep {
  std::vector<std::string> state;  // registers, or the read-head row and column
  std::string observation;
  std::string action;
  double reward = 0.0;
};

struct EpisodeTrace {
  std::vector<std::string> state_columns;
  std::vector<TraceStep> rows;
  double total_reward = 0.0;
};

inline std::vector<std::string> state_columns(const Environment& env) {
  if (env.task() == TaskId::BinarySearch) return {"R0", "R1", "R2"};
  if (is_tape_task(env.task())) return {"row", "col"};
  return {};
}

inline std::vector<std::string> state_cells(const Environment& env) {
  if (const auto* s = dynamic_cast<const BinarySearchEnv*>(&env)) {
    const auto& r = s->registers();
    return {std::to_string(r[0]), std::to_string(r[1]), std::to_string(r[2])};
  }
  if (const auto* t = dynamic_cast<const TapeEnv*>(&env)) return {std::to_string(t->row()), std::to_string(t->col())};
  return {};
}

/// Runs `policy` on the freshly reset `env`, then replays the recorded
/// actions on a snapshot taken before the rollout and records each state.
/// Throws if the replay does not reproduce the rollout's rewards.
inline EpisodeTrace trace_episode(Environment& env, const std::function<Trajectory(Environment&)>& policy) {
  const auto replay = env.clone();
  const Trajectory traj = policy(env);
  EpisodeTrace out;
  out.state_columns = state_columns(*replay);
  for (std::size_t t = 0; t < traj.size(); ++t) {
    TraceStep row;
    row.state = state_cells(*replay);
    row.observation = replay->describe_observation(replay->observe());
    const Action a = replay->decode(traj.actions[t]);
    row.action = replay->describe_action(a);
    row.reward = replay->step(a).reward;
    if (row.reward != traj.per_step_rewards[t])
      throw std::runtime_error("trace replay diverged at step " + std::to_string(t + 1));
    out.total_reward += row.reward;
    out.rows.push_back(std::move(row));
  }
  out.rows.push_back({state_cells(*replay), replay->describe_observation(replay->observe()), "--", 0.0});
  return out;
}

/// Fixed-width text table: state columns | s_t | a_t | r_t.
inline std::string render_trace(const EpisodeTrace& trace) {
  std::vector<std::string> header = trace.state_columns;
  header.insert(header.end(), {"s_t", "a_t", "r_t"});
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : trace.rows) {
    std::vector<std::string> line = r.state;
    std::ostringstream rew;
    rew << r.reward;
    line.insert(line.end(), {r.observation, r.action, r.action == "--" ? "" : rew.str()});
    cells.push_back(std::move(line));
  }
  std::vector<std::size_t> width(header.size());
  for (std::size_t j = 0; j < header.size(); ++j) {
    width[j] = header[j].size();
    for (const auto& line : cells) width[j] = std::max(width[j], line[j].size());
  }
  const std::size_t split = trace.state_columns.size();
  auto emit = [&](std::ostringstream& o, const std::vector<std::string>& line) {
    for (std::size_t j = 0; j < line.size(); ++j) {
      if (j > 0) o << (j >= split ? " | " : " ");
      o << std::string(width[j] - line[j].size(), ' ') << line[j];
    }
    o << '\n';
  };
  std::ostringstream o;
  emit(o, header);
  for (const auto& line : cells) emit(o, line);
  o << "total reward " << trace.total_reward << '\n';
  return o.str();
}

}  // namespace urex::harness
