#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "urex/curriculum.hpp"
#include "urex/envs.hpp"
#include "urex/harness/trial_spec.hpp"
#include "urex/policy/recurrent.hpp"
#include "urex/trainers/qlearning.hpp"
#include "urex/trainers/train_step.hpp"

namespace urex::harness {

using GreedyPolicy = std::function<Trajectory(Environment&)>;

struct EvalResult {
  double mean_reward = 0.0;
  double perfect_fraction = 0.0;
  bool success = false;
};

/// Environment options wide enough for any length in `range`.
inline EnvOptions env_options_for(TaskId task, LengthRange range) {
  EnvOptions o;
  if (is_tape_task(task)) o.tape.max_length = std::max(o.tape.max_length, range.hi);
  return o;
}

/// Plays `eval.episodes` consecutive greedy episodes from a fixed evaluation
/// stream, so every call scores the same instances.
inline EvalResult evaluate_greedy(TaskId task, const EvalConfig& eval, std::uint64_t seed,
                                  const GreedyPolicy& policy) {
  auto env = make_env(task, derive_seed(seed, {0xE7A1}), eval.range, env_options_for(task, eval.range));
  EvalResult r;
  int perfect = 0;
  for (int i = 0; i < eval.episodes; ++i) {
    env->reset();
    const double best = env->max_total_reward();
    const Trajectory t = policy(*env);
    r.mean_reward += t.total_reward;
    if (t.total_reward >= best - 1e-9) ++perfect;
  }
  r.mean_reward /= eval.episodes;
  r.perfect_fraction = static_cast<double>(perfect) / eval.episodes;
  r.success = eval.require_perfect ? perfect == eval.episodes : r.mean_reward >= eval.threshold;
  return r;
}

struct TrialResult {
  bool success = false;
  long success_step = -1;
  long steps_run = 0;
  double final_expected_reward = 0.0;
  std::vector<double> reward_curve;
  std::vector<double> weight_variance_curve;  // UREX only
  std::vector<EvalResult> evaluations;
  int final_max_len = 0;
  std::string failure_cause;  // empty unless training aborted
  ParamVector params;
};

struct TrialOutputs {
  std::string metrics_path;     // JSONL, one record per step; empty disables
  std::string checkpoint_path;  // final parameters; empty disables
};

inline nlohmann::json step_record(const TrialSpec& spec, const StepMetrics& m) {
  nlohmann::json j;
  j["step"] = m.step;
  j["method"] = std::string(to_string(spec.method));
  j["tau"] = spec.tau;
  j["eta"] = spec.eta;
  j["clip"] = spec.clip;
  j["mean_reward"] = m.mean_reward;
  if (m.weight_variance) j["weight_variance"] = *m.weight_variance;
  j["grad_norm_pre"] = m.grad_norm_pre;
  j["grad_norm_post"] = m.grad_norm_post;
  j["wall_ms"] = m.wall_ms;
  j["max_len"] = m.max_len;
  return j;
}

namespace detail {

inline double tail_mean(const std::vector<double>& v, std::size_t n) {
  if (v.empty()) return 0.0;
  const std::size_t k = std::min(n, v.size());
  double s = 0.0;
  for (std::size_t i = v.size() - k; i < v.size(); ++i) s += v[i];
  return s / static_cast<double>(k);
}

inline void stamp(ParamVector& p, const TrialSpec& spec) {
  p.metadata()["task"] = std::string(to_string(spec.task));
  p.metadata()["method"] = std::string(to_string(spec.method));
  p.metadata()["hidden"] = std::to_string(spec.hidden);
}

inline TrialResult run_policy_gradient(const TrialSpec& spec, const TrialOutputs& out) {
  TrialResult res;
  const LengthRange range = default_length_range(spec.task);
  auto env = make_env(spec.task, derive_seed(spec.restart_seed, {0xE4}), range);
  const RecurrentNet net(policy_shape(*env, spec.hidden));
  res.params = net.init_params(derive_seed(spec.restart_seed, {0x1417}));
  OptimState optim(res.params.size());
  const TrainConfig cfg = spec.train_config();
  std::optional<Curriculum> curriculum;
  if (spec.use_curriculum) curriculum.emplace(spec.curriculum);

  std::ofstream metrics;
  if (!out.metrics_path.empty()) {
    metrics.open(out.metrics_path);
    if (!metrics) throw std::runtime_error("cannot write " + out.metrics_path);
  }
  const GreedyPolicy greedy = [&](Environment& e) { return net.greedy(res.params, e); };

  for (long step = 0; step < spec.max_steps; ++step) {
    StepMetrics m;
    try {
      m = train_step(net, res.params, optim, *env, cfg, step, curriculum ? &*curriculum : nullptr);
    } catch (const std::exception& e) {
      res.failure_cause = e.what();
      break;
    }
    res.steps_run = step + 1;
    res.reward_curve.push_back(m.mean_reward);
    if (m.weight_variance) res.weight_variance_curve.push_back(*m.weight_variance);
    res.final_max_len = m.max_len;
    if (metrics) metrics << step_record(spec, m).dump() << '\n';
    if ((step + 1) % spec.eval.every == 0 || step + 1 == spec.max_steps) {
      try {
        res.evaluations.push_back(evaluate_greedy(spec.task, spec.eval, spec.restart_seed, greedy));
      } catch (const std::exception& e) {
        res.failure_cause = e.what();
        break;
      }
      if (res.evaluations.back().success) {
        res.success = true;
        res.success_step = step + 1;
        break;
      }
    }
  }
  res.final_expected_reward = tail_mean(res.reward_curve, 10);
  return res;
}

inline TrialResult run_qlearning(const TrialSpec& spec, const TrialOutputs& out) {
  TrialResult res;
  const LengthRange range = default_length_range(spec.task);
  auto env = make_env(spec.task, derive_seed(spec.restart_seed, {0xE4}), range);
  const RecurrentNet net(q_shape(*env, spec.hidden));
  res.params = net.init_params(derive_seed(spec.restart_seed, {0x1417}));
  ParamVector target = res.params;
  OptimState optim(res.params.size());
  std::optional<Curriculum> curriculum;
  if (spec.use_curriculum) {
    curriculum.emplace(spec.curriculum);
    env->set_length_range({spec.curriculum.min_length, curriculum->current_max_length()});
  }

  std::ofstream metrics;
  if (!out.metrics_path.empty()) {
    metrics.open(out.metrics_path);
    if (!metrics) throw std::runtime_error("cannot write " + out.metrics_path);
  }
  const GreedyPolicy greedy = [&](Environment& e) { return q_greedy_rollout(net, res.params, e); };

  for (long ep = 0; ep < spec.max_steps; ++ep) {
    QStepMetrics q;
    try {
      q = q_train_step(net, res.params, target, optim, *env, spec.q, ep,
                       derive_seed(spec.restart_seed, {static_cast<std::uint64_t>(ep), 0x9}));
      if (!res.params.all_finite()) throw std::runtime_error("parameters diverged to non-finite values");
    } catch (const std::exception& e) {
      res.failure_cause = e.what();
      break;
    }
    if (curriculum && curriculum->record_episode(q.episode_reward, env->max_total_reward()))
      env->set_length_range({spec.curriculum.min_length, curriculum->current_max_length()});
    res.steps_run = ep + 1;
    res.reward_curve.push_back(q.episode_reward);
    res.final_max_len = env->length_range().hi;
    if (metrics) {
      nlohmann::json j;
      j["step"] = ep;
      j["method"] = "qlearn";
      j["tau"] = spec.tau;
      j["eta"] = spec.q.learning_rate;
      j["clip"] = spec.q.clip_norm;
      j["mean_reward"] = q.episode_reward;
      j["td_loss"] = q.td_loss;
      j["epsilon"] = q.epsilon;
      j["max_len"] = res.final_max_len;
      metrics << j.dump() << '\n';
    }
    if ((ep + 1) % spec.eval.every == 0 || ep + 1 == spec.max_steps) {
      try {
        res.evaluations.push_back(evaluate_greedy(spec.task, spec.eval, spec.restart_seed, greedy));
      } catch (const std::exception& e) {
        res.failure_cause = e.what();
        break;
      }
      if (res.evaluations.back().success) {
        res.success = true;
        res.success_step = ep + 1;
        break;
      }
    }
  }
  res.final_expected_reward = tail_mean(res.reward_curve, 10);
  return res;
}

}  // namespace detail

/// Trains one (task, method, τ, η, c, restart) configuration until success
/// or the step budget runs out. Success is checked every `eval.every` steps
/// and counts if it is ever reached. Divergence ends the trial as a failure
/// with the cause recorded.
inline TrialResult run_trial(const TrialSpec& spec, const TrialOutputs& out = {}) {
  spec.validate();
  TrialResult res = spec.method == Method::QLEARN ? detail::run_qlearning(spec, out)
                                                  : detail::run_policy_gradient(spec, out);
  detail::stamp(res.params, spec);
  if (!out.checkpoint_path.empty()) save_checkpoint(out.checkpoint_path, res.params);
  return res;
}

}  // namespace urex::harness
