#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "urex/analysis.hpp"
#include "urex/curriculum.hpp"
#include "urex/envs/environment.hpp"
#include "urex/policy/params.hpp"
#include "urex/random.hpp"
#include "urex/trainers/coefficients.hpp"
#include "urex/trainers/optim.hpp"
#include "urex/trajectory.hpp"

namespace urex {

enum class Method { MENT, UREX, QLEARN };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::MENT: return "ment";
    case Method::UREX: return "urex";
    case Method::QLEARN: return "qlearn";
  }
  return "?";
}

inline Method parse_method(std::string_view s) {
  if (s == "ment" || s == "MENT" || s == "reinforce") return Method::MENT;
  if (s == "urex" || s == "UREX") return Method::UREX;
  if (s == "qlearn" || s == "QLEARN" || s == "q") return Method::QLEARN;
  throw std::invalid_argument("unknown method: " + std::string(s));
}

struct TrainConfig {
  Method method = Method::UREX;
  double tau = 0.1;
  double learning_rate = 0.01;
  double clip_norm = 40.0;
  int K = 10;
  int N = 40;
  int max_steps = 2000;
  std::uint64_t seed = 0;

  void validate() const {
    if (method == Method::UREX && !(tau > 0.0)) throw std::invalid_argument("UREX requires tau > 0");
    if (!(tau >= 0.0)) throw std::invalid_argument("tau must be non-negative");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
    if (!(clip_norm > 0.0)) throw std::invalid_argument("clip norm must be positive");
    if (K < 2) throw std::invalid_argument("K >= 2 is required for centering/normalization");
    if (N < 1) throw std::invalid_argument("N must be positive");
    if (max_steps < 0) throw std::invalid_argument("max_steps must be non-negative");
  }
};

/// Learning-rate and clipping grids searched for every (task, method, τ).
inline constexpr std::array<double, 3> kLearningRateGrid = {0.1, 0.01, 0.001};
inline constexpr std::array<double, 4> kClipGrid = {1.0, 10.0, 40.0, 100.0};

template <class M>
concept PolicyModel = requires(const M& m, const ParamVector& p, Environment& env,
                               const Batch& b, const Trajectory& t, std::span<const double> c) {
  { m.sample(p, env, std::uint64_t{}) } -> std::same_as<Trajectory>;
  { m.greedy(p, env) } -> std::same_as<Trajectory>;
  { m.log_prob(p, t) } -> std::convertible_to<double>;
  { m.weighted_logprob_grad(p, b, c) } -> std::same_as<GradientEstimate>;
};

struct StepMetrics {
  long step = 0;
  double mean_reward = 0.0;
  double coef_mean = 0.0;
  double coef_min = 0.0;
  double coef_max = 0.0;
  double grad_norm_pre = 0.0;
  double grad_norm_post = 0.0;
  std::optional<double> weight_variance;  // UREX only
  int max_len = 0;
  double wall_ms = 0.0;
};

/// Draws N hidden initializations and K samples from each. Group n of step
/// s uses seed derive_seed(config.seed, {s, n}); the length comes from the
/// curriculum when one is given, otherwise from the environment's range.
template <PolicyModel Model>
Batch collect_batch(const Model& model, const ParamVector& params, Environment& env,
                    const TrainConfig& config, long step, const Curriculum* curriculum,
                    std::vector<double>* max_rewards = nullptr) {
  Batch batch;
  batch.groups.resize(static_cast<std::size_t>(config.N));
  for (int n = 0; n < config.N; ++n) {
    auto& group = batch.groups[static_cast<std::size_t>(n)];
    const std::uint64_t key_seed =
        derive_seed(config.seed, {static_cast<std::uint64_t>(step), static_cast<std::uint64_t>(n)});
    int length = 0;
    if (curriculum != nullptr) {
      Rng rng(derive_seed(key_seed, {0xC0}));
      length = curriculum->sample_length(rng);
    }
    group.key = EpisodeKey{key_seed, length};
    group.samples.reserve(static_cast<std::size_t>(config.K));
    for (int k = 0; k < config.K; ++k) {
      env.reset_episode(group.key);
      if (max_rewards != nullptr) max_rewards->push_back(env.max_total_reward());
      group.samples.push_back(
          model.sample(params, env, derive_seed(key_seed, {static_cast<std::uint64_t>(k), 1})));
    }
  }
  return batch;
}

/// Per-trajectory coefficients for the whole batch, group by group.
/// `weight_variance` receives the mean (over groups) variance of the
/// normalized importance weights when the method is UREX.
inline std::vector<double> batch_coefficients(const Batch& batch, const TrainConfig& config,
                                              double* weight_variance = nullptr) {
  std::vector<double> coeffs;
  coeffs.reserve(batch.trajectory_count());
  std::vector<double> rewards, logps;
  double var_sum = 0.0;
  for (const auto& g : batch.groups) {
    rewards.clear();
    logps.clear();
    for (const auto& t : g.samples) {
      rewards.push_back(t.total_reward);
      logps.push_back(t.log_prob);
    }
    const int groups = static_cast<int>(batch.groups.size());
    std::vector<double> c;
    if (config.method == Method::UREX) {
      c = urex_coefficients(rewards, logps, config.tau, groups);
      var_sum += analysis::weight_variance(importance_weights(rewards, logps, config.tau));
    } else if (config.method == Method::MENT) {
      c = ment_coefficients(rewards, logps, config.tau, groups, true);
    } else {
      throw std::invalid_argument("batch_coefficients: Q-learning has no policy coefficients");
    }
    coeffs.insert(coeffs.end(), c.begin(), c.end());
  }
  if (weight_variance != nullptr)
    *weight_variance = batch.groups.empty() ? 0.0 : var_sum / static_cast<double>(batch.groups.size());
  return coeffs;
}

/// One stochastic gradient step of MENT or UREX: sample, weight, clip, Adam.
template <PolicyModel Model>
StepMetrics train_step(const Model& model, ParamVector& params, OptimState& optim, Environment& env,
                       const TrainConfig& config, long step, Curriculum* curriculum = nullptr) {
  const auto t0 = std::chrono::steady_clock::now();
  StepMetrics m;
  m.step = step;

  std::vector<double> max_rewards;
  const Batch batch = collect_batch(model, params, env, config, step, curriculum, &max_rewards);

  double total = 0.0;
  std::size_t i = 0;
  for (const auto& g : batch.groups) {
    for (const auto& t : g.samples) {
      total += t.total_reward;
      if (curriculum != nullptr) curriculum->record_episode(t.total_reward, max_rewards[i]);
      ++i;
    }
  }
  m.mean_reward = total / static_cast<double>(batch.trajectory_count());

  double wvar = 0.0;
  const auto coeffs = batch_coefficients(batch, config, &wvar);
  if (config.method == Method::UREX) m.weight_variance = wvar;
  m.coef_mean = mean_of(coeffs);
  m.coef_min = *std::min_element(coeffs.begin(), coeffs.end());
  m.coef_max = *std::max_element(coeffs.begin(), coeffs.end());

  GradientEstimate g = model.weighted_logprob_grad(params, batch, coeffs);
  m.grad_norm_pre = g.norm();
  g = clip_gradient(std::move(g), config.clip_norm);
  m.grad_norm_post = g.norm();
  adam_update(params, g, optim, config.learning_rate);
  if (!params.all_finite()) throw std::runtime_error("parameters diverged to non-finite values");

  m.max_len = curriculum != nullptr ? curriculum->current_max_length() : env.length_range().hi;
  m.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return m;
}

}  // namespace urex
