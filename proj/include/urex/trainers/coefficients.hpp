#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "urex/policy/softmax.hpp"

namespace urex {

/// Self-normalized importance weights softmax_k(r_k/τ - log π_k): the
/// proposal is the policy, the target the reward softmax at temperature τ.
inline std::vector<double> importance_weights(std::span<const double> rewards,
                                              std::span<const double> log_probs, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("importance weights need tau > 0");
  if (rewards.empty() || rewards.size() != log_probs.size())
    throw std::invalid_argument("rewards and log-probs must be non-empty and the same length");
  if (!all_finite(rewards) || !all_finite(log_probs))
    throw std::invalid_argument("non-finite reward or log-probability");
  std::vector<double> scores(rewards.size());
  for (std::size_t k = 0; k < scores.size(); ++k) scores[k] = rewards[k] / tau - log_probs[k];
  std::vector<double> w(scores.size());
  softmax(scores, w);
  return w;
}

inline double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

/// Per-sample coefficients of ∇ log π for one group of K samples under the
/// UREX estimator: r̂_k / K + τ ŵ_k, with r̂ the group-centered reward and ŵ
/// the (uncentered) normalized importance weights, all divided by the
/// number of groups.
inline std::vector<double> urex_coefficients(std::span<const double> rewards,
                                             std::span<const double> log_probs, double tau,
                                             int num_groups = 1) {
  if (rewards.size() < 2) throw std::invalid_argument("UREX needs K >= 2 samples per group");
  if (num_groups < 1) throw std::invalid_argument("num_groups must be positive");
  const auto w = importance_weights(rewards, log_probs, tau);
  const double k = static_cast<double>(rewards.size());
  const double baseline = mean_of(rewards);
  std::vector<double> c(rewards.size());
  for (std::size_t i = 0; i < c.size(); ++i)
    c[i] = ((rewards[i] - baseline) / k + tau * w[i]) / num_groups;
  return c;
}

/// MENT (entropy-regularized REINFORCE) coefficients r - τ log π - τ,
/// mean-centered within the group when `center` is set, divided by N K.
/// τ = 0 gives REINFORCE with the group-mean baseline.
inline std::vector<double> ment_coefficients(std::span<const double> rewards,
                                             std::span<const double> log_probs, double tau,
                                             int num_groups = 1, bool center = true) {
  if (rewards.empty() || rewards.size() != log_probs.size())
    throw std::invalid_argument("rewards and log-probs must be non-empty and the same length");
  if (center && rewards.size() < 2) throw std::invalid_argument("centering needs K >= 2");
  if (!(tau >= 0.0)) throw std::invalid_argument("MENT needs tau >= 0");
  if (!all_finite(rewards) || !all_finite(log_probs))
    throw std::invalid_argument("non-finite reward or log-probability");
  std::vector<double> raw(rewards.size());
  for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = rewards[i] - tau * log_probs[i] - tau;
  const double offset = center ? mean_of(raw) : 0.0;
  const double scale = static_cast<double>(num_groups) * static_cast<double>(raw.size());
  for (double& v : raw) v = (v - offset) / scale;
  return raw;
}

}  // namespace urex
