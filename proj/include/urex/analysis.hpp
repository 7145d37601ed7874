#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "urex/policy/softmax.hpp"

namespace urex::analysis {

/// Rewards over an enumerable action set for one fixed h, and a temperature.
struct SmallProblem {
  std::vector<double> rewards;
  double tau = 1.0;

  void validate() const {
    if (rewards.empty()) throw std::invalid_argument("SmallProblem needs at least one action");
    if (!(tau > 0.0)) throw std::invalid_argument("SmallProblem needs tau > 0");
    if (!all_finite(rewards)) throw std::invalid_argument("SmallProblem rewards must be finite");
  }
};

struct AlphaSolution {
  double alpha = 0.0;
  std::vector<double> policy;
  double residual = 0.0;  // |Σ τπ*/(α - r) - 1|
  int iterations = 0;
};

/// π*(a) ∝ exp(r(a)/τ).
inline std::vector<double> optimal_policy_rl(const SmallProblem& p) {
  p.validate();
  std::vector<double> scaled(p.rewards.size());
  for (std::size_t i = 0; i < scaled.size(); ++i) scaled[i] = p.rewards[i] / p.tau;
  std::vector<double> out(scaled.size());
  softmax(scaled, out);
  return out;
}

/// Σ_a π(a) [r(a) - τ log π(a)].
inline double rl_objective(const SmallProblem& p, std::span<const double> policy) {
  double s = 0.0;
  for (std::size_t i = 0; i < policy.size(); ++i) {
    if (policy[i] > 0.0) s += policy[i] * (p.rewards[i] - p.tau * std::log(policy[i]));
  }
  return s;
}

/// KL(a ‖ b) for strictly positive b.
inline double kl_divergence(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] > 0.0) s += a[i] * (std::log(a[i]) - std::log(b[i]));
  return s;
}

/// Σ_a [π(a) r(a) + τ π*(a) log π(a)].
inline double urex_objective(const SmallProblem& p, std::span<const double> policy) {
  p.validate();
  if (policy.size() != p.rewards.size()) throw std::invalid_argument("policy size mismatch");
  const auto star = optimal_policy_rl(p);
  double s = 0.0;
  for (std::size_t i = 0; i < policy.size(); ++i) {
    if (!(policy[i] > 0.0)) throw std::invalid_argument("urex_objective needs a strictly positive policy");
    s += policy[i] * p.rewards[i] + p.tau * star[i] * std::log(policy[i]);
  }
  return s;
}

/// Maximizer of urex_objective on the simplex: π(a) = τ π*(a) / (α - r(a))
/// with the unique α > max r normalizing it, located by bisection on the
/// strictly decreasing map α ↦ Σ τ π*(a) / (α - r(a)).
inline AlphaSolution optimal_policy_urex(const SmallProblem& p, double tol = 1e-12,
                                         int max_iter = 200) {
  p.validate();
  const auto star = optimal_policy_rl(p);
  const double rmax = *std::max_element(p.rewards.begin(), p.rewards.end());
  auto mass = [&](double alpha) {
    double s = 0.0;
    for (std::size_t i = 0; i < star.size(); ++i) s += p.tau * star[i] / (alpha - p.rewards[i]);
    return s;
  };

  // Bracket: mass(lo) > 1 > mass(hi), widening hi geometrically.
  double lo = rmax;
  double hi = rmax + p.tau;
  while (mass(hi) > 1.0) hi = rmax + 2.0 * (hi - rmax);

  AlphaSolution sol;
  for (sol.iterations = 0; sol.iterations < max_iter; ++sol.iterations) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;  // interval exhausted at double resolution
    if (mass(mid) > 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  sol.alpha = std::abs(mass(lo) - 1.0) < std::abs(mass(hi) - 1.0) ? lo : hi;
  sol.policy.resize(star.size());
  double z = 0.0;
  for (std::size_t i = 0; i < star.size(); ++i) {
    sol.policy[i] = p.tau * star[i] / (sol.alpha - p.rewards[i]);
    z += sol.policy[i];
  }
  sol.residual = std::abs(z - 1.0);
  if (sol.residual > tol)
    throw std::runtime_error("optimal_policy_urex: bisection did not reach tolerance");
  for (double& v : sol.policy) v /= z;
  return sol;
}

/// |[O_RL(a) - O_RL(b)] + τ [KL(a‖π*) - KL(b‖π*)]|. O_RL equals -τ KL(π‖π*)
/// only up to the additive τ log Z, which cancels in the difference.
inline double kl_identity_gap(const SmallProblem& p, std::span<const double> policy_a,
                              std::span<const double> policy_b) {
  const auto star = optimal_policy_rl(p);
  const double lhs = rl_objective(p, policy_a) - rl_objective(p, policy_b);
  const double rhs = -p.tau * (kl_divergence(policy_a, star) - kl_divergence(policy_b, star));
  return std::abs(lhs - rhs);
}

struct TemperatureBounds {
  double ment = 0.0;
  double urex = 0.0;
};

/// Largest temperatures for which the high-reward action still dominates
/// the gradient coefficient by a factor gamma: τ < 1/(γ log|A|) for MENT,
/// τ < 1/(log γ + log|A|) for UREX.
inline TemperatureBounds temperature_bounds(double gamma, double action_count) {
  if (!(gamma > 1.0)) throw std::invalid_argument("gamma must exceed 1");
  if (!(action_count > 1.0)) throw std::invalid_argument("need more than one action");
  const double log_a = std::log(action_count);
  return {1.0 / (gamma * log_a), 1.0 / (std::log(gamma) + log_a)};
}

/// Population variance (1/K) Σ (w - mean)^2.
inline double weight_variance(std::span<const double> weights) {
  if (weights.empty()) return 0.0;
  const double k = static_cast<double>(weights.size());
  double mean = 0.0;
  for (double w : weights) mean += w;
  mean /= k;
  double v = 0.0;
  for (double w : weights) v += (w - mean) * (w - mean);
  return v / k;
}

}  // namespace urex::analysis
