#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "urex/policy/params.hpp"

namespace urex {

/// Rescales g to norm c when its L2 norm exceeds c.
inline GradientEstimate clip_gradient(GradientEstimate g, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("clip norm must be positive");
  const double n = g.norm();
  if (n > c) {
    const double s = c / n;
    for (double& v : g.values) v *= s;
  }
  return g;
}

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct OptimState {
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  long step = 0;

  explicit OptimState(std::size_t n = 0) : first_moment(n, 0.0), second_moment(n, 0.0) {}
};

/// One bias-corrected Adam step that ascends the objective whose gradient
/// is `grad`.
inline void adam_update(ParamVector& params, const GradientEstimate& grad, OptimState& state,
                        double eta, const AdamConfig& cfg = {}) {
  const std::size_t n = params.size();
  if (grad.values.size() != n) throw std::invalid_argument("gradient shape mismatch");
  if (state.first_moment.size() != n) {
    if (state.step != 0 || !state.first_moment.empty())
      throw std::invalid_argument("optimizer state shape mismatch");
    state = OptimState(n);
  }
  ++state.step;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grad.values[i];
    double& m = state.first_moment[i];
    double& v = state.second_moment[i];
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
    params[i] += eta * (m / bc1) / (std::sqrt(v / bc2) + cfg.epsilon);
  }
}

}  // namespace urex
