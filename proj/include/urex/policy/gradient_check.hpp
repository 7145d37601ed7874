#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>

#include "urex/policy/params.hpp"
#include "urex/trajectory.hpp"

namespace urex {

/// Magnitudes below this floor are compared in absolute terms.
inline constexpr double kGradCheckFloor = 1e-5;

inline double relative_error(double a, double b, double floor = kGradCheckFloor) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

/// Σ c · log π over the batch, the scalar whose gradient
/// weighted_logprob_grad returns.
template <class Model>
double weighted_logprob(const Model& model, const ParamVector& p, const Batch& batch,
                        std::span<const double> coefficients) {
  double s = 0.0;
  std::size_t idx = 0;
  for (const auto& g : batch.groups)
    for (const auto& t : g.samples) s += coefficients[idx++] * model.log_prob(p, t);
  return s;
}

/// Largest per-coordinate relative error between the analytic gradient and
/// central finite differences at step `epsilon`.
template <class Model>
double finite_diff_check(const Model& model, const ParamVector& params, const Batch& batch,
                         std::span<const double> coefficients, double epsilon = 1e-5,
                         double floor = kGradCheckFloor) {
  if (params.size() > 5000) throw std::invalid_argument("too many parameters to perturb");
  const GradientEstimate analytic = model.weighted_logprob_grad(params, batch, coefficients);
  ParamVector p = params;
  double worst = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double orig = p[i];
    p[i] = orig + epsilon;
    const double up = weighted_logprob(model, p, batch, coefficients);
    p[i] = orig - epsilon;
    const double down = weighted_logprob(model, p, batch, coefficients);
    p[i] = orig;
    const double numeric = (up - down) / (2.0 * epsilon);
    worst = std::max(worst, relative_error(analytic.values[i], numeric, floor));
  }
  return worst;
}

}  // namespace urex
