#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>

#include "urex/random.hpp"

namespace urex {

/// log-softmax with max subtraction; `out` may alias `logits`.
inline void log_softmax(std::span<const double> logits, std::span<double> out) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : logits) m = std::max(m, v);
  double s = 0.0;
  for (double v : logits) s += std::exp(v - m);
  const double lse = m + std::log(s);
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lse;
}

inline void softmax(std::span<const double> logits, std::span<double> out) {
  log_softmax(logits, out);
  for (double& v : out) v = std::exp(v);
}

/// Inverse-CDF draw from exp(log_probs).
inline int sample_categorical(std::span<const double> log_probs, Rng& rng) {
  const double u = uniform01(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < log_probs.size(); ++i) {
    acc += std::exp(log_probs[i]);
    if (u < acc) return static_cast<int>(i);
  }
  // Rounding left u above the accumulated mass: take the last non-zero entry.
  for (std::size_t i = log_probs.size(); i-- > 0;)
    if (std::exp(log_probs[i]) > 0.0) return static_cast<int>(i);
  return static_cast<int>(log_probs.size()) - 1;
}

/// Lowest index among the maxima.
inline int argmax(std::span<const double> v) {
  int best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  return best;
}

inline bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace urex
