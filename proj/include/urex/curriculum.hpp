#pragma once

#include <algorithm>
#include <deque>
#include <stdexcept>

#include "urex/random.hpp"

namespace urex {

struct CurriculumConfig {
  int window = 100;
  double advance_threshold = 0.95;
  int min_length = 2;
  int start_length = 2;
  int max_length = 33;
};

/// Raises the longest training length by one whenever the last `window`
/// episodes averaged at least `advance_threshold` of the maximal reward.
class Curriculum {
 public:
  explicit Curriculum(CurriculumConfig cfg = {}) : cfg_(cfg), current_max_(cfg.start_length) {
    if (cfg_.window < 1) throw std::invalid_argument("curriculum window must be positive");
    if (cfg_.min_length < 1 || cfg_.start_length < cfg_.min_length ||
        cfg_.max_length < cfg_.start_length)
      throw std::invalid_argument("curriculum lengths must satisfy min <= start <= max");
  }

  int current_max_length() const { return current_max_; }
  const CurriculumConfig& config() const { return cfg_; }
  const std::deque<double>& window() const { return ratios_; }

  /// Returns true when this episode triggered an advance.
  bool record_episode(double total_reward, double max_total_reward) {
    if (!(max_total_reward > 0.0)) throw std::invalid_argument("max_total_reward must be positive");
    ratios_.push_back(std::clamp(total_reward / max_total_reward, -1.0, 1.0));
    sum_ += ratios_.back();
    if (static_cast<int>(ratios_.size()) > cfg_.window) {
      sum_ -= ratios_.front();
      ratios_.pop_front();
    }
    if (static_cast<int>(ratios_.size()) == cfg_.window &&
        sum_ / cfg_.window >= cfg_.advance_threshold && current_max_ < cfg_.max_length) {
      ++current_max_;
      ratios_.clear();
      sum_ = 0.0;
      return true;
    }
    return false;
  }

  /// Uniform in [min_length, current_max_length].
  int sample_length(Rng& rng) const {
    return static_cast<int>(uniform_int(rng, cfg_.min_length, current_max_));
  }

 private:
  CurriculumConfig cfg_;
  int current_max_;
  std::deque<double> ratios_;
  double sum_ = 0.0;
};

}  // namespace urex
