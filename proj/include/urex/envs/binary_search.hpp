#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "urex/envs/environment.hpp"

namespace urex {

struct SearchOptions {
  /// Success threshold reported as max_total_reward (see BinarySearchEnv).
  double success_threshold = 9.0;
};

/// Hidden sorted array of n distinct integers, a query x taken from it, and
/// three registers starting at (n, 0, 0). CMP(i) compares x against the
/// array cell indexed by register i (clamped into [0, n-1]).
///
/// The episode ends when CMP hits x, rewarding 10 (1 - t / (2n + 1)), or
/// after 2n + 1 steps with reward 0. Here the "length" of an episode is n.
class BinarySearchEnv final : public Environment {
 public:
  using Registers = std::array<std::int64_t, 3>;

  BinarySearchEnv(std::uint64_t seed, LengthRange range = {32, 512}, SearchOptions opts = {})
      : Environment(TaskId::BinarySearch, seed, range), opts_(opts) {
    validate_range(range);
  }

  int n() const { return static_cast<int>(array_.size()); }
  const std::vector<std::int64_t>& array() const { return array_; }
  std::int64_t query() const { return array_[query_pos_]; }
  int query_position() const { return query_pos_; }
  const Registers& registers() const { return regs_; }
  int step_limit() const { return 2 * n() + 1; }

  /// Forces the query position of the current episode (trace replay).
  void place_query(int position) {
    if (position < 0 || position >= n()) throw std::out_of_range("query position");
    query_pos_ = position;
  }

  /// Not the optimum of the scripted binary search: the reward of a perfect
  /// policy depends on where x sits, so the success threshold stands in.
  double max_total_reward() const override { return opts_.success_threshold; }

  std::vector<int> head_sizes() const override { return {12}; }
  int observation_size() const override { return 4; }

  Action decode(const FactorIndices& f) const override { return SearchAction::from_index(f[0]); }
  FactorIndices encode(const Action& a) const override {
    const auto* s = std::get_if<SearchAction>(&a);
    if (s == nullptr) throw EnvError("BinarySearch expects a SearchAction");
    return {s->index(), 0, 0};
  }

  Observation observe() const override { return Observation::comparison(last_cmp_); }

  std::string describe_observation(const Observation& o) const override {
    switch (static_cast<Comparison>(o.value)) {
      case Comparison::Less: return "<";
      case Comparison::Greater: return ">";
      case Comparison::Equal: return "=";
      case Comparison::None: break;
    }
    return "--";
  }

  std::string describe_action(const Action& a) const override {
    const auto& s = std::get<SearchAction>(a);
    static constexpr std::array<const char*, 4> names = {"INC", "DIV", "AVG", "CMP"};
    return std::string(names[static_cast<int>(s.op)]) + "(" + std::to_string(s.reg) + ")";
  }

  Trajectory oracle_rollout(SearchStrategy strategy) override {
    Trajectory t = begin_trajectory();
    if (strategy == SearchStrategy::Linear) {
      while (!done()) {
        record(t, SearchAction{SearchOp::Cmp, 1});
        if (!done()) record(t, SearchAction{SearchOp::Inc, 1});
      }
      return t;
    }
    // Registers hold {hi, lo, mid} with rotating roles. After comparing at
    // mid, AVG of the discarded bound's register yields the next midpoint,
    // so every halving costs two steps.
    int hi = 0, lo = 1, mid = 2;
    record(t, SearchAction{SearchOp::Avg, mid});
    while (!done()) {
      record(t, SearchAction{SearchOp::Cmp, mid});
      if (done()) break;
      if (static_cast<Comparison>(observe().value) == Comparison::Less) {
        record(t, SearchAction{SearchOp::Avg, hi});
        std::swap(hi, mid);
      } else {
        record(t, SearchAction{SearchOp::Avg, lo});
        std::swap(lo, mid);
      }
    }
    return t;
  }

  std::unique_ptr<Environment> clone() const override {
    return std::make_unique<BinarySearchEnv>(*this);
  }

 protected:
  void validate_range(const LengthRange& r) const override {
    Environment::validate_range(r);
    if (r.lo < 1) throw std::invalid_argument("array size must be positive");
  }

  Observation resample(Rng& rng, int length) override {
    // n distinct values drawn from [0, 4n), kept sorted.
    const std::int64_t n = length;
    std::vector<std::int64_t> pool(static_cast<std::size_t>(4 * n));
    for (std::int64_t i = 0; i < 4 * n; ++i) pool[static_cast<std::size_t>(i)] = i;
    for (std::int64_t i = 0; i < n; ++i) {
      const auto j = uniform_int(rng, i, 4 * n - 1);
      std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    array_.assign(pool.begin(), pool.begin() + n);
    std::sort(array_.begin(), array_.end());
    query_pos_ = static_cast<int>(uniform_int(rng, 0, n - 1));
    regs_ = {n, 0, 0};
    last_cmp_ = Comparison::None;
    return observe();
  }

  StepResult apply(const Action& action) override {
    const auto* a = std::get_if<SearchAction>(&action);
    if (a == nullptr) throw EnvError("BinarySearch expects a SearchAction");
    if (a->reg < 0 || a->reg > 2) throw EnvError("register index out of range");

    StepResult r;
    std::int64_t& reg = regs_[a->reg];
    last_cmp_ = Comparison::None;
    switch (a->op) {
      case SearchOp::Inc: reg += 1; break;
      case SearchOp::Div: reg = floor_div2(reg); break;
      case SearchOp::Avg: {
        const std::int64_t sum = regs_[(a->reg + 1) % 3] + regs_[(a->reg + 2) % 3];
        reg = floor_div2(sum);
        break;
      }
      case SearchOp::Cmp: {
        const std::int64_t idx = std::clamp<std::int64_t>(reg, 0, n() - 1);
        const std::int64_t cell = array_[static_cast<std::size_t>(idx)];
        const std::int64_t x = query();
        if (cell == x) {
          last_cmp_ = Comparison::Equal;
          r.reward = 10.0 * (1.0 - static_cast<double>(steps()) / (2.0 * n() + 1.0));
          r.done = true;
          r.cause = TerminationCause::FoundQuery;
        } else {
          last_cmp_ = x < cell ? Comparison::Less : Comparison::Greater;
        }
        break;
      }
    }
    if (!r.done && steps() >= step_limit()) {
      r.done = true;
      r.cause = TerminationCause::StepLimit;
    }
    r.obs = observe();
    return r;
  }

 private:
  static std::int64_t floor_div2(std::int64_t v) { return v >= 0 ? v / 2 : -((-v + 1) / 2); }

  SearchOptions opts_;
  std::vector<std::int64_t> array_;
  int query_pos_ = 0;
  Registers regs_{0, 0, 0};
  Comparison last_cmp_ = Comparison::None;
};

}  // namespace urex
