#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "urex/envs/environment.hpp"

namespace urex {

struct TapeOptions {
  /// Alphabet size; 0 selects the task default (5, or 3 for addition).
  int base = 0;
  /// Step limit is limit_factor * input_length + limit_offset.
  int limit_factor = 4;
  int limit_offset = 4;
  /// Largest length accepted by make_env / set_length_range.
  int max_length = 33;
};

inline int default_base(TaskId task) { return task == TaskId::ReversedAddition ? 3 : 5; }

/// Copy, DuplicatedInput, RepeatCopy, Reverse and ReversedAddition.
///
/// The read head starts at row 0, column 0 and may wander one cell past
/// either end of the tape, where it reads the blank symbol (index `base`).
/// Each step first scores the emission (if any), then moves the head.
class TapeEnv final : public Environment {
 public:
  TapeEnv(TaskId task, std::uint64_t seed, LengthRange range, TapeOptions opts = {})
      : Environment(task, seed, range), opts_(opts) {
    if (!is_tape_task(task)) throw std::invalid_argument("TapeEnv needs a tape task");
    if (opts_.base == 0) opts_.base = default_base(task);
    if (opts_.base < 2) throw std::invalid_argument("alphabet size must be >= 2");
    validate_range(range);
  }

  int base() const { return opts_.base; }
  int blank() const { return opts_.base; }
  int rows() const { return static_cast<int>(grid_.size()); }
  int width() const { return grid_.empty() ? 0 : static_cast<int>(grid_[0].size()); }
  const std::vector<std::vector<int>>& grid() const { return grid_; }
  const std::vector<int>& target() const { return target_; }
  int row() const { return row_; }
  int col() const { return col_; }
  int emitted() const { return write_pos_; }
  int step_limit() const { return opts_.limit_factor * input_length() + opts_.limit_offset; }

  double max_total_reward() const override { return static_cast<double>(target_.size()); }

  std::vector<int> head_sizes() const override {
    return {task() == TaskId::ReversedAddition ? 4 : 2, 2, opts_.base};
  }
  int observation_size() const override { return opts_.base + 1; }

  Action decode(const FactorIndices& f) const override {
    return TapeAction{static_cast<Move>(f[0]), f[1] != 0, f[2]};
  }
  FactorIndices encode(const Action& a) const override {
    const auto* t = std::get_if<TapeAction>(&a);
    if (t == nullptr) throw EnvError("tape task expects a TapeAction");
    return {static_cast<int>(t->move), t->write ? 1 : 0, t->output};
  }

  Observation observe() const override {
    if (row_ < 0 || row_ >= rows() || col_ < 0 || col_ >= width())
      return Observation::symbol(blank());
    return Observation::symbol(grid_[row_][col_]);
  }

  std::string symbol_name(int s) const {
    if (s == blank()) return "_";
    if (task() == TaskId::ReversedAddition) return std::string(1, static_cast<char>('0' + s));
    return std::string(1, static_cast<char>('A' + s));
  }

  std::string describe_observation(const Observation& o) const override {
    return symbol_name(o.value);
  }

  std::string describe_action(const Action& a) const override {
    const auto& t = std::get<TapeAction>(a);
    static constexpr const char* moves = "LRUD";
    std::string s = "(";
    s += moves[static_cast<int>(t.move)];
    s += t.write ? ",1," : ",0,";
    s += symbol_name(t.output);
    s += ")";
    return s;
  }

  Trajectory oracle_rollout(SearchStrategy = SearchStrategy::Binary) override {
    Trajectory t = begin_trajectory();
    switch (task()) {
      case TaskId::Copy:
        for (int i = 0; i < width() && !done(); ++i) emit_right(t);
        break;
      case TaskId::DuplicatedInput:
        while (!done()) {
          emit_right(t);
          if (!done()) record(t, TapeAction{Move::Right, false, 0});
        }
        break;
      case TaskId::Reverse:
        while (col_ < width() - 1) record(t, TapeAction{Move::Right, false, 0});
        while (!done()) record(t, TapeAction{Move::Left, true, observe().value});
        break;
      case TaskId::RepeatCopy:
        for (int i = 0; i < width(); ++i) emit_right(t);
        record(t, TapeAction{Move::Left, false, 0});
        for (int i = 0; i < width(); ++i) record(t, TapeAction{Move::Left, true, observe().value});
        record(t, TapeAction{Move::Right, false, 0});
        while (!done()) emit_right(t);
        break;
      case TaskId::ReversedAddition: {
        // Zig-zag between rows: read one digit, step vertically, read the
        // other digit and emit the column sum, then step right.
        int carry = 0;
        for (int c = 0; c < width(); ++c) {
          const int first = observe().value;
          record(t, TapeAction{row_ == 0 ? Move::Down : Move::Up, false, 0});
          const int sum = first + observe().value + carry;
          carry = sum / opts_.base;
          record(t, TapeAction{Move::Right, true, sum % opts_.base});
        }
        if (!done()) record(t, TapeAction{Move::Right, true, carry});
        break;
      }
      default:
        break;
    }
    return t;
  }

  std::unique_ptr<Environment> clone() const override { return std::make_unique<TapeEnv>(*this); }

 protected:
  void validate_range(const LengthRange& r) const override {
    Environment::validate_range(r);
    if (r.lo < 2 || r.hi > opts_.max_length)
      throw std::invalid_argument("tape length range must lie within [2, " +
                                  std::to_string(opts_.max_length) + "]");
  }

  Observation resample(Rng& rng, int length) override {
    const int b = opts_.base;
    auto draw = [&] { return static_cast<int>(uniform_int(rng, 0, b - 1)); };
    grid_.clear();
    target_.clear();
    switch (task()) {
      case TaskId::Copy: {
        grid_.assign(1, std::vector<int>(length));
        for (int& s : grid_[0]) s = draw();
        target_ = grid_[0];
        break;
      }
      case TaskId::DuplicatedInput: {
        const int distinct = std::max(1, length / 2);
        grid_.assign(1, {});
        for (int i = 0; i < distinct; ++i) {
          const int s = draw();
          grid_[0].push_back(s);
          grid_[0].push_back(s);
          target_.push_back(s);
        }
        break;
      }
      case TaskId::RepeatCopy: {
        grid_.assign(1, std::vector<int>(length));
        for (int& s : grid_[0]) s = draw();
        target_ = grid_[0];
        target_.insert(target_.end(), grid_[0].rbegin(), grid_[0].rend());
        target_.insert(target_.end(), grid_[0].begin(), grid_[0].end());
        break;
      }
      case TaskId::Reverse: {
        grid_.assign(1, std::vector<int>(length));
        for (int& s : grid_[0]) s = draw();
        target_.assign(grid_[0].rbegin(), grid_[0].rend());
        break;
      }
      case TaskId::ReversedAddition: {
        grid_.assign(2, std::vector<int>(length));
        for (auto& r : grid_)
          for (int& s : r) s = draw();
        int carry = 0;
        for (int c = 0; c < length; ++c) {
          const int sum = grid_[0][c] + grid_[1][c] + carry;
          target_.push_back(sum % b);
          carry = sum / b;
        }
        if (carry > 0) target_.push_back(carry);
        break;
      }
      default:
        throw std::logic_error("not a tape task");
    }
    row_ = 0;
    col_ = 0;
    write_pos_ = 0;
    return observe();
  }

  StepResult apply(const Action& action) override {
    const auto* a = std::get_if<TapeAction>(&action);
    if (a == nullptr) throw EnvError("tape task expects a TapeAction");
    const int moves = head_sizes()[0];
    if (static_cast<int>(a->move) < 0 || static_cast<int>(a->move) >= moves)
      throw EnvError("illegal move for this task");
    if (a->write && (a->output < 0 || a->output >= opts_.base))
      throw EnvError("output symbol out of range");

    StepResult r;
    if (a->write) {
      if (a->output == target_[write_pos_]) {
        r.reward = 1.0;
        if (++write_pos_ == static_cast<int>(target_.size())) {
          r.done = true;
          r.cause = TerminationCause::Completed;
        }
      } else {
        r.reward = -0.5;
        r.done = true;
        r.cause = TerminationCause::WrongEmission;
      }
    }
    switch (a->move) {
      case Move::Left: col_ = std::max(-1, col_ - 1); break;
      case Move::Right: col_ = std::min(width(), col_ + 1); break;
      case Move::Up: row_ = std::max(0, row_ - 1); break;
      case Move::Down: row_ = std::min(rows() - 1, row_ + 1); break;
    }
    // The limit penalty is an extra reward on the final step; rewards
    // already collected in the episode are kept.
    if (!r.done && steps() >= step_limit()) {
      r.reward += -1.0;
      r.done = true;
      r.cause = TerminationCause::StepLimit;
    }
    r.obs = observe();
    return r;
  }

 private:
  void emit_right(Trajectory& t) { record(t, TapeAction{Move::Right, true, observe().value}); }

  TapeOptions opts_;
  std::vector<std::vector<int>> grid_;
  std::vector<int> target_;
  int row_ = 0;
  int col_ = 0;
  int write_pos_ = 0;
};

}  // namespace urex
