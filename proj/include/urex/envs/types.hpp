#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace urex {

enum class TaskId {
  Copy,
  DuplicatedInput,
  RepeatCopy,
  Reverse,
  ReversedAddition,
  BinarySearch,
  Bandit,
};

inline constexpr std::array<TaskId, 7> kAllTasks = {
    TaskId::Copy,    TaskId::DuplicatedInput,  TaskId::RepeatCopy,
    TaskId::Reverse, TaskId::ReversedAddition, TaskId::BinarySearch,
    TaskId::Bandit};

inline bool is_tape_task(TaskId t) {
  return t != TaskId::BinarySearch && t != TaskId::Bandit;
}

inline std::string_view to_string(TaskId t) {
  switch (t) {
    case TaskId::Copy: return "copy";
    case TaskId::DuplicatedInput: return "duplicated_input";
    case TaskId::RepeatCopy: return "repeat_copy";
    case TaskId::Reverse: return "reverse";
    case TaskId::ReversedAddition: return "reversed_addition";
    case TaskId::BinarySearch: return "binary_search";
    case TaskId::Bandit: return "bandit";
  }
  throw std::invalid_argument("unknown task id");
}

/// Accepts the snake_case names above as well as the CamelCase task names.
inline TaskId parse_task(std::string_view name) {
  for (TaskId t : kAllTasks) {
    if (name == to_string(t)) return t;
  }
  static constexpr std::array<std::pair<std::string_view, TaskId>, 7> camel = {{
      {"Copy", TaskId::Copy},
      {"DuplicatedInput", TaskId::DuplicatedInput},
      {"RepeatCopy", TaskId::RepeatCopy},
      {"Reverse", TaskId::Reverse},
      {"ReversedAddition", TaskId::ReversedAddition},
      {"BinarySearch", TaskId::BinarySearch},
      {"Bandit", TaskId::Bandit},
  }};
  for (auto [n, t] : camel) {
    if (name == n) return t;
  }
  throw std::invalid_argument("unknown task: " + std::string(name));
}

/// Inclusive interval of input lengths.
struct LengthRange {
  int lo = 2;
  int hi = 33;

  bool empty() const { return hi < lo; }
  bool contains(int n) const { return lo <= n && n <= hi; }
};

enum class Comparison { None = 0, Less = 1, Greater = 2, Equal = 3 };

struct Observation {
  enum class Kind { Symbol, Comparison, Unit };

  Kind kind = Kind::Unit;
  int value = 0;  // symbol index (blank included) or Comparison code

  static Observation symbol(int s) { return {Kind::Symbol, s}; }
  static Observation comparison(Comparison c) {
    return {Kind::Comparison, static_cast<int>(c)};
  }
  static Observation unit() { return {Kind::Unit, 0}; }

  /// Index into the one-hot observation encoding consumed by the policy.
  int index() const { return value; }

  bool operator==(const Observation&) const = default;
};

enum class Move { Left = 0, Right = 1, Up = 2, Down = 3 };

struct TapeAction {
  Move move = Move::Right;
  bool write = false;
  int output = 0;

  bool operator==(const TapeAction&) const = default;
};

enum class SearchOp { Inc = 0, Div = 1, Avg = 2, Cmp = 3 };

struct SearchAction {
  SearchOp op = SearchOp::Cmp;
  int reg = 0;  // register index in {0, 1, 2}

  /// Flat index in [0, 12).
  int index() const { return static_cast<int>(op) * 3 + reg; }
  static SearchAction from_index(int i) {
    if (i < 0 || i >= 12) throw std::out_of_range("search action index");
    return {static_cast<SearchOp>(i / 3), i % 3};
  }
  bool operator==(const SearchAction&) const = default;
};

struct BanditAction {
  int arm = 0;
  bool operator==(const BanditAction&) const = default;
};

using Action = std::variant<TapeAction, SearchAction, BanditAction>;

enum class TerminationCause { None, Completed, WrongEmission, StepLimit, FoundQuery };

inline std::string_view to_string(TerminationCause c) {
  switch (c) {
    case TerminationCause::None: return "none";
    case TerminationCause::Completed: return "completed";
    case TerminationCause::WrongEmission: return "wrong_emission";
    case TerminationCause::StepLimit: return "step_limit";
    case TerminationCause::FoundQuery: return "found_query";
  }
  return "none";
}

struct StepResult {
  Observation obs;
  double reward = 0.0;
  bool done = false;
  TerminationCause cause = TerminationCause::None;
};

/// Up to three categorical factors per action; unused slots stay 0.
inline constexpr int kMaxHeads = 3;
using FactorIndices = std::array<int, kMaxHeads>;

/// Identifies one hidden initialization h. A length of 0 lets the
/// environment draw the length from its configured range.
struct EpisodeKey {
  std::uint64_t seed = 0;
  int length = 0;
};

}  // namespace urex
