#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "urex/envs.hpp"
#include "support/reference_trace.hpp"

namespace urex {
namespace {

using test_support::kSearchTrace;
using test_support::parse_search_action;
using test_support::TraceRow;

std::vector<double> play(Environment& env, const std::vector<Action>& actions) {
  std::vector<double> rewards;
  for (const auto& a : actions) {
    if (env.done()) break;
    rewards.push_back(env.step(a).reward);
  }
  return rewards;
}

TEST(Envs, IdenticalArgumentsReplayIdenticalEpisodes) {
  const std::vector<Action> actions = {
      TapeAction{Move::Right, true, 0}, TapeAction{Move::Right, false, 1},
      TapeAction{Move::Left, true, 2}, TapeAction{Move::Right, true, 3}};
  auto a = make_env(TaskId::Copy, 7, {2, 33});
  auto b = make_env(TaskId::Copy, 7, {2, 33});
  for (int ep = 0; ep < 20; ++ep) {
    EXPECT_EQ(a->reset(), b->reset());
    EXPECT_EQ(a->episode().seed, b->episode().seed);
    EXPECT_EQ(play(*a, actions), play(*b, actions));
  }
}

TEST(Envs, ResetEpisodeIsAFunctionOfTheKey) {
  auto env = make_env(TaskId::Reverse, 3, {2, 33});
  env->reset_episode({42, 0});
  const auto tape = dynamic_cast<TapeEnv&>(*env).grid();
  env->reset();
  env->reset_episode({42, 0});
  EXPECT_EQ(dynamic_cast<TapeEnv&>(*env).grid(), tape);
}

TEST(Envs, ReversedAdditionGridIsTwoRowsOfTernaryDigits) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto env = make_env(TaskId::ReversedAddition, seed, {2, 33});
    env->reset();
    const auto& grid = dynamic_cast<TapeEnv&>(*env).grid();
    ASSERT_EQ(grid.size(), 2u);
    for (const auto& row : grid)
      for (int d : row) EXPECT_TRUE(d >= 0 && d <= 2);
  }
}

TEST(Envs, BinarySearchStartsWithRegistersN00) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    BinarySearchEnv env(seed);
    const Observation o = env.reset();
    EXPECT_EQ(o, Observation::comparison(Comparison::None));
    const auto n = env.n();
    EXPECT_TRUE(n >= 32 && n <= 512);
    EXPECT_EQ(env.registers(), (BinarySearchEnv::Registers{n, 0, 0}));
    const auto& arr = env.array();
    for (std::size_t i = 1; i < arr.size(); ++i) EXPECT_LT(arr[i - 1], arr[i]);
    EXPECT_EQ(arr[static_cast<std::size_t>(env.query_position())], env.query());
  }
}

TEST(Envs, FirstObservationIsTheFirstTapeSymbol) {
  auto env = make_env(TaskId::Copy, 11, {2, 33});
  const Observation o = env->reset();
  EXPECT_EQ(o.kind, Observation::Kind::Symbol);
  EXPECT_EQ(o.value, dynamic_cast<TapeEnv&>(*env).grid()[0][0]);
  BanditEnv bandit(1, {4, 3, 1.0});
  EXPECT_EQ(bandit.reset(), Observation::unit());
}

TEST(Envs, CopyOfABEmitsTwoRewards) {
  TapeEnv env(TaskId::Copy, 1, {2, 2});
  env.reset_episode({5, 2});
  const auto& tape = env.grid()[0];
  EXPECT_EQ(env.step(TapeAction{Move::Right, true, tape[0]}).reward, 1.0);
  const StepResult last = env.step(TapeAction{Move::Right, true, tape[1]});
  EXPECT_EQ(last.reward, 1.0);
  EXPECT_TRUE(last.done);
  EXPECT_EQ(last.cause, TerminationCause::Completed);
}

TEST(Envs, WrongEmissionEndsTheEpisode) {
  TapeEnv env(TaskId::Copy, 1, {5, 5});
  env.reset();
  const int wrong = (env.grid()[0][0] + 1) % env.base();
  const StepResult r = env.step(TapeAction{Move::Right, true, wrong});
  EXPECT_EQ(r.reward, -0.5);
  EXPECT_TRUE(r.done);
  EXPECT_EQ(r.cause, TerminationCause::WrongEmission);
  EXPECT_THROW(env.step(TapeAction{Move::Right, true, 0}), EnvError);
}

TEST(Envs, StepLimitAddsMinusOneOnTheFinalStep) {
  TapeEnv env(TaskId::Copy, 1, {4, 4});
  env.reset();
  const int limit = env.step_limit();
  EXPECT_EQ(limit, 4 * 4 + 4);
  // Emit one correct symbol, then shuffle without writing.
  double total = env.step(TapeAction{Move::Right, true, env.grid()[0][0]}).reward;
  StepResult r;
  while (!env.done()) {
    r = env.step(TapeAction{env.steps() % 2 ? Move::Left : Move::Right, false, 0});
    total += r.reward;
  }
  EXPECT_EQ(env.steps(), limit);
  EXPECT_EQ(r.reward, -1.0);
  EXPECT_EQ(r.cause, TerminationCause::StepLimit);
  EXPECT_EQ(total, 0.0);
}

TEST(Envs, MalformedActionVariantIsRejected) {
  auto tape = make_env(TaskId::Copy, 1);
  tape->reset();
  EXPECT_THROW(tape->step(SearchAction{SearchOp::Cmp, 0}), EnvError);
  BinarySearchEnv search(1);
  search.reset();
  EXPECT_THROW(search.step(TapeAction{}), EnvError);
  auto copy = make_env(TaskId::Copy, 1);
  copy->reset();
  EXPECT_THROW(copy->step(TapeAction{Move::Up, false, 0}), EnvError);
}

TEST(Envs, MakeEnvValidatesItsArguments) {
  EXPECT_THROW(make_env(TaskId::Copy, 1, {5, 4}), std::invalid_argument);
  EXPECT_THROW(make_env(TaskId::Copy, 1, {1, 10}), std::invalid_argument);
  EXPECT_THROW(make_env(TaskId::Copy, 1, {2, 34}), std::invalid_argument);
  EXPECT_THROW(parse_task("ReversedAddition3"), std::invalid_argument);
  EXPECT_EQ(parse_task("DuplicatedInput"), TaskId::DuplicatedInput);
  EXPECT_EQ(parse_task("binary_search"), TaskId::BinarySearch);
}

TEST(Envs, MaxTotalRewardMatchesTargetLengths) {
  TapeEnv copy(TaskId::Copy, 1, {10, 10});
  copy.reset();
  EXPECT_EQ(copy.max_total_reward(), 10.0);
  for (int n = 2; n <= 33; ++n) {
    TapeEnv rc(TaskId::RepeatCopy, 2, {n, n});
    rc.reset();
    EXPECT_EQ(rc.max_total_reward(), 3.0 * n);
  }
}

// Independent base-3 oracle: add the two rows as integers and count digits.
TEST(Envs, ReversedAdditionTargetIsTheBase3Sum) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    TapeEnv env(TaskId::ReversedAddition, seed, {2, 12});
    env.reset();
    const auto& g = env.grid();
    const int n = env.width();
    long long a = 0, b = 0, p = 1;
    for (int c = 0; c < n; ++c, p *= 3) {
      a += g[0][c] * p;
      b += g[1][c] * p;
    }
    long long sum = a + b;
    std::vector<int> digits;
    for (int c = 0; c < n || sum > 0; ++c, sum /= 3) digits.push_back(static_cast<int>(sum % 3));
    EXPECT_EQ(env.target(), digits);
    EXPECT_TRUE(env.max_total_reward() == n || env.max_total_reward() == n + 1);
  }
}

TEST(Envs, OracleRolloutCollectsTheMaximalReward) {
  for (TaskId task : {TaskId::Copy, TaskId::DuplicatedInput, TaskId::RepeatCopy, TaskId::Reverse,
                      TaskId::ReversedAddition}) {
    auto env = make_env(task, 17, {2, 33});
    for (int i = 0; i < 1000; ++i) {
      env->reset();
      const double best = env->max_total_reward();
      const Trajectory t = env->oracle_rollout();
      ASSERT_EQ(t.total_reward, best) << to_string(task) << " episode " << i;
      ASSERT_EQ(t.cause, TerminationCause::Completed);
      ASSERT_EQ(t.reward_sum(), t.total_reward);
    }
  }
}

TEST(Envs, ReverseOfABEmitsBA) {
  TapeEnv env(TaskId::Reverse, 1, {2, 2});
  env.reset();
  const auto tape = env.grid()[0];
  const Trajectory t = env.oracle_rollout();
  std::vector<int> emitted;
  for (const auto& f : t.actions)
    if (f[1] == 1) emitted.push_back(f[2]);
  EXPECT_EQ(emitted, (std::vector<int>{tape[1], tape[0]}));
  EXPECT_EQ(t.total_reward, 2.0);
}

TEST(Envs, DuplicatedInputRepeatsEveryCharacterTwice) {
  TapeEnv env(TaskId::DuplicatedInput, 4, {2, 33});
  for (int i = 0; i < 50; ++i) {
    env.reset();
    const auto& tape = env.grid()[0];
    ASSERT_EQ(tape.size() % 2, 0u);
    for (std::size_t k = 0; k < tape.size(); k += 2) EXPECT_EQ(tape[k], tape[k + 1]);
    EXPECT_EQ(env.target().size() * 2, tape.size());
  }
}

TEST(Envs, BinarySearchReplaysTheReferenceTrace) {
  BinarySearchEnv env(123);
  env.reset_episode({99, 512});
  env.place_query(100);
  for (std::size_t t = 0; t < kSearchTrace.size(); ++t) {
    const TraceRow& row = kSearchTrace[t];
    ASSERT_EQ(env.registers(), row.regs) << "row " << t + 1;
    ASSERT_EQ(env.describe_observation(env.observe()), row.obs) << "row " << t + 1;
    if (std::string(row.action).empty()) break;
    const StepResult r = env.step(parse_search_action(row.action));
    if (t + 2 == kSearchTrace.size()) {
      EXPECT_TRUE(r.done);
      EXPECT_EQ(r.cause, TerminationCause::FoundQuery);
      EXPECT_DOUBLE_EQ(r.reward, 10.0 * (1.0 - 32.0 / 1025.0));
    } else {
      EXPECT_FALSE(r.done);
    }
  }
}

TEST(Envs, BinarySearchStepLimitGivesZero) {
  BinarySearchEnv env(5, {32, 32});
  env.reset();
  StepResult r;
  while (!env.done()) r = env.step(SearchAction{SearchOp::Inc, 0});
  EXPECT_EQ(env.steps(), 2 * 32 + 1);
  EXPECT_EQ(r.reward, 0.0);
  EXPECT_EQ(r.cause, TerminationCause::StepLimit);
}

TEST(Envs, BinarySearchClampsOutOfRangeRegisters) {
  BinarySearchEnv env(5, {32, 32});
  env.reset();
  env.place_query(31);
  // R0 = n = 32 is one past the end; CMP clamps to the last cell.
  const StepResult r = env.step(SearchAction{SearchOp::Cmp, 0});
  EXPECT_TRUE(r.done);
  EXPECT_EQ(r.cause, TerminationCause::FoundQuery);
}

// Closed-form oracle for the scripted strategies: linear search needs
// 2p + 1 steps for x at position p; binary search is simulated on index
// arithmetic alone.
int binary_search_steps(int n, int p) {
  long lo = 0, hi = n;
  int steps = 1;  // initial AVG
  for (;;) {
    const long mid = (lo + hi) / 2;
    ++steps;  // CMP
    if (mid == p) return steps;
    ++steps;  // AVG producing the next midpoint
    if (p < mid) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
}

TEST(Envs, ScriptedSearchesMatchTheirClosedForms) {
  BinarySearchEnv env(77);
  for (int i = 0; i < 300; ++i) {
    env.reset();
    const int n = env.n(), p = env.query_position();
    const EpisodeKey key = env.episode();
    const Trajectory lin = env.oracle_rollout(SearchStrategy::Linear);
    EXPECT_EQ(static_cast<int>(lin.size()), 2 * p + 1);
    EXPECT_NEAR(lin.total_reward, 10.0 * (1.0 - (2.0 * p + 1.0) / (2.0 * n + 1.0)), 1e-12);
    env.reset_episode(key);
    const Trajectory bin = env.oracle_rollout(SearchStrategy::Binary);
    EXPECT_EQ(static_cast<int>(bin.size()), binary_search_steps(n, p));
    EXPECT_EQ(bin.cause, TerminationCause::FoundQuery);
  }
}

TEST(Envs, BanditPayoffsAreSeededAndBounded) {
  const auto a = bandit_payoffs(9, 1000, 8.0, 30);
  const auto b = bandit_payoffs(9, 1000, 8.0, 30);
  EXPECT_EQ(a.payoffs, b.payoffs);
  EXPECT_TRUE(a.features.isApprox(b.features, 0.0));
  EXPECT_EQ(a.features.rows(), 1000);
  EXPECT_EQ(a.features.cols(), 30);
  for (double r : a.payoffs) {
    EXPECT_GE(r, 0.0);
    EXPECT_LT(r, 1.0);
  }
  const auto c = bandit_payoffs(10, 1000, 8.0, 30);
  EXPECT_NE(a.payoffs, c.payoffs);
  // beta = 1: payoffs are the uniforms themselves; mean near 1/2.
  const auto u = bandit_payoffs(3, 20000, 1.0, 1);
  double mean = 0.0;
  for (double r : u.payoffs) mean += r;
  EXPECT_NEAR(mean / 20000.0, 0.5, 0.02);
  // beta = 0: every payoff is 1.
  for (double r : bandit_payoffs(3, 50, 0.0, 2).payoffs) EXPECT_EQ(r, 1.0);
}

TEST(Envs, BanditIsSingleStep) {
  BanditEnv env(4, {5, 3, 2.0});
  env.reset();
  const StepResult r = env.step(BanditAction{2});
  EXPECT_TRUE(r.done);
  EXPECT_EQ(r.reward, env.payoffs()[2]);
  EXPECT_THROW(env.step(BanditAction{2}), EnvError);
  env.reset();
  EXPECT_THROW(env.step(BanditAction{5}), EnvError);
  EXPECT_THROW(env.oracle_rollout(SearchStrategy::Binary), EnvError);
}

TEST(Envs, TraceDumpHasOneLinePerStep) {
  TapeEnv env(TaskId::Copy, 1, {2, 2});
  env.reset();
  const Trajectory t = env.oracle_rollout();
  const std::string dump = dump_trace(env, t);
  EXPECT_EQ(std::count(dump.begin(), dump.end(), '\n'), 2);
  EXPECT_NE(dump.find("1, "), std::string::npos);
  EXPECT_NE(dump.find("(R,1,"), std::string::npos);
  EXPECT_NE(dump.find(", 1, 1\n"), std::string::npos);
}

}  // namespace
}  // namespace urex
