#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "urex/envs.hpp"
#include "urex/harness/trial.hpp"

namespace urex::harness {

inline constexpr std::array<int, 5> kProbeLengths = {30, 100, 500, 1000, 2000};

struct ProbeResult {
  int length = 0;
  double accuracy = 0.0;  // fraction of instances solved perfectly
};

struct GeneralizationRecord {
  TaskId task = TaskId::Copy;
  std::vector<ProbeResult> probes;  // in the order they were run
  int max_length = 0;               // largest length with 100% accuracy, 0 if none

  std::string to_csv() const {
    std::ostringstream o;
    o << "length,accuracy\n";
    for (const auto& p : probes) o << p.length << ',' << p.accuracy << '\n';
    o << "max," << max_length << '\n';
    return o.str();
  }
};

/// Fraction of `instances` fresh inputs of exactly `length` symbols that the
/// greedy policy solves with the maximal reward.
inline double probe_accuracy(TaskId task, int length, int instances, std::uint64_t seed,
                             const GreedyPolicy& policy) {
  if (!is_tape_task(task)) throw std::invalid_argument("generalization sweeps need a tape task");
  EnvOptions opts;
  opts.tape.max_length = std::max(opts.tape.max_length, length);
  auto env = make_env(task, derive_seed(seed, {0x6E, static_cast<std::uint64_t>(length)}),
                      {length, length}, opts);
  int solved = 0;
  for (int i = 0; i < instances; ++i) {
    env->reset();
    const double best = env->max_total_reward();
    if (policy(*env).total_reward >= best - 1e-9) ++solved;
  }
  return static_cast<double>(solved) / instances;
}

/// Probes the fixed lengths up to `max_len` until accuracy drops below
/// 100%, then bisects between the last perfect length and the first failing
/// one to pin down the largest perfect length.
inline GeneralizationRecord generalization_sweep(TaskId task, const GreedyPolicy& policy,
                                                 int max_len = 2000, int instances = 100,
                                                 std::uint64_t seed = 0) {
  if (max_len < 1 || instances < 1) throw std::invalid_argument("max_len and instances must be positive");
  GeneralizationRecord rec;
  rec.task = task;
  auto probe = [&](int len) {
    const double acc = probe_accuracy(task, len, instances, seed, policy);
    rec.probes.push_back({len, acc});
    return acc >= 1.0;
  };

  std::vector<int> lengths;
  for (int len : kProbeLengths)
    if (len < max_len) lengths.push_back(len);
  lengths.push_back(max_len);

  int good = 0, bad = 0;
  for (int len : lengths) {
    if (probe(len)) {
      good = len;
    } else {
      bad = len;
      break;
    }
  }
  if (bad != 0) {
    int lo = good, hi = bad;  // lo passes (or is 0), hi fails
    while (hi - lo > 1) {
      const int mid = lo + (hi - lo) / 2;
      (probe(mid) ? lo : hi) = mid;
    }
    good = lo;
  }
  rec.max_length = good;
  return rec;
}

inline GeneralizationRecord generalization_sweep(const ParamVector& params, TaskId task, int hidden,
                                                 int max_len = 2000, int instances = 100,
                                                 std::uint64_t seed = 0) {
  auto shape_env = make_env(task, 0);
  const RecurrentNet net(policy_shape(*shape_env, hidden));
  net.check_layout(params);
  return generalization_sweep(
      task, [&](Environment& e) { return net.greedy(params, e); }, max_len, instances, seed);
}

/// Rows 30 … 2000 count the models whose perfect length reaches the row;
/// the last row is the largest perfect length among them.
inline std::string generalization_table_csv(
    const std::vector<std::pair<std::string, std::vector<GeneralizationRecord>>>& columns) {
  std::ostringstream o;
  o << "length";
  for (const auto& [name, recs] : columns) o << ',' << name;
  o << '\n';
  for (int len : kProbeLengths) {
    o << len;
    for (const auto& [name, recs] : columns)
      o << ',' << std::count_if(recs.begin(), recs.end(),
                                [&](const GeneralizationRecord& r) { return r.max_length >= len; });
    o << '\n';
  }
  o << "Max";
  for (const auto& [name, recs] : columns) {
    int best = 0;
    for (const auto& r : recs) best = std::max(best, r.max_length);
    o << ',' << best;
  }
  o << '\n';
  return o.str();
}

}  // namespace urex::harness
