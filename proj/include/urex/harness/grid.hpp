#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "urex/harness/trial.hpp"

namespace urex::harness {

struct GridOptions {
  std::vector<double> etas{kLearningRateGrid.begin(), kLearningRateGrid.end()};
  std::vector<double> clips{kClipGrid.begin(), kClipGrid.end()};
  int restarts = 5;
  std::uint64_t base_seed = 0;
  Profile profile = Profile::Full;
  int jobs = 1;
  std::string manifest_path;  // JSONL of completed trials; empty keeps results in memory only
  std::string metrics_dir;    // per-trial metrics JSONL; empty disables
  std::function<void(TrialSpec&)> customize;  // applied after the profile defaults
};

/// One completed trial as stored in the manifest.
struct TrialRecord {
  TaskId task = TaskId::Copy;
  Method method = Method::UREX;
  double tau = 0.0;
  double eta = 0.0;
  double clip = 0.0;
  int restart = 0;
  bool success = false;
  long success_step = -1;
  long steps_run = 0;
  double final_expected_reward = 0.0;
  std::string failure_cause;

  nlohmann::json to_json() const {
    return {{"task", std::string(to_string(task))}, {"method", std::string(to_string(method))},
            {"tau", tau}, {"eta", eta}, {"clip", clip}, {"restart", restart},
            {"success", success}, {"success_step", success_step}, {"steps_run", steps_run},
            {"final_expected_reward", final_expected_reward}, {"failure_cause", failure_cause}};
  }
  static TrialRecord from_json(const nlohmann::json& j) {
    TrialRecord r;
    r.task = parse_task(j.at("task").get<std::string>());
    r.method = parse_method(j.at("method").get<std::string>());
    r.tau = j.at("tau").get<double>();
    r.eta = j.at("eta").get<double>();
    r.clip = j.at("clip").get<double>();
    r.restart = j.at("restart").get<int>();
    r.success = j.at("success").get<bool>();
    r.success_step = j.value("success_step", -1L);
    r.steps_run = j.value("steps_run", 0L);
    r.final_expected_reward = j.value("final_expected_reward", 0.0);
    r.failure_cause = j.value("failure_cause", std::string());
    return r;
  }
  bool same_cell(TaskId t, Method m, double ta, double e, double c, int k) const {
    return task == t && method == m && tau == ta && eta == e && clip == c && restart == k;
  }
};

inline std::vector<TrialRecord> read_manifest(const std::string& path) {
  std::vector<TrialRecord> out;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(TrialRecord::from_json(nlohmann::json::parse(line)));
    } catch (const std::exception&) {
      // a torn final line from an interrupted run; that trial reruns
    }
  }
  return out;
}

/// Success counts over (η, c), built only from trial records.
struct GridTable {
  std::vector<double> etas;
  std::vector<double> clips;
  std::vector<std::vector<int>> successes;  // [eta][clip]
  int restarts = 0;

  int total_successes() const {
    int s = 0;
    for (const auto& row : successes)
      for (int v : row) s += v;
    return s;
  }
  int total_trials() const {
    return static_cast<int>(etas.size() * clips.size()) * restarts;
  }
  double percentage() const {
    return total_trials() == 0 ? 0.0 : 100.0 * total_successes() / total_trials();
  }

  std::string to_csv() const {
    std::ostringstream o;
    o << "eta";
    for (double c : clips) o << ",c=" << c;
    o << "\n";
    for (std::size_t i = 0; i < etas.size(); ++i) {
      o << etas[i];
      for (int v : successes[i]) o << "," << v;
      o << "\n";
    }
    o << "successes," << total_successes() << "\ntrials," << total_trials() << "\npercentage,"
      << std::fixed << std::setprecision(1) << percentage() << "\n";
    return o.str();
  }
};

inline GridTable tabulate(const std::vector<TrialRecord>& records, TaskId task, Method method,
                          double tau, const GridOptions& opts) {
  GridTable t;
  t.etas = opts.etas;
  t.clips = opts.clips;
  t.restarts = opts.restarts;
  t.successes.assign(opts.etas.size(), std::vector<int>(opts.clips.size(), 0));
  for (std::size_t i = 0; i < opts.etas.size(); ++i)
    for (std::size_t j = 0; j < opts.clips.size(); ++j)
      for (int k = 0; k < opts.restarts; ++k)
        for (const auto& r : records)
          if (r.same_cell(task, method, tau, opts.etas[i], opts.clips[j], k)) {
            t.successes[i][j] += r.success ? 1 : 0;
            break;
          }
  return t;
}

inline std::uint64_t restart_seed(std::uint64_t base, int restart) {
  return derive_seed(base, {0x5EED, static_cast<std::uint64_t>(restart)});
}

/// Runs every (η, c, restart) trial of one (task, method, τ) not yet in the
/// manifest, appending each finished trial as one line, then tabulates.
inline GridTable run_grid(TaskId task, Method method, double tau, const GridOptions& opts = {}) {
  if (opts.restarts < 1 || opts.jobs < 1) throw std::invalid_argument("grid needs restarts >= 1 and jobs >= 1");
  std::vector<TrialRecord> records;
  if (!opts.manifest_path.empty()) records = read_manifest(opts.manifest_path);

  struct Job {
    double eta, clip;
    int restart;
  };
  std::vector<Job> todo;
  for (double eta : opts.etas)
    for (double clip : opts.clips)
      for (int k = 0; k < opts.restarts; ++k) {
        const bool done = std::any_of(records.begin(), records.end(), [&](const TrialRecord& r) {
          return r.same_cell(task, method, tau, eta, clip, k);
        });
        if (!done) todo.push_back({eta, clip, k});
      }

  std::mutex mu;
  std::ofstream manifest;
  if (!opts.manifest_path.empty()) {
    bool torn = false;
    {
      std::ifstream in(opts.manifest_path, std::ios::binary | std::ios::ate);
      if (in && in.tellg() > 0) {
        in.seekg(-1, std::ios::end);
        torn = in.get() != '\n';
      }
    }
    manifest.open(opts.manifest_path, std::ios::app);
    if (!manifest) throw std::runtime_error("cannot append to " + opts.manifest_path);
    if (torn) manifest << '\n';
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  auto worker = [&] {
    for (std::size_t i = next++; i < todo.size(); i = next++) {
      try {
        const Job& job = todo[i];
        TrialSpec spec = make_trial_spec(task, method, tau, job.eta, job.clip,
                                         restart_seed(opts.base_seed, job.restart), opts.profile);
        if (opts.customize) opts.customize(spec);
        TrialOutputs out;
        if (!opts.metrics_dir.empty()) {
          std::ostringstream name;
          name << to_string(task) << '_' << to_string(method) << "_tau" << tau << "_eta" << job.eta
               << "_c" << job.clip << "_r" << job.restart << ".jsonl";
          out.metrics_path = (std::filesystem::path(opts.metrics_dir) / name.str()).string();
        }
        const TrialResult res = run_trial(spec, out);
        TrialRecord rec{task, method, tau, job.eta, job.clip, job.restart, res.success,
                        res.success_step, res.steps_run, res.final_expected_reward, res.failure_cause};
        std::lock_guard lock(mu);
        if (manifest) manifest << rec.to_json().dump() << '\n' << std::flush;
        records.push_back(std::move(rec));
      } catch (...) {
        std::lock_guard lock(mu);
        if (!error) error = std::current_exception();
        next = todo.size();
      }
    }
  };
  const int n = std::min<int>(opts.jobs, static_cast<int>(todo.size()));
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n; ++i) pool.emplace_back(std::ref(worker));
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return tabulate(records, task, method, tau, opts);
}

}  // namespace urex::harness
