#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "urex/envs/bandit.hpp"
#include "urex/policy/linear.hpp"
#include "urex/policy/softmax.hpp"
#include "urex/trainers/optim.hpp"
#include "urex/trainers/train_step.hpp"

namespace urex::harness {

struct BanditGrid {
  std::vector<double> etas;
  std::vector<double> taus;
};

struct BanditExperimentConfig {
  int num_actions = 10000;
  int dim = 30;
  double beta = 8.0;
  int repeats = 10;
  int restarts = 10;
  int steps = 1000;
  int K = 10;
  int N = 1;
  double clip = 40.0;
  int record_every = 10;
  std::uint64_t seed = 0;
  BanditGrid ment{{0.1, 0.03, 0.01}, {0.0, 0.01, 0.1}};
  BanditGrid urex{{0.1, 0.03, 0.01}, {0.01, 0.1, 1.0}};

  void validate() const {
    if (num_actions < 1 || dim < 1) throw std::invalid_argument("bandit needs actions >= 1 and dim >= 1");
    if (repeats < 1 || restarts < 1) throw std::invalid_argument("repeats and restarts must be positive");
    if (steps < 1 || record_every < 1) throw std::invalid_argument("steps and record cadence must be positive");
    for (const auto* g : {&ment, &urex})
      if (g->etas.empty() || g->taus.empty()) throw std::invalid_argument("empty hyper-parameter grid");
  }
};

/// Exact expected payoff Σ_a π(a) r_a.
inline double expected_payoff(const LinearSoftmaxPolicy& policy, const ParamVector& p,
                              const std::vector<double>& payoffs) {
  const Eigen::VectorXd pi = policy.probs(p);
  return pi.dot(Eigen::Map<const Eigen::VectorXd>(payoffs.data(), static_cast<Eigen::Index>(payoffs.size())));
}

/// Trains θ from a fresh initialization; returns the expected payoff at
/// step 0, every `record_every` steps, and after the last step.
inline std::vector<double> train_bandit_run(const BanditInstance& inst, Method method, double tau,
                                            double eta, const BanditExperimentConfig& cfg,
                                            std::uint64_t run_seed) {
  const LinearSoftmaxPolicy policy(inst.features);
  ParamVector p = policy.init_params(run_seed);
  OptimState optim(p.size());
  TrainConfig tc;
  tc.method = method;
  tc.tau = tau;
  tc.learning_rate = eta;
  tc.clip_norm = cfg.clip;
  tc.K = cfg.K;
  tc.N = cfg.N;
  tc.validate();

  std::vector<double> curve{expected_payoff(policy, p, inst.payoffs)};
  Batch batch;
  batch.groups.resize(static_cast<std::size_t>(cfg.N));
  for (int step = 0; step < cfg.steps; ++step) {
    const Eigen::VectorXd lp = policy.log_probs(p);
    const std::span<const double> lps(lp.data(), static_cast<std::size_t>(lp.size()));
    Rng rng(derive_seed(run_seed, {static_cast<std::uint64_t>(step)}));
    for (auto& g : batch.groups) {
      g.samples.assign(static_cast<std::size_t>(cfg.K), Trajectory{});
      for (auto& t : g.samples) {
        const int a = sample_categorical(lps, rng);
        t.actions = {{a, 0, 0}};
        t.log_prob = lp[a];
        t.total_reward = inst.payoffs[static_cast<std::size_t>(a)];
      }
    }
    const auto coeffs = batch_coefficients(batch, tc);
    GradientEstimate g = clip_gradient(policy.weighted_logprob_grad(p, batch, coeffs), cfg.clip);
    adam_update(p, g, optim, eta);
    if (!p.all_finite()) throw std::runtime_error("bandit parameters diverged");
    if ((step + 1) % cfg.record_every == 0 || step + 1 == cfg.steps)
      curve.push_back(expected_payoff(policy, p, inst.payoffs));
  }
  return curve;
}

struct BanditMethodResult {
  Method method = Method::UREX;
  double eta = 0.0;
  double tau = 0.0;
  std::vector<double> curve_mean;  // over repeats × restarts
  std::vector<double> curve_std;
  std::vector<double> repeat_final;  // final payoff per repeat, averaged over restarts
  double final_mean = 0.0;
};

struct BanditExperimentResult {
  std::vector<int> record_steps;
  BanditMethodResult ment;
  BanditMethodResult urex;
  /// Every grid point tried: (method, η, τ, final mean).
  struct GridPoint {
    Method method;
    double eta, tau, final_mean;
  };
  std::vector<GridPoint> grid;

  /// Share of repeats in which UREX ends strictly above MENT.
  double urex_win_fraction() const {
    int wins = 0;
    for (std::size_t r = 0; r < urex.repeat_final.size(); ++r) wins += urex.repeat_final[r] > ment.repeat_final[r];
    return urex.repeat_final.empty() ? 0.0 : static_cast<double>(wins) / urex.repeat_final.size();
  }

  std::string curves_csv() const {
    std::ostringstream o;
    o.precision(10);
    o << "step,ment_mean,ment_std,urex_mean,urex_std\n";
    for (std::size_t i = 0; i < record_steps.size(); ++i)
      o << record_steps[i] << ',' << ment.curve_mean[i] << ',' << ment.curve_std[i] << ','
        << urex.curve_mean[i] << ',' << urex.curve_std[i] << '\n';
    return o.str();
  }

  std::string grid_csv() const {
    std::ostringstream o;
    o.precision(10);
    o << "method,eta,tau,final_mean\n";
    for (const auto& g : grid) o << to_string(g.method) << ',' << g.eta << ',' << g.tau << ',' << g.final_mean << '\n';
    return o.str();
  }
};

/// For each repeat the payoffs and features are redrawn; each restart
/// reinitializes θ on the same instance. Every grid point of a method sees
/// the same instances, initializations and sampling seeds; the point with
/// the highest final mean payoff is reported for that method.
inline BanditExperimentResult run_bandit_experiment(const BanditExperimentConfig& cfg) {
  cfg.validate();
  std::vector<BanditInstance> instances;
  for (int r = 0; r < cfg.repeats; ++r)
    instances.push_back(bandit_payoffs(derive_seed(cfg.seed, {0xBA, static_cast<std::uint64_t>(r)}),
                                       cfg.num_actions, cfg.beta, cfg.dim));

  BanditExperimentResult out;
  out.record_steps.push_back(0);
  for (int s = 1; s <= cfg.steps; ++s)
    if (s % cfg.record_every == 0 || s == cfg.steps) out.record_steps.push_back(s);

  auto run_method = [&](Method method, const BanditGrid& grid) {
    BanditMethodResult best;
    bool have = false;
    for (double eta : grid.etas) {
      for (double tau : grid.taus) {
        if (method == Method::UREX && !(tau > 0.0)) continue;
        BanditMethodResult r;
        r.method = method;
        r.eta = eta;
        r.tau = tau;
        std::vector<std::vector<double>> curves;
        for (int rep = 0; rep < cfg.repeats; ++rep) {
          double fin = 0.0;
          for (int k = 0; k < cfg.restarts; ++k) {
            const std::uint64_t seed =
                derive_seed(cfg.seed, {0x7E57, static_cast<std::uint64_t>(rep), static_cast<std::uint64_t>(k)});
            curves.push_back(train_bandit_run(instances[static_cast<std::size_t>(rep)], method, tau, eta, cfg, seed));
            fin += curves.back().back();
          }
          r.repeat_final.push_back(fin / cfg.restarts);
        }
        const std::size_t T = out.record_steps.size();
        r.curve_mean.assign(T, 0.0);
        r.curve_std.assign(T, 0.0);
        for (std::size_t t = 0; t < T; ++t) {
          double s = 0.0, ss = 0.0;
          for (const auto& c : curves) {
            s += c[t];
            ss += c[t] * c[t];
          }
          const double n = static_cast<double>(curves.size());
          r.curve_mean[t] = s / n;
          r.curve_std[t] = std::sqrt(std::max(0.0, ss / n - r.curve_mean[t] * r.curve_mean[t]));
        }
        r.final_mean = r.curve_mean.back();
        out.grid.push_back({method, eta, tau, r.final_mean});
        if (!have || r.final_mean > best.final_mean) {
          best = std::move(r);
          have = true;
        }
      }
    }
    if (!have) throw std::invalid_argument("no valid grid point for " + std::string(to_string(method)));
    return best;
  };
  out.ment = run_method(Method::MENT, cfg.ment);
  out.urex = run_method(Method::UREX, cfg.urex);
  return out;
}

}  // namespace urex::harness
