#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "urex/envs/environment.hpp"
#include "urex/policy/params.hpp"
#include "urex/policy/softmax.hpp"
#include "urex/random.hpp"
#include "urex/trajectory.hpp"

namespace urex {

struct NetworkShape {
  int observation_size = 0;
  std::vector<int> head_sizes;
  std::vector<std::string> head_names;
  int hidden = 128;

  int output_size() const { return std::accumulate(head_sizes.begin(), head_sizes.end(), 0); }
  int input_size() const { return observation_size + output_size(); }
};

/// Policy shape for an environment: one softmax head per action factor.
inline NetworkShape policy_shape(const Environment& env, int hidden) {
  NetworkShape s;
  s.observation_size = env.observation_size();
  s.head_sizes = env.head_sizes();
  s.hidden = hidden;
  if (s.head_sizes.size() == 3) {
    s.head_names = {"move", "write", "output"};
  } else {
    s.head_names = {"action"};
  }
  return s;
}

/// Per-step activations recorded by RecurrentNet::forward_step. One flat
/// buffer with a fixed stride per step: gates (i, f, o, g), cell, tanh(cell),
/// hidden, then the raw outputs of every head.
class ForwardTape {
 public:
  int steps() const { return steps_; }

  std::span<const double> outputs(int t) const {
    return {buf_.data() + static_cast<std::size_t>(t) * stride_ + out_offset_,
            static_cast<std::size_t>(out_size_)};
  }
  std::span<const double> hidden(int t) const {
    return {buf_.data() + static_cast<std::size_t>(t) * stride_ + 6 * hidden_,
            static_cast<std::size_t>(hidden_)};
  }

  void clear() {
    steps_ = 0;
    buf_.clear();
    inputs_.clear();
  }

 private:
  friend class RecurrentNet;
  struct Inputs {
    std::array<int, 1 + kMaxHeads> index{};
    int count = 0;
  };

  std::vector<double> buf_;
  std::vector<Inputs> inputs_;
  int steps_ = 0;
  int hidden_ = 0;
  int stride_ = 0;
  int out_offset_ = 0;
  int out_size_ = 0;
};

/// Single-layer LSTM over one-hot inputs (current observation plus the
/// previous action's factors, zero at t = 0) with a linear output per head.
///
/// The same class drives the softmax policy (heads are action factors) and
/// the recurrent Q-network (one head of raw Q-values).
class RecurrentNet {
 public:
  explicit RecurrentNet(NetworkShape shape) : shape_(std::move(shape)) {
    if (shape_.hidden < 1) throw std::invalid_argument("hidden size must be positive");
    if (shape_.head_sizes.empty() || static_cast<int>(shape_.head_sizes.size()) > kMaxHeads)
      throw std::invalid_argument("between 1 and 3 output heads are supported");
    if (shape_.head_names.size() != shape_.head_sizes.size())
      throw std::invalid_argument("one name per head required");
    for (int n : shape_.head_sizes)
      if (n < 1) throw std::invalid_argument("empty head");
    const int H = shape_.hidden;
    layout_.add_segment("cell.input_weights", 4 * H, shape_.input_size());
    layout_.add_segment("cell.recurrent_weights", 4 * H, H);
    layout_.add_segment("cell.bias", 4 * H, 1);
    for (std::size_t j = 0; j < shape_.head_sizes.size(); ++j) {
      layout_.add_segment("head." + shape_.head_names[j] + ".weights", shape_.head_sizes[j], H);
      layout_.add_segment("head." + shape_.head_names[j] + ".bias", shape_.head_sizes[j], 1);
    }
    int off = 0;
    for (int n : shape_.head_sizes) {
      head_offset_.push_back(off);
      off += n;
    }
  }

  const NetworkShape& shape() const { return shape_; }
  int num_heads() const { return static_cast<int>(shape_.head_sizes.size()); }
  std::size_t parameter_count() const { return layout_.size(); }

  /// Fresh parameters: weights U[-0.08, 0.08], forget-gate bias 1.
  ParamVector init_params(std::uint64_t seed) const {
    ParamVector p = layout_;
    Rng rng(derive_seed(seed, {0x1417}));
    for (double& v : p.values()) v = 0.16 * uniform01(rng) - 0.08;
    auto bias = p.matrix(kBias);
    bias.setZero();
    bias.block(shape_.hidden, 0, shape_.hidden, 1).setConstant(1.0);
    for (int j = 0; j < num_heads(); ++j) {
      auto w = p.matrix(head_weights(j));
      const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
      for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = limit * (2.0 * uniform01(rng) - 1.0);
      p.matrix(head_bias(j)).setZero();
    }
    p.metadata()["hidden"] = std::to_string(shape_.hidden);
    return p;
  }

  void check_layout(const ParamVector& p) const {
    if (!p.same_layout(layout_)) throw std::invalid_argument("parameter layout does not match network");
  }

  void check_env(const Environment& env) const {
    if (env.observation_size() != shape_.observation_size || env.head_sizes() != shape_.head_sizes)
      throw std::invalid_argument("environment does not match network shape");
  }

  ForwardTape make_tape() const {
    ForwardTape t;
    t.hidden_ = shape_.hidden;
    t.out_offset_ = 7 * shape_.hidden;
    t.out_size_ = shape_.output_size();
    t.stride_ = t.out_offset_ + t.out_size_;
    return t;
  }

  /// Advances the recurrence by one step and returns the head outputs.
  std::span<const double> forward_step(const ParamVector& p, ForwardTape& tape, int obs,
                                       const FactorIndices* prev) const {
    const int H = shape_.hidden;
    if (obs < 0 || obs >= shape_.observation_size) throw std::out_of_range("observation index");
    ForwardTape::Inputs in;
    in.index[in.count++] = obs;
    if (prev != nullptr) {
      int base = shape_.observation_size;
      for (int j = 0; j < num_heads(); ++j) {
        in.index[in.count++] = base + (*prev)[j];
        base += shape_.head_sizes[j];
      }
    }
    const int t = tape.steps_;
    tape.buf_.resize(static_cast<std::size_t>(t + 1) * tape.stride_);
    tape.inputs_.push_back(in);
    tape.steps_ = t + 1;

    double* cur = tape.buf_.data() + static_cast<std::size_t>(t) * tape.stride_;
    const double* prev_step = t > 0 ? cur - tape.stride_ : nullptr;

    Eigen::Map<Eigen::VectorXd> z(cur, 4 * H);
    const auto Wx = p.matrix(kInputWeights);
    z = p.matrix(kBias).col(0);
    for (int k = 0; k < in.count; ++k) z += Wx.col(in.index[k]);
    if (prev_step != nullptr) {
      Eigen::Map<const Eigen::VectorXd> h_prev(prev_step + 6 * H, H);
      z.noalias() += p.matrix(kRecurrentWeights) * h_prev;
    }
    for (int k = 0; k < 3 * H; ++k) cur[k] = 1.0 / (1.0 + std::exp(-cur[k]));
    for (int k = 3 * H; k < 4 * H; ++k) cur[k] = std::tanh(cur[k]);

    double* c = cur + 4 * H;
    double* tc = cur + 5 * H;
    double* h = cur + 6 * H;
    for (int k = 0; k < H; ++k) {
      const double c_prev = prev_step != nullptr ? prev_step[4 * H + k] : 0.0;
      c[k] = cur[H + k] * c_prev + cur[k] * cur[3 * H + k];
      tc[k] = std::tanh(c[k]);
      h[k] = cur[2 * H + k] * tc[k];
    }
    Eigen::Map<const Eigen::VectorXd> hv(h, H);
    for (int j = 0; j < num_heads(); ++j) {
      Eigen::Map<Eigen::VectorXd> out(cur + 7 * H + head_offset_[j], shape_.head_sizes[j]);
      out = p.matrix(head_bias(j)).col(0);
      out.noalias() += p.matrix(head_weights(j)) * hv;
    }
    return tape.outputs(t);
  }

  /// Teacher-forced forward pass over a recorded trajectory.
  ForwardTape replay(const ParamVector& p, const Trajectory& traj) const {
    if (traj.observations.size() != traj.actions.size())
      throw std::invalid_argument("trajectory observations/actions length mismatch");
    ForwardTape tape = make_tape();
    for (std::size_t t = 0; t < traj.size(); ++t)
      forward_step(p, tape, traj.observations[t], t > 0 ? &traj.actions[t - 1] : nullptr);
    return tape;
  }

  /// Accumulates d/dθ Σ_t Σ_j <G_t^j, out_t^j> into `grad`, where
  /// `out_grads` holds G for every step back to back (steps x output_size).
  void backward(const ParamVector& p, const ForwardTape& tape, std::span<const double> out_grads,
                std::span<double> grad) const {
    const int H = shape_.hidden;
    const int O = shape_.output_size();
    if (out_grads.size() != static_cast<std::size_t>(tape.steps()) * O)
      throw std::invalid_argument("output gradient has the wrong length");
    if (grad.size() != layout_.size()) throw std::invalid_argument("gradient has the wrong length");

    auto seg = [&](std::size_t s) {
      const Segment& sg = layout_.segment(s);
      return MatrixMap(grad.data() + sg.offset, sg.rows, sg.cols);
    };
    auto dWx = seg(kInputWeights);
    auto dWh = seg(kRecurrentWeights);
    auto db = seg(kBias);
    const auto Wh = p.matrix(kRecurrentWeights);

    Eigen::VectorXd dh_next = Eigen::VectorXd::Zero(H);
    Eigen::VectorXd dc_next = Eigen::VectorXd::Zero(H);
    Eigen::VectorXd dh(H), dz(4 * H);

    for (int t = tape.steps() - 1; t >= 0; --t) {
      const double* cur = tape.buf_.data() + static_cast<std::size_t>(t) * tape.stride_;
      const double* prev_step = t > 0 ? cur - tape.stride_ : nullptr;
      const double* g_out = out_grads.data() + static_cast<std::size_t>(t) * O;
      Eigen::Map<const Eigen::VectorXd> h(cur + 6 * H, H);

      dh = dh_next;
      for (int j = 0; j < num_heads(); ++j) {
        Eigen::Map<const Eigen::VectorXd> G(g_out + head_offset_[j], shape_.head_sizes[j]);
        seg(head_weights(j)).noalias() += G * h.transpose();
        seg(head_bias(j)).col(0) += G;
        dh.noalias() += p.matrix(head_weights(j)).transpose() * G;
      }

      const double* gi = cur;
      const double* gf = cur + H;
      const double* go = cur + 2 * H;
      const double* gg = cur + 3 * H;
      const double* tc = cur + 5 * H;
      for (int k = 0; k < H; ++k) {
        const double c_prev = prev_step != nullptr ? prev_step[4 * H + k] : 0.0;
        const double d_o = dh[k] * tc[k];
        const double dc = dh[k] * go[k] * (1.0 - tc[k] * tc[k]) + dc_next[k];
        dz[k] = dc * gg[k] * gi[k] * (1.0 - gi[k]);
        dz[H + k] = dc * c_prev * gf[k] * (1.0 - gf[k]);
        dz[2 * H + k] = d_o * go[k] * (1.0 - go[k]);
        dz[3 * H + k] = dc * gi[k] * (1.0 - gg[k] * gg[k]);
        dc_next[k] = dc * gf[k];
      }
      db.col(0) += dz;
      const auto& in = tape.inputs_[static_cast<std::size_t>(t)];
      for (int k = 0; k < in.count; ++k) dWx.col(in.index[k]) += dz;
      if (prev_step != nullptr) {
        Eigen::Map<const Eigen::VectorXd> h_prev(prev_step + 6 * H, H);
        dWh.noalias() += dz * h_prev.transpose();
        dh_next.noalias() = Wh.transpose() * dz;
      }
    }
  }

  /// Samples actions ancestrally from the factored heads until the episode
  /// ends. The environment must have been reset.
  Trajectory sample(const ParamVector& p, Environment& env, std::uint64_t rng_seed) const {
    return rollout(p, env, [&, rng = Rng(rng_seed)](std::span<const double> logp) mutable {
      return sample_categorical(logp, rng);
    });
  }

  /// Per-factor argmax at every step, lowest index on ties.
  Trajectory greedy(const ParamVector& p, Environment& env) const {
    return rollout(p, env, [](std::span<const double> logp) { return argmax(logp); });
  }

  /// log π(a | h) recomputed from the recorded observations and actions.
  double log_prob(const ParamVector& p, const Trajectory& traj) const {
    ForwardTape tape = replay(p, traj);
    double lp = 0.0;
    std::vector<double> buf(static_cast<std::size_t>(shape_.output_size()));
    for (int t = 0; t < tape.steps(); ++t) {
      auto out = tape.outputs(t);
      for (int j = 0; j < num_heads(); ++j) {
        const auto n = static_cast<std::size_t>(shape_.head_sizes[j]);
        std::span<double> ls(buf.data() + head_offset_[j], n);
        log_softmax(out.subspan(static_cast<std::size_t>(head_offset_[j]), n), ls);
        lp += ls[static_cast<std::size_t>(traj.actions[static_cast<std::size_t>(t)][j])];
      }
    }
    return lp;
  }

  /// Σ_{n,k} c_{n,k} ∇θ log π(a^{(k)} | h^{(n)}), coefficients held constant,
  /// in fixed trajectory order.
  GradientEstimate weighted_logprob_grad(const ParamVector& p, const Batch& batch,
                                         std::span<const double> coefficients) const {
    if (coefficients.size() != batch.trajectory_count())
      throw std::invalid_argument("one coefficient per trajectory required");
    GradientEstimate g;
    g.values.assign(layout_.size(), 0.0);
    std::vector<double> G;
    std::vector<double> probs(static_cast<std::size_t>(shape_.output_size()));
    std::size_t idx = 0;
    for (const auto& group : batch.groups) {
      for (const auto& traj : group.samples) {
        const double c = coefficients[idx++];
        ++g.sample_count;
        if (c == 0.0) continue;
        ForwardTape tape = replay(p, traj);
        const int O = shape_.output_size();
        G.assign(static_cast<std::size_t>(tape.steps()) * O, 0.0);
        for (int t = 0; t < tape.steps(); ++t) {
          auto out = tape.outputs(t);
          for (int j = 0; j < num_heads(); ++j) {
            const auto off = static_cast<std::size_t>(head_offset_[j]);
            const auto n = static_cast<std::size_t>(shape_.head_sizes[j]);
            std::span<double> pr(probs.data() + off, n);
            softmax(out.subspan(off, n), pr);
            double* gt = G.data() + static_cast<std::size_t>(t) * O + off;
            const int a = traj.actions[static_cast<std::size_t>(t)][j];
            for (std::size_t k = 0; k < n; ++k)
              gt[k] = c * ((static_cast<int>(k) == a ? 1.0 : 0.0) - pr[k]);
          }
        }
        backward(p, tape, G, g.values);
      }
    }
    for (std::size_t i = 0; i < g.values.size(); ++i)
      if (!std::isfinite(g.values[i]))
        throw std::runtime_error("non-finite gradient in segment " + layout_.segment_of(i));
    return g;
  }

 private:
  static constexpr std::size_t kInputWeights = 0;
  static constexpr std::size_t kRecurrentWeights = 1;
  static constexpr std::size_t kBias = 2;
  static std::size_t head_weights(int j) { return 3 + 2 * static_cast<std::size_t>(j); }
  static std::size_t head_bias(int j) { return 4 + 2 * static_cast<std::size_t>(j); }

  template <class Choose>
  Trajectory rollout(const ParamVector& p, Environment& env, Choose&& choose) const {
    check_env(env);
    if (env.done()) throw EnvError("environment must be reset before a rollout");
    Trajectory traj;
    traj.env_seed = env.episode().seed;
    traj.input_length = env.input_length();
    ForwardTape tape = make_tape();
    std::vector<double> logp(static_cast<std::size_t>(shape_.output_size()));
    while (!env.done()) {
      const int obs = env.observe().index();
      const auto t = traj.actions.size();
      auto out = forward_step(p, tape, obs, t > 0 ? &traj.actions[t - 1] : nullptr);
      if (!all_finite(out))
        throw std::runtime_error("non-finite logits at step " + std::to_string(t + 1));
      FactorIndices f{};
      for (int j = 0; j < num_heads(); ++j) {
        const auto off = static_cast<std::size_t>(head_offset_[j]);
        const auto n = static_cast<std::size_t>(shape_.head_sizes[j]);
        std::span<double> ls(logp.data() + off, n);
        log_softmax(out.subspan(off, n), ls);
        f[static_cast<std::size_t>(j)] = choose(std::span<const double>(ls));
        traj.log_prob += ls[static_cast<std::size_t>(f[static_cast<std::size_t>(j)])];
      }
      traj.observations.push_back(obs);
      traj.actions.push_back(f);
      StepResult r = env.step(env.decode(f));
      traj.per_step_rewards.push_back(r.reward);
      traj.total_reward += r.reward;
      traj.cause = r.cause;
    }
    return traj;
  }

  NetworkShape shape_;
  ParamVector layout_;
  std::vector<int> head_offset_;
};

}  // namespace urex
