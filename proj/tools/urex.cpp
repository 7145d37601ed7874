// Command-line front end for the experiment harness.
//
// Every subcommand also reads a key = value config file given with
// --config; keys for a subcommand go under a [run], [grid], ... section and
// flags on the command line take precedence.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "urex/harness.hpp"

namespace {

using namespace urex;
using namespace urex::harness;

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

struct RunArgs {
  std::string task = "copy";
  std::string method = "urex";
  double tau = 0.1;
  double eta = 0.01;
  double clip = 40.0;
  std::uint64_t seed = 0;
  int steps = 0;
  std::string profile = "full";
  int hidden = 0;
  int eval_min = 0, eval_max = 0;
  bool perfect = false;
  std::string metrics, checkpoint;
};

int cmd_run(const RunArgs& a) {
  TrialSpec spec = make_trial_spec(parse_task(a.task), parse_method(a.method), a.tau, a.eta, a.clip, a.seed,
                                   parse_profile(a.profile));
  if (a.steps > 0) spec.max_steps = a.steps;
  if (a.hidden > 0) spec.hidden = a.hidden;
  if (a.eval_min > 0) spec.eval.range.lo = a.eval_min;
  if (a.eval_max > 0) spec.eval.range.hi = a.eval_max;
  spec.eval.require_perfect = a.perfect;
  const TrialResult r = run_trial(spec, {a.metrics, a.checkpoint});
  nlohmann::json j = {{"task", a.task},
                      {"method", a.method},
                      {"success", r.success},
                      {"success_step", r.success_step},
                      {"steps_run", r.steps_run},
                      {"final_expected_reward", r.final_expected_reward},
                      {"final_max_len", r.final_max_len}};
  if (!r.failure_cause.empty()) j["failure_cause"] = r.failure_cause;
  if (!r.evaluations.empty()) j["last_eval_mean_reward"] = r.evaluations.back().mean_reward;
  std::cout << j.dump() << '\n';
  return 0;
}

struct GridArgs {
  std::string task = "copy";
  std::string method = "urex";
  double tau = 0.1;
  std::string profile = "full";
  int restarts = 5;
  int jobs = 1;
  int steps = 0;
  std::uint64_t seed = 0;
  std::string manifest = "manifest.jsonl";
  std::string summary = "-";
  std::string metrics_dir;
};

int cmd_grid(const GridArgs& a) {
  GridOptions o;
  o.profile = parse_profile(a.profile);
  o.restarts = a.restarts;
  o.jobs = a.jobs;
  o.base_seed = a.seed;
  o.manifest_path = a.manifest;
  o.metrics_dir = a.metrics_dir;
  if (a.steps > 0) o.customize = [s = a.steps](TrialSpec& t) { t.max_steps = s; };
  const GridTable t = run_grid(parse_task(a.task), parse_method(a.method), a.tau, o);
  write_text(a.summary, t.to_csv());
  return 0;
}

struct GeneralizeArgs {
  std::string checkpoint;
  int max_len = 2000;
  int instances = 100;
  std::uint64_t seed = 0;
  std::string out = "-";
};

int cmd_generalize(const GeneralizeArgs& a) {
  const ParamVector p = load_checkpoint(a.checkpoint);
  const auto& meta = p.metadata();
  if (!meta.count("task") || !meta.count("hidden"))
    throw std::runtime_error("checkpoint lacks task/hidden metadata");
  const TaskId task = parse_task(meta.at("task"));
  const GeneralizationRecord rec =
      generalization_sweep(p, task, std::stoi(meta.at("hidden")), a.max_len, a.instances, a.seed);
  write_text(a.out, rec.to_csv());
  return 0;
}

struct BanditArgs {
  BanditExperimentConfig cfg;
  std::string out = "-";
  std::string grid_out;
};

int cmd_bandit(const BanditArgs& a) {
  const BanditExperimentResult r = run_bandit_experiment(a.cfg);
  write_text(a.out, r.curves_csv());
  if (!a.grid_out.empty()) write_text(a.grid_out, r.grid_csv());
  std::fprintf(stderr, "ment eta=%g tau=%g final=%.4f | urex eta=%g tau=%g final=%.4f | urex ahead in %.0f%% of repeats\n",
               r.ment.eta, r.ment.tau, r.ment.final_mean, r.urex.eta, r.urex.tau, r.urex.final_mean,
               100.0 * r.urex_win_fraction());
  return 0;
}

struct TraceArgs {
  std::string task = "binary_search";
  std::uint64_t seed = 0;
  std::string checkpoint;
  int length = 0;
  int position = -1;
  std::string strategy = "binary";
};

int cmd_trace(const TraceArgs& a) {
  const TaskId task = parse_task(a.task);
  LengthRange range = default_length_range(task);
  if (a.length > 0) range = {a.length, a.length};
  auto env = make_env(task, a.seed, range, env_options_for(task, range));
  env->reset();
  if (a.position >= 0) {
    auto* search = dynamic_cast<BinarySearchEnv*>(env.get());
    if (search == nullptr) throw std::invalid_argument("--position applies to binary_search only");
    search->place_query(a.position);
  }
  std::function<Trajectory(Environment&)> policy;
  std::optional<RecurrentNet> net;
  ParamVector params;
  if (!a.checkpoint.empty()) {
    params = load_checkpoint(a.checkpoint);
    const int hidden = std::stoi(params.metadata().at("hidden"));
    net.emplace(policy_shape(*env, hidden));
    net->check_layout(params);
    policy = [&](Environment& e) { return net->greedy(params, e); };
  } else {
    const SearchStrategy s = a.strategy == "linear" ? SearchStrategy::Linear : SearchStrategy::Binary;
    policy = [s](Environment& e) { return e.oracle_rollout(s); };
  }
  std::cout << render_trace(trace_episode(*env, policy));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"urex: train and evaluate policy-gradient agents on algorithmic tasks"};
  app.set_config("--config", "", "key = value config file; [subcommand] sections");
  app.require_subcommand(1);

  RunArgs run;
  auto* r = app.add_subcommand("run", "train one configuration");
  r->add_option("--task", run.task, "task id")->capture_default_str();
  r->add_option("--method", run.method, "ment | urex | qlearn")->capture_default_str();
  r->add_option("--tau", run.tau)->capture_default_str();
  r->add_option("--eta", run.eta, "learning rate")->capture_default_str();
  r->add_option("--clip", run.clip, "gradient L2 clip")->capture_default_str();
  r->add_option("--seed", run.seed, "restart seed")->capture_default_str();
  r->add_option("--steps", run.steps, "step budget (0: task default)");
  r->add_option("--profile", run.profile, "desk | full")->capture_default_str();
  r->add_option("--hidden", run.hidden, "LSTM width (0: profile default)");
  r->add_option("--eval-min", run.eval_min, "shortest evaluation length");
  r->add_option("--eval-max", run.eval_max, "longest evaluation length");
  r->add_flag("--perfect", run.perfect, "success needs every evaluation episode solved");
  r->add_option("--metrics", run.metrics, "metrics JSONL path");
  r->add_option("--checkpoint", run.checkpoint, "write final parameters here");

  GridArgs grid;
  auto* g = app.add_subcommand("grid", "learning-rate x clipping grid with restarts");
  g->add_option("--task", grid.task)->capture_default_str();
  g->add_option("--method", grid.method)->capture_default_str();
  g->add_option("--tau", grid.tau)->capture_default_str();
  g->add_option("--profile", grid.profile)->capture_default_str();
  g->add_option("--restarts", grid.restarts)->capture_default_str();
  g->add_option("--jobs", grid.jobs, "parallel trials")->capture_default_str();
  g->add_option("--steps", grid.steps, "step budget override");
  g->add_option("--seed", grid.seed, "base seed")->capture_default_str();
  g->add_option("--manifest", grid.manifest, "completed-trial JSONL")->capture_default_str();
  g->add_option("--summary", grid.summary, "summary CSV path, - for stdout")->capture_default_str();
  g->add_option("--metrics-dir", grid.metrics_dir, "per-trial metrics directory");

  GeneralizeArgs gen;
  auto* ge = app.add_subcommand("generalize", "longest input a checkpoint solves perfectly");
  ge->add_option("--checkpoint", gen.checkpoint)->required();
  ge->add_option("--max-len", gen.max_len)->capture_default_str();
  ge->add_option("--instances", gen.instances, "instances per probe length")->capture_default_str();
  ge->add_option("--seed", gen.seed)->capture_default_str();
  ge->add_option("--out", gen.out, "CSV path, - for stdout")->capture_default_str();

  BanditArgs bandit;
  auto* b = app.add_subcommand("bandit", "linear-softmax bandit comparison of MENT and UREX");
  b->add_option("--actions", bandit.cfg.num_actions)->capture_default_str();
  b->add_option("--dim", bandit.cfg.dim)->capture_default_str();
  b->add_option("--beta", bandit.cfg.beta)->capture_default_str();
  b->add_option("--repeats", bandit.cfg.repeats)->capture_default_str();
  b->add_option("--restarts", bandit.cfg.restarts)->capture_default_str();
  b->add_option("--steps", bandit.cfg.steps)->capture_default_str();
  b->add_option("--samples", bandit.cfg.K, "samples per step")->capture_default_str();
  b->add_option("--seed", bandit.cfg.seed)->capture_default_str();
  b->add_option("--ment-eta", bandit.cfg.ment.etas)->capture_default_str();
  b->add_option("--ment-tau", bandit.cfg.ment.taus)->capture_default_str();
  b->add_option("--urex-eta", bandit.cfg.urex.etas)->capture_default_str();
  b->add_option("--urex-tau", bandit.cfg.urex.taus)->capture_default_str();
  b->add_option("--out", bandit.out, "curves CSV, - for stdout")->capture_default_str();
  b->add_option("--grid-out", bandit.grid_out, "per-grid-point CSV");

  TraceArgs trace;
  auto* t = app.add_subcommand("trace", "step-by-step table of one episode");
  t->add_option("--task", trace.task)->capture_default_str();
  t->add_option("--seed", trace.seed)->capture_default_str();
  t->add_option("--checkpoint", trace.checkpoint, "greedy policy; scripted oracle when omitted");
  t->add_option("--length", trace.length, "input length, or n for binary_search");
  t->add_option("--position", trace.position, "query position (binary_search)");
  t->add_option("--strategy", trace.strategy, "binary | linear (scripted search)")->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  try {
    if (r->parsed()) return cmd_run(run);
    if (g->parsed()) return cmd_grid(grid);
    if (ge->parsed()) return cmd_generalize(gen);
    if (b->parsed()) return cmd_bandit(bandit);
    if (t->parsed()) return cmd_trace(trace);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
