// temporalot: demo generation, offline relabeling, training runs, sweeps and
// plots for the masked-OT imitation reward.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "temporalot/error.hpp"
#include "temporalot/harness.hpp"

namespace fs = std::filesystem;
using namespace temporalot;

namespace {

// Flags shared by train and sweep; unset flags leave the config untouched.
struct Overrides {
  std::optional<std::string> env;
  std::optional<std::string> baseline;
  std::optional<std::string> mask;
  std::optional<int> k_c;
  std::optional<int> k_m;
  std::optional<int> n_demos;
  std::optional<int> stride;
  std::optional<double> gamma;
  std::optional<double> epsilon;
  std::optional<int> max_iterations;
  std::optional<int> newton_steps;
  bool epsilon_scaling = false;
  std::optional<long> total_steps;
  std::optional<long> eval_interval;
  std::optional<int> eval_episodes;
  std::optional<int> horizon;
  std::optional<int> workers;
};

void add_solver_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--epsilon", o.epsilon, "entropic regularizer");
  cmd->add_option("--max-iterations", o.max_iterations, "Sinkhorn sweeps (per epsilon stage)");
  cmd->add_option("--newton-steps", o.newton_steps, "Newton steps after unconverged sweeps");
  cmd->add_flag("--epsilon-scaling", o.epsilon_scaling, "anneal epsilon from the cost range");
}

void apply_solver_flags(const Overrides& o, SinkhornConfig& s) {
  if (o.epsilon) s.epsilon = *o.epsilon;
  if (o.max_iterations) s.max_iterations = *o.max_iterations;
  if (o.newton_steps) s.newton_steps = *o.newton_steps;
  if (o.epsilon_scaling) s.epsilon_scaling = true;
}

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--env", o.env, "grid_reach | grid_pause_then_move | pointmass_reach");
  cmd->add_option("--baseline", o.baseline,
                  "temporal_ot | ot_vanilla | task_reward | bc | temporal_ot_pretrained");
  cmd->add_option("--mask", o.mask, "ones | causal | band | dynamic");
  cmd->add_option("--k-c", o.k_c, "context length");
  cmd->add_option("--k-m", o.k_m, "mask window");
  cmd->add_option("--n-demos", o.n_demos, "number of expert demos");
  cmd->add_option("--stride", o.stride, "demo subsampling stride");
  cmd->add_option("--gamma", o.gamma, "discount factor");
  add_solver_flags(cmd, o);
  cmd->add_option("--total-steps", o.total_steps, "env steps per training run");
  cmd->add_option("--eval-interval", o.eval_interval, "env steps between evaluations");
  cmd->add_option("--eval-episodes", o.eval_episodes, "greedy episodes per evaluation");
  cmd->add_option("--horizon", o.horizon, "episode length");
  cmd->add_option("--workers", o.workers, "concurrent sweep cells");
}

ExperimentConfig build_config(const std::optional<std::string>& config_path, const Overrides& o,
                              const std::vector<std::uint64_t>& seeds) {
  ExperimentConfig c = config_path ? load_experiment_config(*config_path)
                                   : default_experiment(o.env ? parse_env_id(*o.env)
                                                              : EnvId::grid_pause_then_move);
  if (o.env && parse_env_id(*o.env) != c.env.id) {
    const ExperimentConfig fresh = default_experiment(parse_env_id(*o.env));
    c.env = fresh.env;
    c.encoder = fresh.encoder;
  }
  if (o.baseline) c.baseline = parse_baseline(*o.baseline);
  if (o.mask) c.reward.mask_kind = parse_mask_kind(*o.mask);
  if (o.k_c) c.reward.context_length = *o.k_c;
  if (o.k_m) c.reward.window = *o.k_m;
  if (o.n_demos) c.n_demos = *o.n_demos;
  if (o.stride) c.stride = *o.stride;
  if (o.gamma) c.agent.gamma = *o.gamma;
  apply_solver_flags(o, c.reward.sinkhorn);
  if (o.total_steps) c.agent.total_env_steps = *o.total_steps;
  if (o.eval_interval) c.agent.eval_interval = *o.eval_interval;
  if (o.eval_episodes) c.agent.eval_episodes = *o.eval_episodes;
  if (o.horizon) c.env.horizon = *o.horizon;
  if (o.workers) c.workers = *o.workers;
  if (!seeds.empty()) c.seeds = seeds;
  c.validate();
  return c;
}

int report(const ExperimentResults& results, const fs::path& out_dir) {
  write_results(results, out_dir);
  std::cout << "wrote " << results.rows.size() << " rows for " << results.configs.size()
            << " configurations to " << out_dir.string() << "\n";
  if (!results.ok()) {
    for (const CellFailure& f : results.failures) {
      std::cerr << "failed: " << f.config_hash << " seed " << f.seed << ": " << f.message << "\n";
    }
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Masked optimal-transport imitation rewards"};
  app.require_subcommand(1);

  // gen-demos
  auto* gen = app.add_subcommand("gen-demos", "Write scripted expert demos as trajectory files");
  std::optional<std::string> gen_config;
  std::string gen_env = "grid_pause_then_move";
  std::vector<std::uint64_t> gen_seeds;
  int gen_stride = 1;
  std::string gen_out;
  gen->add_option("--config", gen_config, "experiment config (JSON); its env is used");
  gen->add_option("--env", gen_env, "environment id");
  gen->add_option("--seed", gen_seeds, "episode seeds")->delimiter(',')->required();
  gen->add_option("--stride", gen_stride, "subsampling stride")->check(CLI::PositiveNumber);
  gen->add_option("--out-dir", gen_out, "output directory")->required();

  // relabel
  auto* relabel = app.add_subcommand("relabel", "Compute reward traces for rollout files");
  std::vector<std::string> rollout_files;
  std::vector<std::string> demo_files;
  std::optional<std::string> relabel_config;
  std::string relabel_out;
  std::string relabel_encoder = "identity";
  Overrides relabel_o;
  relabel->add_option("--rollout", rollout_files, "rollout trajectory files")->required();
  relabel->add_option("--demo", demo_files, "demo trajectory files")->required();
  relabel->add_option("--config", relabel_config, "experiment config (JSON); its reward is used");
  relabel->add_option("--encoder", relabel_encoder,
                      "identity (files hold features) or config (use the config's encoder)");
  relabel->add_option("--mask", relabel_o.mask, "ones | causal | band | dynamic");
  relabel->add_option("--k-c", relabel_o.k_c, "context length");
  relabel->add_option("--k-m", relabel_o.k_m, "mask window");
  add_solver_flags(relabel, relabel_o);
  relabel->add_option("--out-dir", relabel_out, "output directory")->required();

  // train
  auto* train_cmd = app.add_subcommand("train", "Train one configuration");
  std::optional<std::string> train_config;
  std::vector<std::uint64_t> train_seeds;
  std::string train_out;
  Overrides train_o;
  train_cmd->add_option("--config", train_config, "experiment config (JSON)");
  train_cmd->add_option("--seed", train_seeds, "training seeds")->delimiter(',')->required();
  train_cmd->add_option("--out-dir", train_out, "output directory")->required();
  add_overrides(train_cmd, train_o);

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a parameter sweep");
  std::optional<std::string> sweep_config;
  std::vector<std::uint64_t> sweep_seeds;
  std::string sweep_out;
  Overrides sweep_o;
  std::vector<std::string> sweep_baselines, sweep_masks;
  std::vector<int> sweep_kc, sweep_km, sweep_n, sweep_strides;
  std::vector<double> sweep_gammas;
  sweep_cmd->add_option("--config", sweep_config, "experiment config (JSON)");
  sweep_cmd->add_option("--seed", sweep_seeds, "training seeds")->delimiter(',')->required();
  sweep_cmd->add_option("--out-dir", sweep_out, "output directory")->required();
  add_overrides(sweep_cmd, sweep_o);
  sweep_cmd->add_option("--sweep-baseline", sweep_baselines, "baselines to sweep")->delimiter(',');
  sweep_cmd->add_option("--sweep-mask", sweep_masks, "mask kinds to sweep")->delimiter(',');
  sweep_cmd->add_option("--sweep-k-c", sweep_kc, "context lengths to sweep")->delimiter(',');
  sweep_cmd->add_option("--sweep-k-m", sweep_km, "mask windows to sweep")->delimiter(',');
  sweep_cmd->add_option("--sweep-n-demos", sweep_n, "demo counts to sweep")->delimiter(',');
  sweep_cmd->add_option("--sweep-stride", sweep_strides, "demo strides to sweep")->delimiter(',');
  sweep_cmd->add_option("--sweep-gamma", sweep_gammas, "discount factors to sweep")->delimiter(',');

  // plot
  auto* plot_cmd = app.add_subcommand("plot", "Render SVG plots from a results directory");
  std::string plot_in;
  std::string plot_out;
  plot_cmd->add_option("--results", plot_in, "directory holding results.csv")->required();
  plot_cmd->add_option("--out-dir", plot_out, "output directory (defaults to --results)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      EnvConfig env = gen_config ? load_experiment_config(*gen_config).env
                                 : default_experiment(parse_env_id(gen_env)).env;
      fs::create_directories(gen_out);
      for (std::uint64_t seed : gen_seeds) {
        Trajectory demo = scripted_expert(env, seed);
        if (gen_stride > 1) demo = subsample_demo(demo, gen_stride);
        const fs::path path = fs::path(gen_out) / ("demo_" + std::to_string(seed) + ".traj");
        save_trajectory(demo, path);
        std::cout << path.string() << " (" << demo.length() << " frames)\n";
      }
      return 0;
    }

    if (*relabel) {
      ExperimentConfig c = relabel_config ? load_experiment_config(*relabel_config)
                                          : default_experiment(EnvId::grid_pause_then_move);
      if (relabel_o.mask) c.reward.mask_kind = parse_mask_kind(*relabel_o.mask);
      if (relabel_o.k_c) c.reward.context_length = *relabel_o.k_c;
      if (relabel_o.k_m) c.reward.window = *relabel_o.k_m;
      apply_solver_flags(relabel_o, c.reward.sinkhorn);
      EncoderSpec encoder;
      if (relabel_encoder == "config") {
        encoder = c.encoder;
      } else if (relabel_encoder != "identity") {
        throw ArgumentError("--encoder must be 'identity' or 'config'");
      }
      std::vector<fs::path> rollouts(rollout_files.begin(), rollout_files.end());
      std::vector<fs::path> demos(demo_files.begin(), demo_files.end());
      const RelabelReport rep = relabel_dataset(rollouts, demos, c.reward, encoder, relabel_out);
      for (const auto& p : rep.written) std::cout << p.string() << "\n";
      for (const auto& [path, msg] : rep.failures) {
        std::cerr << "failed: " << path.string() << ": " << msg << "\n";
      }
      return rep.ok() ? 0 : 2;
    }

    if (*train_cmd) {
      ExperimentConfig c = build_config(train_config, train_o, train_seeds);
      c.sweep = {};
      return report(run_experiment(c), train_out);
    }

    if (*sweep_cmd) {
      ExperimentConfig c = build_config(sweep_config, sweep_o, sweep_seeds);
      for (const auto& b : sweep_baselines) c.sweep.baselines.push_back(parse_baseline(b));
      for (const auto& m : sweep_masks) c.sweep.mask_kinds.push_back(parse_mask_kind(m));
      if (!sweep_kc.empty()) c.sweep.context_lengths = sweep_kc;
      if (!sweep_km.empty()) c.sweep.windows = sweep_km;
      if (!sweep_n.empty()) c.sweep.demo_counts = sweep_n;
      if (!sweep_strides.empty()) c.sweep.strides = sweep_strides;
      if (!sweep_gammas.empty()) c.sweep.gammas = sweep_gammas;
      c.validate();
      return report(run_experiment(c), sweep_out);
    }

    if (*plot_cmd) {
      const fs::path in(plot_in);
      const fs::path out = plot_out.empty() ? in : fs::path(plot_out);
      const auto rows = parse_results_csv(read_text_file(in / "results.csv"));
      std::vector<std::pair<std::string, nlohmann::json>> configs;
      if (fs::exists(in / "configs.json")) {
        const auto j = nlohmann::json::parse(read_text_file(in / "configs.json"));
        for (const auto& [hash, cfg] : j.items()) configs.emplace_back(hash, cfg);
      }
      for (const auto& p : plot_results(rows, out, configs)) std::cout << p.string() << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
