#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "temporalot/agent.hpp"
#include "temporalot/encoder.hpp"
#include "temporalot/envs.hpp"
#include "temporalot/reward.hpp"

namespace temporalot {

enum class Baseline { temporal_ot, ot_vanilla, task_reward, bc, temporal_ot_pretrained };

std::string to_string(Baseline b);
Baseline parse_baseline(std::string_view name);

// Lists of values swept by run_experiment. An empty axis falls back to the
// single value in the base configuration.
struct SweepAxes {
  std::vector<Baseline> baselines;
  std::vector<int> context_lengths;
  std::vector<int> windows;
  std::vector<MaskKind> mask_kinds;
  std::vector<int> demo_counts;
  std::vector<int> strides;
  std::vector<double> gammas;
};

// Defaults follow the reference hyper-parameters: gamma 0.9, two demos,
// context length 3, mask window 10.
struct ExperimentConfig {
  Baseline baseline = Baseline::temporal_ot;
  EnvConfig env;
  EncoderSpec encoder;
  RewardConfig reward;
  AgentConfig agent;
  int n_demos = 2;
  int stride = 1;
  std::uint64_t demo_seed = 1000;  // demo i is generated with demo_seed + i
  std::vector<std::uint64_t> seeds{0};
  SweepAxes sweep;
  int workers = 1;

  void validate() const;
};

// The default experiment for an environment: place-cell features sized to the
// grid and agent budgets that finish in seconds.
ExperimentConfig default_experiment(EnvId env);

nlohmann::json to_json(const ExperimentConfig& config);
// Missing keys keep their defaults from default_experiment(env.id).
ExperimentConfig experiment_from_json(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// One point of a sweep, without the seed.
struct CellConfig {
  Baseline baseline = Baseline::temporal_ot;
  EnvConfig env;
  EncoderSpec encoder;
  RewardConfig reward;
  AgentConfig agent;
  int n_demos = 2;
  int stride = 1;
  std::uint64_t demo_seed = 1000;

  // Reward settings actually used by the baseline (vanilla forces ones, k_c 1).
  RewardConfig effective_reward() const;
};

nlohmann::json to_json(const CellConfig& cell);
// 16 hex digits of FNV-1a over the canonical JSON dump of the cell.
std::string config_hash(const CellConfig& cell);

struct ResultRow {
  std::string config_hash;
  std::string baseline;
  std::string env_id;
  int k_c = 0;
  int k_m = 0;
  int n_demos = 0;
  int stride = 0;
  double gamma = 0.0;
  std::uint64_t seed = 0;
  long env_step = 0;
  double success_rate = 0.0;

  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

struct AggregateRow {
  ResultRow key;  // seed and success_rate unused
  double mean = 0.0;
  double std = 0.0;  // population standard deviation over seeds
  int seeds = 0;
};

struct CellFailure {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string message;
};

struct ExperimentResults {
  std::vector<ResultRow> rows;  // sorted by (hash, seed, env_step)
  std::vector<AggregateRow> aggregates;
  std::vector<CellFailure> failures;
  std::vector<std::pair<std::string, nlohmann::json>> configs;  // hash -> cell

  bool ok() const { return failures.empty(); }
};

std::vector<CellConfig> expand_cells(const ExperimentConfig& config);

DemoSet generate_demos(const CellConfig& cell);

// Trains (or, for bc, only clones) one cell with one seed.
std::vector<ResultRow> run_cell(const CellConfig& cell, std::uint64_t seed);

ExperimentResults run_experiment(const ExperimentConfig& config);

std::vector<AggregateRow> aggregate(const std::vector<ResultRow>& rows);

inline constexpr std::string_view kResultsHeader =
    "config_hash,baseline,env_id,k_c,k_m,n_demos,stride,gamma,seed,env_step,success_rate";

std::string format_results_csv(const std::vector<ResultRow>& rows);
std::vector<ResultRow> parse_results_csv(std::string_view text);
std::string format_aggregate_csv(const std::vector<AggregateRow>& rows);

// results.csv, aggregate.csv, configs.json and failures.txt (if any).
void write_results(const ExperimentResults& results, const std::filesystem::path& out_dir);

struct RelabelReport {
  std::vector<std::filesystem::path> written;
  std::vector<std::pair<std::filesystem::path, std::string>> failures;
  bool ok() const { return failures.empty(); }
};

// One <rollout-stem>.rewards file per rollout in out_dir. Rollouts and demos
// are encoded with `encoder` (each file gets a fresh encoder).
RelabelReport relabel_dataset(const std::vector<std::filesystem::path>& rollout_files,
                              const std::vector<std::filesystem::path>& demo_files,
                              const RewardConfig& reward, const EncoderSpec& encoder,
                              const std::filesystem::path& out_dir);

// Writes curves.svg (learning curve per configuration), one sweep_<axis>.svg
// per varying axis (final success, mean and std over seeds) and summary.txt.
// `configs` (hash -> cell JSON) labels curves by mask kind when given.
// Returns the written paths; throws ArgumentError on an empty table.
std::vector<std::filesystem::path> plot_results(
    const std::vector<ResultRow>& rows, const std::filesystem::path& out_dir,
    const std::vector<std::pair<std::string, nlohmann::json>>& configs = {});

}  // namespace temporalot
