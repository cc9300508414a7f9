#include <filesystem>
#include <set>

#include "doctest.h"
#include "temporalot/error.hpp"
#include "temporalot/harness.hpp"
#include "temporalot/linalg.hpp"

using namespace temporalot;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "temporalot_tests" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

ExperimentConfig tiny(EnvId env) {
  ExperimentConfig c = default_experiment(env);
  c.agent.total_env_steps = 400;
  c.agent.eval_interval = 200;
  c.agent.eval_episodes = 5;
  return c;
}

ResultRow row(const std::string& hash, std::uint64_t seed, long step, double success) {
  ResultRow r;
  r.config_hash = hash;
  r.baseline = "temporal_ot";
  r.env_id = "grid_reach";
  r.k_c = 3;
  r.k_m = hash == "aaaa" ? 5 : 10;
  r.n_demos = 2;
  r.stride = 1;
  r.gamma = 0.9;
  r.seed = seed;
  r.env_step = step;
  r.success_rate = success;
  return r;
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = text.find(needle); p != std::string::npos; p = text.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("k_m sweep yields one aggregate row per value") {
  ExperimentConfig c = tiny(EnvId::grid_pause_then_move);
  c.agent.total_env_steps = 0;
  c.sweep.windows = {0, 5, 10, c.env.horizon + 1};
  const ExperimentResults r = run_experiment(c);
  CHECK(r.ok());
  CHECK(r.aggregates.size() == 4);
  std::set<int> windows;
  for (const AggregateRow& a : r.aggregates) windows.insert(a.key.k_m);
  CHECK(windows == std::set<int>{0, 5, 10, c.env.horizon + 1});
  CHECK(r.configs.size() == 4);
}

TEST_CASE("sweeps expand as a product and deduplicate") {
  ExperimentConfig c = tiny(EnvId::grid_reach);
  c.sweep.baselines = {Baseline::temporal_ot, Baseline::ot_vanilla};
  c.sweep.windows = {1, 2};
  c.sweep.gammas = {0.9, 0.99};
  // ot_vanilla ignores the window, so its two k_m points coincide.
  const auto cells = expand_cells(c);
  CHECK(cells.size() == 6);
  std::set<std::string> hashes;
  for (const CellConfig& cell : cells) hashes.insert(config_hash(cell));
  CHECK(hashes.size() == 6);
}

TEST_CASE("config hashes are stable and sensitive") {
  const auto cells = expand_cells(tiny(EnvId::grid_reach));
  REQUIRE(cells.size() == 1);
  CellConfig a = cells[0];
  CellConfig b = a;
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 16);
  b.reward.window += 1;
  CHECK(config_hash(a) != config_hash(b));
  b = a;
  b.agent.gamma = 0.99;
  CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("experiment config JSON round-trip") {
  ExperimentConfig c = tiny(EnvId::pointmass_reach);
  c.seeds = {4, 2, 9};
  c.sweep.context_lengths = {1, 3};
  c.sweep.mask_kinds = {MaskKind::causal, MaskKind::dynamic};
  c.reward.sinkhorn.epsilon_scaling = true;
  const nlohmann::json j = to_json(c);
  const ExperimentConfig back = experiment_from_json(j);
  CHECK(to_json(back) == j);
  CHECK(experiment_from_json(nlohmann::json{{"env", {{"id", "grid_reach"}}}}).env.id ==
        EnvId::grid_reach);
  CHECK_THROWS_AS(experiment_from_json(nlohmann::json{{"baseline", "gail"}}), Error);
}

TEST_CASE("experiment validation") {
  ExperimentConfig c = tiny(EnvId::grid_reach);
  c.seeds = {1, 1};
  CHECK_THROWS_AS(c.validate(), ArgumentError);
  c = tiny(EnvId::grid_reach);
  c.sweep.gammas = {1.0};
  CHECK_THROWS_AS(c.validate(), ArgumentError);
  CHECK_THROWS_AS(parse_baseline("ads"), ArgumentError);
}

TEST_CASE("results CSV round-trip") {
  ExperimentConfig c = tiny(EnvId::grid_reach);
  c.seeds = {0, 1};
  c.sweep.baselines = {Baseline::bc, Baseline::task_reward};
  const ExperimentResults r = run_experiment(c);
  REQUIRE(r.ok());
  CHECK(r.rows.size() == 2 * 2 * 3);
  const std::string text = format_results_csv(r.rows);
  CHECK(text.rfind(std::string(kResultsHeader) + "\n", 0) == 0);
  CHECK(parse_results_csv(text) == r.rows);
  CHECK_THROWS_AS(parse_results_csv("a,b\n"), ParseError);
  CHECK_THROWS_AS(parse_results_csv(std::string(kResultsHeader) + "\n1,2\n"), ParseError);

  const auto dir = fresh_dir("csv");
  write_results(r, dir);
  CHECK(read_text_file(dir / "results.csv") == text);
  CHECK(std::filesystem::exists(dir / "aggregate.csv"));
  CHECK(std::filesystem::exists(dir / "configs.json"));
  CHECK_FALSE(std::filesystem::exists(dir / "failures.txt"));
}

TEST_CASE("aggregate reports mean and population std") {
  const std::vector<ResultRow> rows = {row("aaaa", 0, 0, 0.0), row("aaaa", 1, 0, 1.0),
                                       row("aaaa", 2, 0, 0.5), row("bbbb", 0, 0, 0.25)};
  const auto agg = aggregate(rows);
  REQUIRE(agg.size() == 2);
  CHECK(agg[0].mean == doctest::Approx(0.5));
  CHECK(agg[0].std == doctest::Approx(std::sqrt(1.0 / 6.0)));
  CHECK(agg[0].seeds == 3);
  CHECK(agg[1].std == 0.0);
}

TEST_CASE("bc baseline gives a flat curve") {
  ExperimentConfig c = tiny(EnvId::grid_reach);
  c.baseline = Baseline::bc;
  const ExperimentResults r = run_experiment(c);
  REQUIRE(r.rows.size() == 3);
  CHECK(r.rows[0].success_rate == r.rows[2].success_rate);
}

TEST_CASE("runs are reproducible regardless of workers") {
  ExperimentConfig c = tiny(EnvId::grid_pause_then_move);
  c.seeds = {0, 1, 2};
  c.workers = 1;
  const std::string a = format_results_csv(run_experiment(c).rows);
  c.workers = 3;
  CHECK(format_results_csv(run_experiment(c).rows) == a);
}

TEST_CASE("plots: gaps, sweep files and empty tables") {
  const auto dir = fresh_dir("plot");
  // Config aaaa misses its middle evaluation; bbbb is complete.
  const std::vector<ResultRow> rows = {row("aaaa", 0, 0, 0.0), row("aaaa", 0, 2000, 1.0),
                                       row("bbbb", 0, 0, 0.0), row("bbbb", 0, 1000, 0.5),
                                       row("bbbb", 0, 2000, 1.0)};
  const auto written = plot_results(rows, dir);
  const std::string curves = read_text_file(dir / "curves.svg");
  // Three pen-up moves: two for the broken curve, one for the complete one.
  CHECK(count(curves, " M ") == 3);
  CHECK(count(curves, "<circle") == 5);
  CHECK(std::filesystem::exists(dir / "sweep_k_m.svg"));
  CHECK_FALSE(std::filesystem::exists(dir / "sweep_gamma.svg"));
  const std::string sweep = read_text_file(dir / "sweep_k_m.svg");
  CHECK(count(sweep, "<circle") == 2);
  CHECK(std::filesystem::exists(dir / "summary.txt"));
  CHECK(written.size() == 3);
  CHECK_THROWS_AS(plot_results({}, dir), ArgumentError);
}

TEST_CASE("relabeling writes identical traces on rerun") {
  const auto dir = fresh_dir("relabel");
  const EnvConfig env = EnvConfig::defaults(EnvId::grid_reach);
  const Trajectory demo = scripted_expert(env, 1);
  const Trajectory other = scripted_expert(env, 2);
  save_trajectory(demo, dir / "demo.traj");
  save_trajectory(other, dir / "other.traj");
  save_trajectory(demo, dir / "rollout.traj");

  RewardConfig band;
  band.mask_kind = MaskKind::band;
  band.window = 0;
  const EncoderSpec enc = default_experiment(EnvId::grid_reach).encoder;
  const auto out = dir / "out";
  const RelabelReport first =
      relabel_dataset({dir / "rollout.traj"}, {dir / "other.traj", dir / "demo.traj"}, band, enc, out);
  REQUIRE(first.ok());
  REQUIRE(first.written.size() == 1);
  const std::string text = read_text_file(first.written[0]);
  const RewardTrace trace = parse_reward_trace(text);
  CHECK(trace.selected_demo == 1);
  CHECK((trace.rewards.array() == 0.0).all());

  relabel_dataset({dir / "rollout.traj"}, {dir / "other.traj", dir / "demo.traj"}, band, enc, out);
  CHECK(read_text_file(first.written[0]) == text);

  const RelabelReport bad =
      relabel_dataset({dir / "missing.traj"}, {dir / "demo.traj"}, band, enc, out);
  CHECK_FALSE(bad.ok());
}
