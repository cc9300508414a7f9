// Acceptance suite: prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails. `acceptance N [M ...]` runs a subset.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "temporalot/harness.hpp"
#include "temporalot/mask.hpp"
#include "temporalot/reward.hpp"
#include "temporalot/sinkhorn.hpp"

using namespace temporalot;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* pattern, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), pattern, a, b, c, d);
  return buf;
}

Outcome solver_feasibility() {
  const auto start = Clock::now();
  std::mt19937_64 rng(2024);
  const MaskKind kinds[] = {MaskKind::ones, MaskKind::causal, MaskKind::band, MaskKind::dynamic};
  int failures = 0;
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const Index rows = 1 + static_cast<Index>(rng() % 64);
    const Index cols = (k % 2 == 0) ? rows : 1 + static_cast<Index>(rng() % 64);
    CostMatrix cost;
    if (k % 3 == 0) {
      cost = oracle::random_cost(rng, rows, cols);
    } else {
      const auto a = oracle::random_trajectory(rng, rows, 4);
      const auto b = oracle::random_trajectory(rng, cols, 4);
      cost = context_cost_matrix(a, b, 1 + static_cast<int>(rng() % 4));
    }
    const MaskKind kind = kinds[k % 4];
    const Mask mask = make_mask(kind, cost, static_cast<int>(rng() % 12));
    SinkhornConfig cfg;
    cfg.epsilon = (k / 4) % 2 == 0 ? 0.1 : 0.01;
    cfg.max_iterations = 50;
    cfg.epsilon_scaling = true;
    cfg.newton_steps = 10;
    const TransportPlan p = solve(cost, mask, Marginals::uniform(rows, cols), cfg);
    bool off_support_zero = true;
    for (Index i = 0; i < rows; ++i) {
      for (Index j = 0; j < cols; ++j) {
        if (!mask.allows(i, j) && p.plan(i, j) != 0.0) off_support_zero = false;
      }
    }
    worst = std::max(worst, p.marginal_violation);
    if (!p.converged || p.marginal_violation > 1e-6 || !off_support_zero) ++failures;
  }
  const double elapsed = seconds_since(start);
  return {failures == 0 && elapsed < 10.0,
          fmt("200 instances, %.0f failures, worst violation %.2e, %.2f s", failures, worst, elapsed)};
}

Outcome unmasked_degeneration() {
  std::mt19937_64 rng(7);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const Index rows = 2 + static_cast<Index>(rng() % 20);
    const Index cols = 2 + static_cast<Index>(rng() % 20);
    const CostMatrix cost = oracle::random_cost(rng, rows, cols);
    SinkhornConfig cfg;
    cfg.epsilon = k % 2 == 0 ? 0.1 : 0.05;
    cfg.tolerance = 1e-300;  // run exactly max_iterations
    cfg.max_iterations = 1 + static_cast<int>(rng() % 200);
    const TransportPlan p = solve(cost, ones_mask(rows, cols), Marginals::uniform(rows, cols), cfg);
    const Matrix ref = oracle::reference_sinkhorn(cost.entries, cfg.epsilon, p.iterations_used);
    worst = std::max(worst, (p.plan - ref).cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-8, fmt("50 instances, max entrywise difference %.2e", worst)};
}

Outcome lp_oracle() {
  const auto start = Clock::now();
  std::mt19937_64 rng(11);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const CostMatrix cost = oracle::random_cost(rng, 4, 4);
    SinkhornConfig cfg;
    cfg.epsilon = 0.001;
    cfg.max_iterations = 100000;
    const TransportPlan p = solve(cost, ones_mask(4, 4), Marginals::uniform(4, 4), cfg);
    const double optimum = oracle::best_permutation_cost(cost.entries) / 4.0;
    const double rel = std::abs(transport_objective(p.plan, cost) - optimum) / optimum;
    worst = std::max(worst, rel);
  }
  return {worst <= 0.01 && seconds_since(start) < 10.0,
          fmt("20 instances, worst relative gap %.2e", worst)};
}

Outcome order_invariance() {
  std::mt19937_64 rng(5);
  double worst = 0.0;
  const RewardConfig vanilla = RewardConfig::vanilla();
  for (int k = 0; k < 20; ++k) {
    const Index t = 3 + static_cast<Index>(rng() % 12);
    const auto agent = oracle::random_trajectory(rng, t, 3);
    const auto demo = oracle::random_trajectory(rng, t, 3);
    const double a = ot_rewards(agent, demo, vanilla).sum();
    const double b = ot_rewards(agent, oracle::shuffle_frames(demo, rng), vanilla).sum();
    worst = std::max(worst, std::abs(a - b));
  }
  const auto tau1 = Trajectory::from_rows({{1, 0}, {1, 0}, {0, 1}});
  const auto tau2 = Trajectory::from_rows({{1, 0}, {0, 1}, {1, 0}});
  RewardConfig band;
  band.mask_kind = MaskKind::band;
  band.window = 0;
  band.context_length = 1;
  const double match = ot_rewards(tau1, tau1, band).sum();
  const double reordered = ot_rewards(tau2, tau1, band).sum();
  const double v1 = ot_rewards(tau1, tau1, vanilla).sum();
  const double v2 = ot_rewards(tau2, tau1, vanilla).sum();
  const bool pass = worst <= 1e-8 && match == 0.0 && reordered <= -0.01 && std::abs(v1 - v2) <= 1e-8;
  return {pass, fmt("vanilla permutation gap %.2e; band k_m=0 totals %.3g (match) vs %.3g (reordered)",
                    worst, match, reordered)};
}

Outcome exact_match_zero() {
  std::mt19937_64 rng(3);
  int nonzero = 0;
  for (int k_c = 1; k_c <= 6; ++k_c) {
    for (int k = 0; k < 5; ++k) {
      const auto t = oracle::random_trajectory(rng, 2 + static_cast<Index>(rng() % 30), 4);
      RewardConfig cfg;
      cfg.mask_kind = MaskKind::band;
      cfg.window = 0;
      cfg.context_length = k_c;
      const RewardTrace trace = label_rollout(t, DemoSet({t}), cfg);
      for (Index i = 0; i < trace.rewards.size(); ++i) {
        if (trace.rewards(i) != 0.0) ++nonzero;
      }
      if (trace.total != 0.0) ++nonzero;
    }
  }
  return {nonzero == 0, fmt("k_c in 1..6, 30 trajectories, %.0f nonzero rewards", nonzero)};
}

// Experiments ----------------------------------------------------------------

const std::vector<std::uint64_t> kSeeds = {0, 1, 2, 3, 4};

int workers() { return std::max(1U, std::thread::hardware_concurrency()); }

ExperimentConfig experiment(EnvId env) {
  ExperimentConfig c = default_experiment(env);
  c.seeds = kSeeds;
  c.workers = workers();
  return c;
}

struct Final {
  double mean = 0.0;
  double std = 0.0;
};

// Final aggregate per value of `axis` (a function of the aggregate key).
template <typename Key>
std::map<Key, Final> finals(const ExperimentResults& r, std::function<Key(const ResultRow&)> axis) {
  std::map<std::string, const AggregateRow*> last;
  for (const AggregateRow& a : r.aggregates) {
    auto& slot = last[a.key.config_hash];
    if (!slot || a.key.env_step > slot->key.env_step) slot = &a;
  }
  std::map<Key, Final> out;
  for (const auto& [hash, a] : last) out[axis(a->key)] = {a->mean, a->std};
  return out;
}

Outcome learning_ordering() {
  const auto start = Clock::now();
  ExperimentConfig c = experiment(EnvId::grid_pause_then_move);
  c.sweep.baselines = {Baseline::temporal_ot, Baseline::ot_vanilla};
  const ExperimentResults r = run_experiment(c);
  auto f = finals<std::string>(r, [](const ResultRow& k) { return k.baseline; });
  const double tot = f["temporal_ot"].mean;
  const double van = f["ot_vanilla"].mean;
  const double elapsed = seconds_since(start);
  return {r.ok() && tot - van >= 0.20 && tot >= 0.70 && elapsed < 900.0,
          fmt("temporal_ot %.3f vs ot_vanilla %.3f (gap %.3f), %.0f s", tot, van, tot - van, elapsed)};
}

Outcome sweep_shape() {
  ExperimentConfig km = experiment(EnvId::grid_pause_then_move);
  const int full = km.env.horizon + 1;
  km.sweep.windows = {0, 10, full};
  const ExperimentResults rk = run_experiment(km);
  auto fk = finals<int>(rk, [](const ResultRow& k) { return k.k_m; });
  const bool km_ok = fk[10].mean >= fk[0].mean && fk[10].mean >= fk[full].mean;

  ExperimentConfig ne = experiment(EnvId::grid_pause_then_move);
  ne.sweep.demo_counts = {1, 2, 4};
  const ExperimentResults rn = run_experiment(ne);
  auto fn = finals<int>(rn, [](const ResultRow& k) { return k.n_demos; });
  // Non-decreasing within one standard deviation: each step may drop by at
  // most the larger of the two seed standard deviations.
  bool ne_ok = true;
  const int counts[] = {1, 2, 4};
  for (int k = 0; k + 1 < 3; ++k) {
    const Final a = fn[counts[k]];
    const Final b = fn[counts[k + 1]];
    if (b.mean < a.mean - std::max(a.std, b.std)) ne_ok = false;
  }
  std::ostringstream d;
  d << fmt("k_m {0,10,%.0f}: %.3f %.3f ", full, fk[0].mean, fk[10].mean)
    << fmt("%.3f; N_E {1,2,4}: %.3f ", fk[full].mean, fn[1].mean)
    << fmt("%.3f %.3f (std %.3f ", fn[2].mean, fn[4].mean, fn[1].std)
    << fmt("%.3f %.3f)", fn[2].std, fn[4].std);
  return {rk.ok() && rn.ok() && km_ok && ne_ok, d.str()};
}

Outcome speed_mismatch() {
  ExperimentConfig c = experiment(EnvId::grid_reach);
  c.sweep.strides = {1, 2, 4};
  const ExperimentResults r = run_experiment(c);
  auto f = finals<int>(r, [](const ResultRow& k) { return k.stride; });
  const bool pass = r.ok() && f[2].mean <= f[1].mean && f[4].mean <= f[2].mean && f[4].mean < f[1].mean;
  return {pass, fmt("grid_reach strides {1,2,4}: %.3f %.3f %.3f", f[1].mean, f[2].mean, f[4].mean)};
}

Outcome warm_start() {
  ExperimentConfig c = experiment(EnvId::grid_reach);
  c.sweep.baselines = {Baseline::temporal_ot, Baseline::temporal_ot_pretrained};
  const ExperimentResults r = run_experiment(c);
  std::map<std::string, std::vector<std::pair<long, double>>> curves;
  for (const AggregateRow& a : r.aggregates) curves[a.key.baseline].emplace_back(a.key.env_step, a.mean);
  auto half_time = [&](const std::string& b) {
    auto& c = curves[b];
    std::sort(c.begin(), c.end());
    const double target = 0.5 * c.back().second;
    for (const auto& [step, mean] : c) {
      if (mean >= target) return step;
    }
    return c.back().first;
  };
  const long cold = half_time("temporal_ot");
  const long warm = half_time("temporal_ot_pretrained");
  return {r.ok() && warm < cold,
          fmt("steps to half of final success: pretrained %.0f, cold %.0f", warm, cold)};
}

Outcome determinism() {
  ExperimentConfig c = experiment(EnvId::grid_pause_then_move);
  c.agent.total_env_steps = 4000;
  c.agent.eval_interval = 1000;
  c.seeds = {3, 8};
  c.sweep.baselines = {Baseline::temporal_ot, Baseline::ot_vanilla, Baseline::task_reward};
  c.workers = 1;
  const std::string first = format_results_csv(run_experiment(c).rows);
  c.workers = 3;
  const std::string second = format_results_csv(run_experiment(c).rows);
  const bool pass = first == second && first.size() > std::string(kResultsHeader).size() + 1;
  return {pass, fmt("%.0f-byte CSV, identical across runs and worker counts: %.0f",
                    static_cast<double>(first.size()), pass ? 1.0 : 0.0)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, Outcome (*)()>> criteria = {
      {"solver feasibility", solver_feasibility},
      {"unmasked degeneration", unmasked_degeneration},
      {"LP-oracle equivalence", lp_oracle},
      {"order-invariance dichotomy", order_invariance},
      {"exact-match zero reward", exact_match_zero},
      {"learning-outcome ordering", learning_ordering},
      {"parameter-sweep shape", sweep_shape},
      {"speed-mismatch degradation", speed_mismatch},
      {"BC warm-start sample efficiency", warm_start},
      {"determinism", determinism},
  };
  std::set<int> selected;
  for (int k = 1; k < argc; ++k) selected.insert(std::atoi(argv[k]));

  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", id, criteria[k].first,
                o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
