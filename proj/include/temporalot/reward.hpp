#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "temporalot/cost.hpp"
#include "temporalot/mask.hpp"
#include "temporalot/sinkhorn.hpp"
#include "temporalot/trajectory.hpp"

namespace temporalot {

struct RewardConfig {
  int context_length = 3;
  MaskKind mask_kind = MaskKind::band;
  int window = 10;
  SinkhornConfig sinkhorn;

  void validate() const;

  // Order-invariant OT reward: all-ones mask, pairwise cosine cost.
  static RewardConfig vanilla();
};

struct SolveDiagnostics {
  int iterations_used = 0;
  double marginal_violation = 0.0;
  bool converged = false;
};

// Full intermediate results of one agent-vs-demo reward computation.
struct OtRewardDetail {
  Vector rewards;
  CostMatrix cost;
  Mask mask;
  TransportPlan plan;
};

struct RewardTrace {
  Vector rewards;  // one nonpositive reward per agent frame
  std::size_t selected_demo = 0;
  double total = 0.0;
  std::vector<double> demo_totals;
  std::vector<SolveDiagnostics> diagnostics;  // one per demo

  bool all_converged() const;
};

OtRewardDetail ot_reward_detail(const Trajectory& agent, const Trajectory& demo,
                                const RewardConfig& config);

// r_i = -sum_j C[i][j] * plan[i][j] with C the context cost and plan the
// masked Sinkhorn solution.
Vector ot_rewards(const Trajectory& agent, const Trajectory& demo, const RewardConfig& config);

// Rewards against every demo; keeps the demo with the largest total (lowest
// index on ties). Non-converged solves are reported in diagnostics, not thrown.
RewardTrace label_rollout(const Trajectory& agent, const DemoSet& demos,
                          const RewardConfig& config);

// Reward trace text format:
//   REWARDS v1 len=<T> selected=<k> demos=<N> total=<x>
//   demo <j> total=<x> iterations=<n> violation=<x> converged=<0|1>   (N lines)
//   <r_0>
//   ...                                                               (T lines)
std::string format_reward_trace(const RewardTrace& trace);
RewardTrace parse_reward_trace(std::string_view text, std::string_view source = "<memory>");
void save_reward_trace(const RewardTrace& trace, const std::filesystem::path& path);
RewardTrace load_reward_trace(const std::filesystem::path& path);

}  // namespace temporalot
