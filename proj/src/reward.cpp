#include "temporalot/reward.hpp"

#include <string>

#include "temporalot/error.hpp"
#include "text_util.hpp"

namespace temporalot {

void RewardConfig::validate() const {
  if (context_length < 1) throw ArgumentError("context length k_c must be >= 1");
  if (window < 0) throw ArgumentError("mask window k_m must be >= 0");
  sinkhorn.validate();
}

RewardConfig RewardConfig::vanilla() {
  RewardConfig c;
  c.context_length = 1;
  c.mask_kind = MaskKind::ones;
  c.window = 0;
  return c;
}

bool RewardTrace::all_converged() const {
  for (const auto& d : diagnostics) {
    if (!d.converged) return false;
  }
  return true;
}

namespace {

template <typename E>
[[noreturn]] void rethrow_for_demo(const E& e, std::size_t demo) {
  throw E("demo " + std::to_string(demo) + ": " + e.what());
}

}  // namespace

OtRewardDetail ot_reward_detail(const Trajectory& agent, const Trajectory& demo,
                                const RewardConfig& config) {
  config.validate();
  CostMatrix cost = context_cost_matrix(agent, demo, config.context_length);
  Mask mask = make_mask(config.mask_kind, cost, config.window);
  TransportPlan plan =
      solve(cost, mask, Marginals::uniform(cost.rows(), cost.cols()), config.sinkhorn);

  Vector rewards(cost.rows());
  for (Index i = 0; i < cost.rows(); ++i) {
    double s = 0.0;
    for (Index j = 0; j < cost.cols(); ++j) s += cost.entries(i, j) * plan.plan(i, j);
    rewards(i) = -s;
  }
  return {std::move(rewards), std::move(cost), std::move(mask), std::move(plan)};
}

Vector ot_rewards(const Trajectory& agent, const Trajectory& demo, const RewardConfig& config) {
  return ot_reward_detail(agent, demo, config).rewards;
}

RewardTrace label_rollout(const Trajectory& agent, const DemoSet& demos,
                          const RewardConfig& config) {
  RewardTrace trace;
  trace.demo_totals.reserve(demos.size());
  trace.diagnostics.reserve(demos.size());
  for (std::size_t k = 0; k < demos.size(); ++k) {
    OtRewardDetail detail;
    try {
      detail = ot_reward_detail(agent, demos[k], config);
    } catch (const FeasibilityError& e) {
      rethrow_for_demo(e, k);
    } catch (const NumericalError& e) {
      rethrow_for_demo(e, k);
    } catch (const ValidationError& e) {
      rethrow_for_demo(e, k);
    } catch (const ArgumentError& e) {
      rethrow_for_demo(e, k);
    }
    const double total = detail.rewards.sum();
    trace.demo_totals.push_back(total);
    trace.diagnostics.push_back(
        {detail.plan.iterations_used, detail.plan.marginal_violation, detail.plan.converged});
    if (k == 0 || total > trace.total) {
      trace.selected_demo = k;
      trace.total = total;
      trace.rewards = std::move(detail.rewards);
    }
  }
  return trace;
}

std::string format_reward_trace(const RewardTrace& trace) {
  std::string out = "REWARDS v1 len=" + std::to_string(trace.rewards.size()) +
                    " selected=" + std::to_string(trace.selected_demo) +
                    " demos=" + std::to_string(trace.demo_totals.size()) +
                    " total=" + format_double(trace.total) + "\n";
  for (std::size_t k = 0; k < trace.demo_totals.size(); ++k) {
    const SolveDiagnostics& d = trace.diagnostics[k];
    out += "demo " + std::to_string(k) + " total=" + format_double(trace.demo_totals[k]) +
           " iterations=" + std::to_string(d.iterations_used) +
           " violation=" + format_double(d.marginal_violation) +
           " converged=" + (d.converged ? "1" : "0") + "\n";
  }
  for (Index i = 0; i < trace.rewards.size(); ++i) out += format_double(trace.rewards(i)) + "\n";
  return out;
}

RewardTrace parse_reward_trace(std::string_view text, std::string_view source) {
  const std::string src(source);
  auto lines = detail::split_lines(text);
  if (lines.empty()) throw ParseError(src + ": empty reward trace");
  auto header = detail::split_ws(lines[0]);
  if (header.size() != 6 || header[0] != "REWARDS" || header[1] != "v1") {
    throw ParseError(src + ": line 1: expected 'REWARDS v1 len=<T> selected=<k> demos=<N> total=<x>'");
  }
  const long len = detail::parse_key_int(header[2], "len", source, 1);
  const long selected = detail::parse_key_int(header[3], "selected", source, 0);
  const long demos = detail::parse_key_int(header[4], "demos", source, 1);
  RewardTrace trace;
  trace.total = parse_double(detail::key_value(header[5], "total", source), src + ": total");
  if (selected >= demos) throw ParseError(src + ": selected demo index out of range");
  trace.selected_demo = static_cast<std::size_t>(selected);
  if (static_cast<long>(lines.size()) != 1 + demos + len) {
    throw ParseError(src + ": expected " + std::to_string(1 + demos + len) + " lines");
  }
  for (long k = 0; k < demos; ++k) {
    const std::string ctx = src + ": line " + std::to_string(k + 2);
    auto f = detail::split_ws(lines[static_cast<std::size_t>(1 + k)]);
    if (f.size() != 6 || f[0] != "demo" || f[1] != std::to_string(k)) {
      throw ParseError(ctx + ": expected 'demo " + std::to_string(k) + " ...'");
    }
    trace.demo_totals.push_back(parse_double(detail::key_value(f[2], "total", ctx), ctx));
    SolveDiagnostics d;
    d.iterations_used = static_cast<int>(detail::parse_key_int(f[3], "iterations", ctx, 0));
    d.marginal_violation = parse_double(detail::key_value(f[4], "violation", ctx), ctx);
    const auto conv = detail::key_value(f[5], "converged", ctx);
    if (conv != "0" && conv != "1") throw ParseError(ctx + ": converged must be 0 or 1");
    d.converged = conv == "1";
    trace.diagnostics.push_back(d);
  }
  trace.rewards.resize(len);
  for (long i = 0; i < len; ++i) {
    const auto line_no = static_cast<std::size_t>(1 + demos + i);
    trace.rewards(i) = parse_double(detail::trim(lines[line_no]),
                                    src + ": line " + std::to_string(line_no + 1));
  }
  return trace;
}

void save_reward_trace(const RewardTrace& trace, const std::filesystem::path& path) {
  write_text_file(path, format_reward_trace(trace));
}

RewardTrace load_reward_trace(const std::filesystem::path& path) {
  return parse_reward_trace(read_text_file(path), path.string());
}

}  // namespace temporalot
