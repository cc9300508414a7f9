#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <span>
#include <unordered_map>
#include <vector>

#include "temporalot/encoder.hpp"
#include "temporalot/envs.hpp"
#include "temporalot/reward.hpp"
#include "temporalot/trajectory.hpp"

namespace temporalot {

struct AgentConfig {
  double learning_rate = 0.5;
  double gamma = 0.9;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  long epsilon_decay_steps = 20000;
  int target_update_period = 50;  // TD updates between target copies
  long total_env_steps = 30000;
  long eval_interval = 2000;
  int eval_episodes = 100;
  int batch_size = 64;
  int updates_per_episode = 40;
  std::size_t buffer_capacity = 50000;
  double bc_margin = 0.5;  // value gap given to the cloned action
  std::uint64_t seed = 0;

  void validate() const;
  double epsilon_at(long env_step) const;
};

// Tabular action values keyed by discretized (observation, time) states. Unseen
// states read as zero.
class QTable {
 public:
  using Row = std::array<double, kNumActions>;

  double value(std::uint64_t state, int action) const;
  void set(std::uint64_t state, int action, double value);
  double max_value(std::uint64_t state) const;
  // Lowest action id among the maxima.
  int greedy_action(std::uint64_t state) const;

  void record_visit(std::uint64_t state, int action);
  long visits(std::uint64_t state, int action) const;

  std::size_t size() const { return values_.size(); }
  const std::unordered_map<std::uint64_t, Row>& rows() const { return values_; }

 private:
  std::unordered_map<std::uint64_t, Row> values_;
  std::unordered_map<std::uint64_t, std::array<long, kNumActions>> visits_;
};

struct TdTransition {
  std::uint64_t state = 0;
  int action = 0;
  double reward = 0.0;
  std::uint64_t next_state = 0;
  bool done = false;
};

// FIFO buffer; uniform sampling with replacement from the caller's RNG.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(const TdTransition& t);
  std::vector<TdTransition> sample(std::size_t count, std::mt19937_64& rng) const;

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  const std::deque<TdTransition>& items() const { return items_; }

 private:
  std::size_t capacity_;
  std::deque<TdTransition> items_;
};

// Sequential Q-learning steps against a frozen target table:
//   q(s,a) += lr * (r + gamma * max_a' target(s',a') * (1 - done) - q(s,a))
void td_update(QTable& q, const QTable& target, std::span<const TdTransition> batch,
               const AgentConfig& config);

enum class RewardSource { ot, task };

// How rollouts are turned into rewards during training.
struct RewardSpec {
  RewardSource source = RewardSource::ot;
  RewardConfig ot;
  EncoderSpec encoder;
};

struct LearningPoint {
  long env_step = 0;
  double success_rate = 0.0;
  friend bool operator==(const LearningPoint&, const LearningPoint&) = default;
};

struct LearningRecord {
  std::uint64_t seed = 0;
  std::vector<LearningPoint> points;
  long unconverged_solves = 0;
  long episodes = 0;

  friend bool operator==(const LearningRecord&, const LearningRecord&) = default;
};

// Fraction of `episodes` greedy (never exploring) rollouts that succeed at the
// final step.
double evaluate(const EnvConfig& env, const QTable& q, int episodes, std::uint64_t seed);

// Behavior cloning into a table: on every demo state the majority action
// (ties toward the lower id) gets value 0 and the others -bc_margin.
QTable bc_pretrain(const EnvConfig& env, const DemoSet& demos, const AgentConfig& config);

// Episode loop: epsilon-greedy rollout, episode-level relabeling (OT or sparse
// task reward), replay, TD updates, greedy evaluation every eval_interval
// steps and at the end. `demos` hold raw observations; they are encoded with
// reward.encoder alongside each rollout. The final table is copied to
// `learned` when given.
LearningRecord train(const EnvConfig& env, const DemoSet& demos, const RewardSpec& reward,
                     const AgentConfig& config, const QTable* warm_start = nullptr,
                     QTable* learned = nullptr);

}  // namespace temporalot
