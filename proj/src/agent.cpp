#include "temporalot/agent.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>

#include "temporalot/error.hpp"

namespace temporalot {

namespace {

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

int parse_action(const std::string& id) {
  int a = -1;
  auto [ptr, ec] = std::from_chars(id.data(), id.data() + id.size(), a);
  if (ec != std::errc{} || ptr != id.data() + id.size() || a < 0 || a >= kNumActions) {
    throw ArgumentError("action id '" + id + "' is not a valid environment action");
  }
  return a;
}

}  // namespace

void AgentConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ArgumentError("learning_rate must be positive");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ArgumentError("gamma must lie in [0, 1)");
  if (epsilon_start < 0.0 || epsilon_start > 1.0 || epsilon_end < 0.0 || epsilon_end > 1.0) {
    throw ArgumentError("exploration rates must lie in [0, 1]");
  }
  if (epsilon_decay_steps < 0) throw ArgumentError("epsilon_decay_steps must be >= 0");
  if (target_update_period < 1) throw ArgumentError("target_update_period must be >= 1");
  if (total_env_steps < 0) throw ArgumentError("total_env_steps must be >= 0");
  if (eval_interval < 1) throw ArgumentError("eval_interval must be >= 1");
  if (eval_episodes < 1) throw ArgumentError("eval_episodes must be >= 1");
  if (batch_size < 1) throw ArgumentError("batch_size must be >= 1");
  if (updates_per_episode < 0) throw ArgumentError("updates_per_episode must be >= 0");
  if (buffer_capacity < 1) throw ArgumentError("buffer_capacity must be >= 1");
  if (bc_margin < 0.0) throw ArgumentError("bc_margin must be >= 0");
}

double AgentConfig::epsilon_at(long env_step) const {
  if (epsilon_decay_steps == 0 || env_step >= epsilon_decay_steps) return epsilon_end;
  const double frac = static_cast<double>(env_step) / static_cast<double>(epsilon_decay_steps);
  return epsilon_start + (epsilon_end - epsilon_start) * frac;
}

double QTable::value(std::uint64_t state, int action) const {
  auto it = values_.find(state);
  return it == values_.end() ? 0.0 : it->second[static_cast<std::size_t>(action)];
}

void QTable::set(std::uint64_t state, int action, double value) {
  if (!std::isfinite(value)) throw NumericalError("non-finite Q value");
  auto [it, inserted] = values_.try_emplace(state);
  if (inserted) it->second.fill(0.0);
  it->second[static_cast<std::size_t>(action)] = value;
}

double QTable::max_value(std::uint64_t state) const {
  auto it = values_.find(state);
  if (it == values_.end()) return 0.0;
  return *std::max_element(it->second.begin(), it->second.end());
}

int QTable::greedy_action(std::uint64_t state) const {
  auto it = values_.find(state);
  if (it == values_.end()) return 0;
  return static_cast<int>(std::max_element(it->second.begin(), it->second.end()) -
                          it->second.begin());
}

void QTable::record_visit(std::uint64_t state, int action) {
  auto [it, inserted] = visits_.try_emplace(state);
  if (inserted) it->second.fill(0);
  ++it->second[static_cast<std::size_t>(action)];
}

long QTable::visits(std::uint64_t state, int action) const {
  auto it = visits_.find(state);
  return it == visits_.end() ? 0 : it->second[static_cast<std::size_t>(action)];
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ < 1) throw ArgumentError("replay buffer capacity must be >= 1");
}

void ReplayBuffer::push(const TdTransition& t) {
  if (items_.size() == capacity_) items_.pop_front();
  items_.push_back(t);
}

std::vector<TdTransition> ReplayBuffer::sample(std::size_t count, std::mt19937_64& rng) const {
  std::vector<TdTransition> out;
  if (items_.empty()) return out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) out.push_back(items_[rng() % items_.size()]);
  return out;
}

void td_update(QTable& q, const QTable& target, std::span<const TdTransition> batch,
               const AgentConfig& config) {
  for (const TdTransition& t : batch) {
    if (t.action < 0 || t.action >= kNumActions) {
      throw ArgumentError("transition has illegal action " + std::to_string(t.action));
    }
    const double bootstrap = t.done ? 0.0 : config.gamma * target.max_value(t.next_state);
    const double current = q.value(t.state, t.action);
    q.set(t.state, t.action, current + config.learning_rate * (t.reward + bootstrap - current));
    q.record_visit(t.state, t.action);
  }
}

double evaluate(const EnvConfig& env, const QTable& q, int episodes, std::uint64_t seed) {
  int successes = 0;
  for (int k = 0; k < episodes; ++k) {
    EnvState state = reset_state(env, mix_seed(seed, static_cast<std::uint64_t>(k)));
    bool success = false;
    for (int t = 0; t < env.horizon; ++t) {
      const Vector obs = observe(state);
      const int a = q.greedy_action(state_key(env, {obs.data(), kObservationDim}, t));
      StepResult r = step(env, state, a);
      state = r.state;
      success = r.transition.success;
    }
    if (success) ++successes;
  }
  return static_cast<double>(successes) / static_cast<double>(episodes);
}

QTable bc_pretrain(const EnvConfig& env, const DemoSet& demos, const AgentConfig& config) {
  config.validate();
  std::map<std::uint64_t, std::array<long, kNumActions>> votes;
  for (std::size_t d = 0; d < demos.size(); ++d) {
    const Trajectory& demo = demos[d];
    if (!demo.has_actions()) {
      throw ArgumentError("behavior cloning needs action-inclusive demos; demo " +
                          std::to_string(d) + " has none");
    }
    // The final frame sits at the horizon and is never acted upon.
    const Index usable = std::min<Index>(demo.length(), env.horizon);
    for (Index t = 0; t < usable; ++t) {
      const auto key = state_key(env, demo.frame(t), static_cast<int>(t));
      auto [it, inserted] = votes.try_emplace(key);
      if (inserted) it->second.fill(0);
      ++it->second[static_cast<std::size_t>(
          parse_action((*demo.actions())[static_cast<std::size_t>(t)]))];
    }
  }
  QTable q;
  for (const auto& [key, counts] : votes) {
    const int best = static_cast<int>(std::max_element(counts.begin(), counts.end()) -
                                      counts.begin());
    for (int a = 0; a < kNumActions; ++a) q.set(key, a, a == best ? 0.0 : -config.bc_margin);
  }
  return q;
}

LearningRecord train(const EnvConfig& env, const DemoSet& demos, const RewardSpec& reward,
                     const AgentConfig& config, const QTable* warm_start, QTable* learned) {
  env.validate();
  config.validate();

  std::optional<DemoSet> features;
  if (reward.source == RewardSource::ot) {
    reward.ot.validate();
    if (reward.encoder.kind == EncoderKind::precomputed) {
      throw ArgumentError("training encodes live rollouts; a precomputed encoder cannot be used");
    }
    std::vector<Trajectory> encoded;
    for (const Trajectory& d : demos) encoded.push_back(Encoder(reward.encoder).encode_trajectory(d));
    features.emplace(std::move(encoded));
  }

  std::mt19937_64 rng(mix_seed(config.seed, 11));
  QTable q = warm_start ? *warm_start : QTable{};
  QTable target = q;
  ReplayBuffer buffer(config.buffer_capacity);

  LearningRecord record;
  record.seed = config.seed;
  const std::uint64_t eval_seed = mix_seed(config.seed, 13);
  auto run_eval = [&](long at) {
    record.points.push_back({at, evaluate(env, q, config.eval_episodes, eval_seed)});
  };

  long env_step = 0;
  long next_eval = 0;
  long updates = 0;
  const int horizon = env.horizon;

  std::vector<std::vector<double>> frames;
  std::vector<std::uint64_t> keys;
  std::vector<int> actions;
  std::vector<double> task_rewards;

  for (;;) {
    if (env_step >= next_eval) {
      run_eval(env_step);
      next_eval = (env_step / config.eval_interval + 1) * config.eval_interval;
    }
    if (env_step >= config.total_env_steps) break;

    EnvState state = reset_state(env, mix_seed(config.seed, 100 + static_cast<std::uint64_t>(record.episodes)));
    frames.clear();
    keys.clear();
    actions.clear();
    task_rewards.clear();
    for (int t = 0; t <= horizon; ++t) {
      const Vector obs = observe(state);
      frames.emplace_back(obs.data(), obs.data() + obs.size());
      keys.push_back(state_key(env, {obs.data(), kObservationDim}, t));
      if (t == horizon) break;
      const int a = unit_uniform(rng) < config.epsilon_at(env_step)
                        ? static_cast<int>(rng() % kNumActions)
                        : q.greedy_action(keys.back());
      StepResult r = step(env, state, a);
      state = r.state;
      actions.push_back(a);
      task_rewards.push_back(r.transition.reward);
      ++env_step;
    }

    // Transition t (o_t -> o_{t+1}) is credited with the reward of frame t+1.
    std::vector<double> rewards(static_cast<std::size_t>(horizon));
    if (reward.source == RewardSource::ot) {
      Trajectory rollout = Encoder(reward.encoder).encode_trajectory(
          Trajectory::from_rows(frames, std::nullopt,
                                {TrajectorySource::agent_rollout, record.episodes}));
      RewardTrace trace;
      try {
        trace = label_rollout(rollout, *features, reward.ot);
      } catch (const Error& e) {
        throw Error("episode " + std::to_string(record.episodes) + ": " + e.what());
      }
      if (!trace.all_converged()) ++record.unconverged_solves;
      for (int t = 0; t < horizon; ++t) rewards[static_cast<std::size_t>(t)] = trace.rewards(t + 1);
    } else {
      rewards = task_rewards;
    }

    for (int t = 0; t < horizon; ++t) {
      const auto st = static_cast<std::size_t>(t);
      buffer.push({keys[st], actions[st], rewards[st], keys[st + 1], t + 1 == horizon});
    }
    for (int u = 0; u < config.updates_per_episode; ++u) {
      const auto batch = buffer.sample(static_cast<std::size_t>(config.batch_size), rng);
      td_update(q, target, batch, config);
      if (++updates % config.target_update_period == 0) target = q;
    }
    ++record.episodes;
  }
  if (record.points.empty() || record.points.back().env_step != env_step) run_eval(env_step);
  if (learned) *learned = q;
  return record;
}

}  // namespace temporalot
