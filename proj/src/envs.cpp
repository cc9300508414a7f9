#include "temporalot/envs.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "temporalot/error.hpp"

namespace temporalot {

std::string to_string(EnvId id) {
  switch (id) {
    case EnvId::grid_reach: return "grid_reach";
    case EnvId::grid_pause_then_move: return "grid_pause_then_move";
    case EnvId::pointmass_reach: return "pointmass_reach";
  }
  return "unknown";
}

EnvId parse_env_id(std::string_view name) {
  if (name == "grid_reach") return EnvId::grid_reach;
  if (name == "grid_pause_then_move") return EnvId::grid_pause_then_move;
  if (name == "pointmass_reach") return EnvId::pointmass_reach;
  throw ArgumentError("unknown environment '" + std::string(name) + "'");
}

namespace {

bool is_grid(const EnvConfig& c) { return c.id != EnvId::pointmass_reach; }

bool on_lattice(const EnvConfig& c, Point p) {
  return p.x == std::floor(p.x) && p.y == std::floor(p.y) && p.x >= 0 && p.y >= 0 &&
         p.x < c.width && p.y < c.height;
}

bool in_box(const EnvConfig& c, Point p) {
  return p.x >= 0.0 && p.y >= 0.0 && p.x <= c.extent && p.y <= c.extent;
}

int manhattan(Point a, Point b) {
  return static_cast<int>(std::abs(a.x - b.x) + std::abs(a.y - b.y));
}

// Largest Manhattan distance from any possible start cell to `to`.
int far_start(const EnvConfig& c, Point to) {
  int best = 0;
  const int r = c.start_radius;
  for (int dx = -r; dx <= r; ++dx) {
    for (int dy = -r; dy <= r; ++dy) {
      const Point p{c.start.x + dx, c.start.y + dy};
      if (on_lattice(c, p)) best = std::max(best, manhattan(p, to));
    }
  }
  return best;
}

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr int kDx[kNumActions] = {0, 0, 0, -1, 1};
constexpr int kDy[kNumActions] = {0, 1, -1, 0, 0};

}  // namespace

void EnvConfig::validate() const {
  if (horizon < 1) throw ArgumentError("horizon must be >= 1");
  if (is_grid(*this)) {
    if (width < 1 || height < 1) throw ArgumentError("grid size must be at least 1x1");
    if (!on_lattice(*this, start)) throw ArgumentError("start must be a grid cell");
    if (start_radius < 0) throw ArgumentError("start_radius must be >= 0");
    if (!random_goal && !on_lattice(*this, goal)) throw ArgumentError("goal must be a grid cell");
    if (random_goal && width + height - 2 > horizon) {
      throw ArgumentError("random goals may be unreachable within the horizon");
    }
    if (id == EnvId::grid_pause_then_move) {
      if (!on_lattice(*this, waypoint)) throw ArgumentError("waypoint must be a grid cell");
      if (pause_steps < 1) throw ArgumentError("pause_steps must be >= 1");
      if (pause_required < 1 || pause_required > pause_steps) {
        throw ArgumentError("pause_required must lie in [1, pause_steps]");
      }
      if (random_goal) throw ArgumentError("grid_pause_then_move uses a fixed goal");
      if (far_start(*this, waypoint) + pause_steps + manhattan(waypoint, goal) > horizon) {
        throw ArgumentError("waypoint, pause and goal do not fit in the horizon");
      }
    } else if (!random_goal && far_start(*this, goal) > horizon) {
      throw ArgumentError("goal is not reachable within the horizon");
    }
  } else {
    if (!(extent > 0.0) || !(step_size > 0.0) || !(goal_tolerance > 0.0) || start_jitter < 0.0) {
      throw ArgumentError("point-mass extent, step size and tolerance must be positive");
    }
    if (goal_tolerance < step_size * std::sqrt(0.5)) {
      throw ArgumentError("goal tolerance must be >= step_size / sqrt(2) to be reachable");
    }
    if (!in_box(*this, start) || (!random_goal && !in_box(*this, goal))) {
      throw ArgumentError("start and goal must lie inside the box");
    }
    const double worst = 2.0 * extent / step_size + 2.0;
    if (worst > horizon) throw ArgumentError("goal may not be reachable within the horizon");
  }
}

EnvConfig EnvConfig::defaults(EnvId id) {
  EnvConfig c;
  c.id = id;
  switch (id) {
    case EnvId::grid_reach:
      c.width = 7;
      c.height = 7;
      c.horizon = 40;
      c.start = {0, 0};
      c.goal = {5, 5};
      c.start_radius = 1;
      break;
    case EnvId::grid_pause_then_move:
      c.width = 7;
      c.height = 3;
      c.horizon = 40;
      c.start = {3, 0};
      c.waypoint = {0, 2};
      c.goal = {6, 2};
      c.pause_steps = 4;
      c.start_radius = 2;
      break;
    case EnvId::pointmass_reach:
      c.horizon = 40;
      c.start = {0.2, 0.2};
      c.goal = {0.8, 0.8};
      break;
  }
  return c;
}

EnvState reset_state(const EnvConfig& config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(mix_seed(seed, 1));
  EnvState s;
  s.position = config.start;
  s.goal = config.goal;
  if (is_grid(config)) {
    if (config.start_radius > 0) {
      auto draw = [&](double centre, int size) {
        const int lo = std::max(0, static_cast<int>(centre) - config.start_radius);
        const int hi = std::min(size - 1, static_cast<int>(centre) + config.start_radius);
        return static_cast<double>(lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1)));
      };
      s.position.x = draw(config.start.x, config.width);
      s.position.y = draw(config.start.y, config.height);
    }
    if (config.random_goal) {
      s.goal = {static_cast<double>(rng() % static_cast<std::uint64_t>(config.width)),
                static_cast<double>(rng() % static_cast<std::uint64_t>(config.height))};
    }
  } else {
    auto jitter = [&](double v) {
      const double j = (2.0 * unit_uniform(rng) - 1.0) * config.start_jitter;
      return std::clamp(v + j, 0.0, config.extent);
    };
    s.position = {jitter(config.start.x), jitter(config.start.y)};
    if (config.random_goal) {
      s.goal = {unit_uniform(rng) * config.extent, unit_uniform(rng) * config.extent};
    }
  }
  return s;
}

Vector observe(const EnvState& state) {
  Vector o(kObservationDim);
  o << state.position.x, state.position.y, state.goal.x, state.goal.y,
      static_cast<double>(state.pause_run), state.paused ? 1.0 : 0.0;
  return o;
}

Vector reset(const EnvConfig& config, std::uint64_t seed) {
  return observe(reset_state(config, seed));
}

bool success_predicate(const EnvConfig& config, const EnvState& state) {
  switch (config.id) {
    case EnvId::grid_reach: return state.position == state.goal;
    case EnvId::grid_pause_then_move: return state.paused && state.position == state.goal;
    case EnvId::pointmass_reach:
      return std::hypot(state.position.x - state.goal.x, state.position.y - state.goal.y) <=
             config.goal_tolerance;
  }
  return false;
}

StepResult step(const EnvConfig& config, const EnvState& state, int action) {
  if (action < 0 || action >= kNumActions) {
    throw ArgumentError("illegal action " + std::to_string(action) + " (expected 0.." +
                        std::to_string(kNumActions - 1) + ")");
  }
  if (state.t >= config.horizon) throw ArgumentError("episode already reached its horizon");

  EnvState next = state;
  if (is_grid(config)) {
    const Point moved{state.position.x + kDx[action], state.position.y + kDy[action]};
    if (on_lattice(config, moved)) next.position = moved;
    if (config.id == EnvId::grid_pause_then_move) {
      const bool stayed = next.position == config.waypoint && state.position == config.waypoint;
      next.pause_run = stayed ? std::min(state.pause_run + 1, config.pause_steps) : 0;
      if (next.pause_run >= config.pause_required) next.paused = true;
    }
  } else {
    next.position.x = std::clamp(state.position.x + kDx[action] * config.step_size, 0.0,
                                 config.extent);
    next.position.y = std::clamp(state.position.y + kDy[action] * config.step_size, 0.0,
                                 config.extent);
  }
  next.t = state.t + 1;

  StepResult out{next, {}};
  out.transition.observation = observe(state);
  out.transition.action = action;
  out.transition.next_observation = observe(next);
  out.transition.success = success_predicate(config, next);
  out.transition.reward = out.transition.success ? 1.0 : 0.0;
  out.transition.done = next.t >= config.horizon;
  return out;
}

std::uint64_t state_key(const EnvConfig& config, std::span<const double> observation, int t) {
  if (observation.size() != kObservationDim) {
    throw ArgumentError("observation must have " + std::to_string(kObservationDim) + " components");
  }
  std::uint64_t nx = 0;
  std::uint64_t ny = 0;
  auto bin = [&](double v) -> std::uint64_t {
    if (is_grid(config)) return static_cast<std::uint64_t>(std::llround(v));
    return static_cast<std::uint64_t>(std::llround(v / config.step_size));
  };
  if (is_grid(config)) {
    nx = static_cast<std::uint64_t>(config.width);
    ny = static_cast<std::uint64_t>(config.height);
  } else {
    nx = ny = static_cast<std::uint64_t>(std::llround(config.extent / config.step_size)) + 1;
  }
  std::uint64_t key = static_cast<std::uint64_t>(t) * 2 +
                      static_cast<std::uint64_t>(std::llround(observation[5]));
  key = key * static_cast<std::uint64_t>(config.pause_steps + 1) +
        static_cast<std::uint64_t>(std::llround(observation[4]));
  key = key * nx + bin(observation[0]);
  key = key * ny + bin(observation[1]);
  key = key * nx + bin(observation[2]);
  key = key * ny + bin(observation[3]);
  return key;
}

namespace {

// Next action on a shortest route from `from` to `to`; moves along a randomly
// chosen axis among those still needing progress. Returns 0 when arrived.
int route_action(const EnvConfig& config, Point from, Point to, std::mt19937_64& rng) {
  double dx = to.x - from.x;
  double dy = to.y - from.y;
  if (!is_grid(config)) {
    if (std::hypot(dx, dy) <= config.goal_tolerance) return 0;
    const double half = config.step_size / 2.0;
    if (std::abs(dx) <= half) dx = 0.0;
    if (std::abs(dy) <= half) dy = 0.0;
    if (dx == 0.0 && dy == 0.0) return 0;
  }
  const int x_action = dx > 0 ? 4 : (dx < 0 ? 3 : 0);
  const int y_action = dy > 0 ? 1 : (dy < 0 ? 2 : 0);
  if (x_action == 0) return y_action;
  if (y_action == 0) return x_action;
  return (rng() & 1U) != 0 ? x_action : y_action;
}

}  // namespace

Trajectory scripted_expert(const EnvConfig& config, std::uint64_t episode_seed) {
  EnvState state = reset_state(config, episode_seed);
  std::mt19937_64 rng(mix_seed(episode_seed, 2));

  std::vector<std::vector<double>> frames;
  std::vector<std::string> actions;
  int pauses_left = config.pause_steps;

  auto policy = [&](const EnvState& s) {
    if (config.id == EnvId::grid_pause_then_move && pauses_left > 0) {
      if (!(s.position == config.waypoint)) return route_action(config, s.position, config.waypoint, rng);
      --pauses_left;
      return 0;
    }
    return route_action(config, s.position, s.goal, rng);
  };

  for (;;) {
    const Vector o = observe(state);
    frames.emplace_back(o.data(), o.data() + o.size());
    const int a = policy(state);
    actions.push_back(std::to_string(a));
    if (state.t == config.horizon) break;
    state = step(config, state, a).state;
  }
  if (!success_predicate(config, state)) {
    throw ArgumentError("scripted expert does not reach the goal within the horizon (seed " +
                        std::to_string(episode_seed) + ")");
  }
  return Trajectory::from_rows(frames, std::move(actions),
                               {TrajectorySource::expert_demo,
                                static_cast<std::int64_t>(episode_seed)});
}

Environment::Environment(EnvConfig config) : config_(config) { config_.validate(); }

Vector Environment::reset(std::uint64_t seed) {
  state_ = reset_state(config_, seed);
  return observe(state_);
}

Transition Environment::step(int action) {
  StepResult r = temporalot::step(config_, state_, action);
  state_ = r.state;
  return r.transition;
}

}  // namespace temporalot
