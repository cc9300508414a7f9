#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "temporalot/linalg.hpp"
#include "temporalot/trajectory.hpp"

namespace temporalot {

enum class EnvId { grid_reach, grid_pause_then_move, pointmass_reach };

std::string to_string(EnvId id);
EnvId parse_env_id(std::string_view name);

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

// Grid environments live on integer cells [0, width) x [0, height). The point
// mass lives in the box [0, extent]^2 and moves `step_size` per action.
//
// Actions: 0 stay, 1 up (+y), 2 down (-y), 3 left (-x), 4 right (+x).
struct EnvConfig {
  EnvId id = EnvId::grid_reach;
  int width = 7;
  int height = 7;
  int horizon = 40;
  Point start{0, 0};
  Point goal{4, 4};
  Point waypoint{0, 4};  // grid_pause_then_move only
  int pause_steps = 4;     // consecutive stays the expert makes at the waypoint
  int pause_required = 1;  // consecutive stays needed for success

  bool random_goal = false;  // resample the goal from the episode seed
  // Grids: the start cell is drawn uniformly from cells within this Chebyshev
  // radius of `start`.
  int start_radius = 0;

  // pointmass_reach only
  double extent = 1.0;
  double step_size = 0.1;
  double goal_tolerance = 0.08;
  double start_jitter = 0.1;

  void validate() const;

  static EnvConfig defaults(EnvId id);
};

struct EnvState {
  Point position;
  Point goal;
  int t = 0;
  int pause_run = 0;    // consecutive stays at the waypoint, capped at pause_steps
  bool paused = false;  // pause_required stays reached at some earlier step
};

struct Transition {
  Vector observation;
  int action = 0;
  double reward = 0.0;  // sparse task reward, 1 iff success
  Vector next_observation;
  bool done = false;
  bool success = false;
};

struct StepResult {
  EnvState state;
  Transition transition;
};

inline constexpr int kNumActions = 5;

EnvState reset_state(const EnvConfig& config, std::uint64_t seed);

// Raw observation (x, y, goal_x, goal_y, pause_run, paused). The last two are
// zero outside grid_pause_then_move. Position-only encoders (place_cells) drop
// them, so "wait then go" and "go then return" give the same feature multiset.
inline constexpr int kObservationDim = 6;
Vector observe(const EnvState& state);

Vector reset(const EnvConfig& config, std::uint64_t seed);

// Pure transition function. Throws ArgumentError for illegal actions or when
// stepping past the horizon.
StepResult step(const EnvConfig& config, const EnvState& state, int action);

bool success_predicate(const EnvConfig& config, const EnvState& state);

// Tabular key for (observation, time step). Grid coordinates are exact;
// point-mass coordinates are binned at step_size.
std::uint64_t state_key(const EnvConfig& config, std::span<const double> observation, int t);

// Shortest-path expert (ties between axis orders broken by the seed). The
// trajectory holds the raw observations o_0 .. o_H together with the expert's
// action at each of them, so it has horizon + 1 frames. Throws ArgumentError if
// the resulting episode is not a success.
Trajectory scripted_expert(const EnvConfig& config, std::uint64_t episode_seed);

// Stateful convenience wrapper around reset/step.
class Environment {
 public:
  explicit Environment(EnvConfig config);

  Vector reset(std::uint64_t seed);
  Transition step(int action);

  const EnvConfig& config() const { return config_; }
  const EnvState& state() const { return state_; }

 private:
  EnvConfig config_;
  EnvState state_;
};

}  // namespace temporalot
