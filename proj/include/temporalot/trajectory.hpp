#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "temporalot/linalg.hpp"

namespace temporalot {

enum class TrajectorySource { agent_rollout, expert_demo };

struct TrajectoryMeta {
  TrajectorySource source = TrajectorySource::expert_demo;
  std::int64_t episode_id = 0;
};

// An ordered sequence of T feature vectors of dimension D, stored as the rows
// of a T x D matrix, with an optional parallel list of opaque action ids.
//
// Invariants (checked on construction): T >= 1, D >= 1, every entry finite,
// and len(actions) == T when actions are present. Action ids are non-empty and
// contain neither whitespace nor '|', so they survive the text format.
class Trajectory {
 public:
  explicit Trajectory(Matrix features,
                      std::optional<std::vector<std::string>> actions = std::nullopt,
                      TrajectoryMeta meta = {});

  static Trajectory from_rows(const std::vector<std::vector<double>>& rows,
                              std::optional<std::vector<std::string>> actions = std::nullopt,
                              TrajectoryMeta meta = {});

  Index length() const { return features_.rows(); }
  Index dim() const { return features_.cols(); }

  const Matrix& features() const { return features_; }
  std::span<const double> frame(Index i) const;

  bool has_actions() const { return actions_.has_value(); }
  const std::optional<std::vector<std::string>>& actions() const { return actions_; }

  const TrajectoryMeta& meta() const { return meta_; }
  Trajectory with_meta(TrajectoryMeta meta) const;

  // Bitwise equality of features plus equality of actions. Metadata is
  // provenance only and does not take part in the comparison.
  friend bool operator==(const Trajectory& a, const Trajectory& b);

 private:
  Matrix features_;
  std::optional<std::vector<std::string>> actions_;
  TrajectoryMeta meta_;
};

// A non-empty collection of demonstrations sharing one feature dimension.
// Lengths may differ between demos.
class DemoSet {
 public:
  explicit DemoSet(std::vector<Trajectory> demos);

  std::size_t size() const { return demos_.size(); }
  Index feature_dim() const { return demos_.front().dim(); }
  const Trajectory& operator[](std::size_t i) const { return demos_[i]; }
  const std::vector<Trajectory>& demos() const { return demos_; }

  auto begin() const { return demos_.begin(); }
  auto end() const { return demos_.end(); }

 private:
  std::vector<Trajectory> demos_;
};

// Text format:
//   TRAJ v1 dim=<D> len=<T> actions=<0|1>
//   <f_1> ... <f_D>[ | <action-id>]      (T lines)
std::string format_trajectory(const Trajectory& t);
Trajectory parse_trajectory(std::string_view text, std::string_view source = "<memory>");

Trajectory load_trajectory(const std::filesystem::path& path);
void save_trajectory(const Trajectory& t, const std::filesystem::path& path);

// Keeps frames 0, N, 2N, ... (length ceil(T / N)). Subsampling composes
// exactly: subsample_demo(subsample_demo(t, a), b) == subsample_demo(t, a * b).
Trajectory subsample_demo(const Trajectory& t, int stride);

}  // namespace temporalot
