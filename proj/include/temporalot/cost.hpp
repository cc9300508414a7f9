#pragma once

#include <span>

#include "temporalot/linalg.hpp"
#include "temporalot/trajectory.hpp"

namespace temporalot {

// Transport costs between an agent trajectory (rows) and an expert demo
// (columns). Entries are cosine costs or window means of them, so they lie in
// [0, 2].
struct CostMatrix {
  Matrix entries;
  int context_length = 1;

  Index rows() const { return entries.rows(); }
  Index cols() const { return entries.cols(); }
};

// 1 - <a, b> / (|a| |b|), clamped to [0, 2]. Identical vectors give exactly 0.
double cosine_cost(std::span<const double> a, std::span<const double> b);

CostMatrix pairwise_cost_matrix(const Trajectory& agent, const Trajectory& demo);

// Mean of cosine costs over aligned windows of `context_length` frames that
// start at agent frame i and demo frame j. Indices past the end of either
// trajectory are clamped to its final frame.
CostMatrix context_cost_matrix(const Trajectory& agent, const Trajectory& demo,
                               int context_length);

}  // namespace temporalot
