#pragma once

#include "temporalot/linalg.hpp"

namespace temporalot {

// Structure of the set of transport plans supported on a binary mask with
// prescribed row and column sums.
struct SupportAnalysis {
  bool feasible = false;
  // Cells that are positive in at least one feasible plan. All other mask
  // cells are zero in every feasible plan. Empty when infeasible.
  BinaryMatrix active;
};

// Decides feasibility with a max-flow and finds the active cells from the
// strongly connected components of the residual graph. `row` and `col` must
// be positive and have equal sums.
SupportAnalysis analyze_support(const BinaryMatrix& mask, const Vector& row, const Vector& col);

}  // namespace temporalot
