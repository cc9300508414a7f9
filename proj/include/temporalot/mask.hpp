#pragma once

#include <string>
#include <string_view>

#include "temporalot/cost.hpp"
#include "temporalot/linalg.hpp"

namespace temporalot {

enum class MaskKind { ones, causal, band, dynamic };

std::string to_string(MaskKind kind);
MaskKind parse_mask_kind(std::string_view name);

// Binary support restriction for a T_a x T_e transport plan. Every row and
// every column holds at least one 1.
struct Mask {
  BinaryMatrix entries;
  MaskKind kind = MaskKind::ones;
  int window = 0;

  Index rows() const { return entries.rows(); }
  Index cols() const { return entries.cols(); }
  bool allows(Index i, Index j) const { return entries(i, j) != 0; }
};

// Columns of the "rescaled diagonal" of row i: the columns whose share of
// [0, 1) overlaps row i's share when rows and columns are laid out uniformly.
// For square shapes this is exactly column i.
struct ColumnRange {
  Index first;
  Index last;  // inclusive
};
ColumnRange diagonal_columns(Index row, Index rows, Index cols);

Mask ones_mask(Index rows, Index cols);
Mask causal_mask(Index rows, Index cols);
Mask band_mask(Index rows, Index cols, int window);
Mask dynamic_mask(const CostMatrix& cost, int window);

// Dispatches on kind; `cost` supplies the shape (and the centers for dynamic).
Mask make_mask(MaskKind kind, const CostMatrix& cost, int window);

bool has_nonempty_rows_and_columns(const BinaryMatrix& entries);

}  // namespace temporalot
