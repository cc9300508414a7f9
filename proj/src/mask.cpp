#include "temporalot/mask.hpp"

#include <algorithm>

#include "temporalot/error.hpp"
#include "temporalot/sinkhorn.hpp"
#include "temporalot/support.hpp"

namespace temporalot {

std::string to_string(MaskKind kind) {
  switch (kind) {
    case MaskKind::ones: return "ones";
    case MaskKind::causal: return "causal";
    case MaskKind::band: return "band";
    case MaskKind::dynamic: return "dynamic";
  }
  return "unknown";
}

MaskKind parse_mask_kind(std::string_view name) {
  if (name == "ones") return MaskKind::ones;
  if (name == "causal") return MaskKind::causal;
  if (name == "band") return MaskKind::band;
  if (name == "dynamic") return MaskKind::dynamic;
  throw ArgumentError("unknown mask kind '" + std::string(name) +
                      "' (expected ones, causal, band or dynamic)");
}

namespace {

void check_shape(Index rows, Index cols) {
  if (rows < 1 || cols < 1) {
    throw ArgumentError("mask shape must be at least 1x1, got " + std::to_string(rows) + "x" +
                        std::to_string(cols));
  }
}

void check_window(int window) {
  if (window < 0) throw ArgumentError("mask window must be >= 0, got " + std::to_string(window));
}

// First row whose share of [0, 1) overlaps column j's share.
Index diagonal_row(Index col, Index rows, Index cols) { return (col * rows) / cols; }

void set_columns(BinaryMatrix& m, Index row, Index first, Index last) {
  first = std::max<Index>(first, 0);
  last = std::min<Index>(last, m.cols() - 1);
  for (Index j = first; j <= last; ++j) m(row, j) = 1;
}

}  // namespace

ColumnRange diagonal_columns(Index row, Index rows, Index cols) {
  const Index first = (row * cols) / rows;
  const Index last = ((row + 1) * cols + rows - 1) / rows - 1;
  return {first, last};
}

bool has_nonempty_rows_and_columns(const BinaryMatrix& entries) {
  for (Index i = 0; i < entries.rows(); ++i) {
    if (entries.row(i).maxCoeff() == 0) return false;
  }
  for (Index j = 0; j < entries.cols(); ++j) {
    if (entries.col(j).maxCoeff() == 0) return false;
  }
  return entries.size() > 0;
}

Mask ones_mask(Index rows, Index cols) {
  check_shape(rows, cols);
  return {BinaryMatrix::Ones(rows, cols), MaskKind::ones, 0};
}

Mask causal_mask(Index rows, Index cols) {
  check_shape(rows, cols);
  Mask m{BinaryMatrix::Zero(rows, cols), MaskKind::causal, 0};
  for (Index i = 0; i < rows; ++i) set_columns(m.entries, i, 0, diagonal_columns(i, rows, cols).last);
  return m;
}

Mask band_mask(Index rows, Index cols, int window) {
  check_shape(rows, cols);
  check_window(window);
  Mask m{BinaryMatrix::Zero(rows, cols), MaskKind::band, window};
  for (Index i = 0; i < rows; ++i) {
    const ColumnRange d = diagonal_columns(i, rows, cols);
    set_columns(m.entries, i, d.first - window, d.last + window);
  }
  return m;
}

Mask dynamic_mask(const CostMatrix& cost, int window) {
  check_window(window);
  const Index rows = cost.rows();
  const Index cols = cost.cols();
  check_shape(rows, cols);

  Mask m{BinaryMatrix::Zero(rows, cols), MaskKind::dynamic, window};
  for (Index i = 0; i < rows; ++i) {
    // Centers may not look past the rescaled present.
    const Index limit = diagonal_columns(i, rows, cols).last;
    Index center = 0;
    for (Index j = 1; j <= limit; ++j) {
      if (cost.entries(i, j) < cost.entries(i, center)) center = j;
    }
    set_columns(m.entries, i, center - window, center + window);
  }

  // Every column must carry mass: empty columns get their diagonal cell.
  for (Index j = 0; j < cols; ++j) {
    if (m.entries.col(j).maxCoeff() == 0) m.entries(diagonal_row(j, rows, cols), j) = 1;
  }

  // Nonempty rows and columns do not guarantee a plan with uniform marginals
  // exists. If none does, fall back to adding the whole rescaled diagonal.
  const Marginals uniform = Marginals::uniform(rows, cols);
  if (!analyze_support(m.entries, uniform.row(), uniform.col()).feasible) {
    for (Index i = 0; i < rows; ++i) {
      const ColumnRange d = diagonal_columns(i, rows, cols);
      set_columns(m.entries, i, d.first, d.last);
    }
  }
  return m;
}

Mask make_mask(MaskKind kind, const CostMatrix& cost, int window) {
  switch (kind) {
    case MaskKind::ones: return ones_mask(cost.rows(), cost.cols());
    case MaskKind::causal: return causal_mask(cost.rows(), cost.cols());
    case MaskKind::band: return band_mask(cost.rows(), cost.cols(), window);
    case MaskKind::dynamic: return dynamic_mask(cost, window);
  }
  throw ArgumentError("unknown mask kind");
}

}  // namespace temporalot
