#pragma once

#include <vector>

#include "temporalot/cost.hpp"
#include "temporalot/linalg.hpp"
#include "temporalot/mask.hpp"

namespace temporalot {

struct SinkhornConfig {
  double epsilon = 0.01;
  int max_iterations = 100;
  double tolerance = 1e-6;  // max abs marginal violation
  bool log_domain = true;
  // Sweeps alone contract slowly once eps is small against the cost range.
  // With epsilon_scaling the solve starts at eps = cost range and halves it
  // down to `epsilon`, warm-starting each stage from the previous potentials.
  // Each stage runs up to max_iterations sweeps followed, if still not
  // converged, by up to newton_steps Newton steps on the dual.
  bool epsilon_scaling = false;
  int newton_steps = 0;

  void validate() const;
};

// Row and column targets of the plan. Positive, each summing to one.
class Marginals {
 public:
  Marginals(Vector row, Vector col);
  static Marginals uniform(Index rows, Index cols);

  const Vector& row() const { return row_; }
  const Vector& col() const { return col_; }

 private:
  Vector row_;
  Vector col_;
};

struct TransportPlan {
  Matrix plan;  // masked plan diag(u) K diag(v)
  int iterations_used = 0;  // sweeps plus Newton steps
  double marginal_violation = 0.0;
  bool converged = false;
};

// Scaling vectors and kernel K = M .* exp(-C / eps) for one problem. In log
// mode the vectors are log-potentials and the kernel is stored as -C / eps
// with -inf off the support.
//
// The kernel is restricted to the active support of the mask (cells that can
// carry mass in some feasible plan). Cells outside it are zero in the limit of
// the iterations anyway; dropping them up front keeps convergence linear on
// masks such as the causal triangle.
class SinkhornState {
 public:
  SinkhornState(const CostMatrix& cost, const Mask& mask, const Marginals& marginals,
                const SinkhornConfig& config);

  // Row violation of the current plan. Columns are exact after any v-update,
  // so this is the full marginal violation once iterate() has run.
  double row_violation();

  // One u-update followed by one v-update.
  void iterate();

  // Damped Newton step on the dual objective, jointly in (u, v). Returns the
  // full marginal violation afterwards, or a negative value if no descent
  // step was found.
  double newton_step();

  // Log domain only: moves the problem to epsilon / factor, keeping the dual
  // potentials (in cost units) fixed.
  void sharpen(double factor);

  Matrix plan() const;

  bool log_domain() const { return log_domain_; }
  const Vector& u() const { return u_; }
  const Vector& v() const { return v_; }
  // Dense kernel (log-kernel in log mode, -inf off the support).
  Matrix kernel() const;
  const BinaryMatrix& support() const { return support_; }

 private:
  // out_i = reduction over row i of K_ij * v_j (log mode: LSE of logK_ij + v_j).
  void row_reduce(Vector& out) const;
  void col_reduce(Vector& out) const;
  double violation_from_row_reduction(const Vector& reduced) const;
  void update_u(const Vector& reduced);
  void update_v(const Vector& reduced);

  Marginals marginals_;
  bool log_domain_;
  Index rows_;
  Index cols_;
  BinaryMatrix support_;

  // Support in compressed row and compressed column order.
  std::vector<Index> row_ptr_, row_col_;
  std::vector<double> row_val_;
  std::vector<Index> col_ptr_, col_row_;
  std::vector<double> col_val_;

  Vector u_;
  Vector v_;
  Vector log_row_;
  Vector log_col_;
  Vector scratch_row_;
  Vector scratch_col_;
  bool pending_row_ = false;  // scratch_row_ holds the reduction for the current v
};

TransportPlan solve(const CostMatrix& cost, const Mask& mask, const Marginals& marginals,
                    const SinkhornConfig& config);

double marginal_violation(const Matrix& plan, const Marginals& marginals);

// Frobenius inner product <plan, C>.
double transport_objective(const Matrix& plan, const CostMatrix& cost);

}  // namespace temporalot
