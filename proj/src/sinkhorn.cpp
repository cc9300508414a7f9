#include "temporalot/sinkhorn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "temporalot/error.hpp"
#include "temporalot/support.hpp"

namespace temporalot {

void SinkhornConfig::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw ArgumentError("sinkhorn epsilon must be positive and finite");
  }
  if (!(tolerance > 0.0)) throw ArgumentError("sinkhorn tolerance must be positive");
  if (max_iterations < 1) throw ArgumentError("sinkhorn max_iterations must be >= 1");
  if (newton_steps < 0) throw ArgumentError("sinkhorn newton_steps must be >= 0");
}

Marginals::Marginals(Vector row, Vector col) : row_(std::move(row)), col_(std::move(col)) {
  if (row_.size() < 1 || col_.size() < 1) throw ValidationError("marginals must be non-empty");
  for (Index i = 0; i < row_.size(); ++i) {
    if (!(row_(i) > 0.0) || !std::isfinite(row_(i))) {
      throw ValidationError("row marginal " + std::to_string(i) + " must be positive");
    }
  }
  for (Index j = 0; j < col_.size(); ++j) {
    if (!(col_(j) > 0.0) || !std::isfinite(col_(j))) {
      throw ValidationError("column marginal " + std::to_string(j) + " must be positive");
    }
  }
  if (std::abs(row_.sum() - 1.0) > 1e-9 || std::abs(col_.sum() - 1.0) > 1e-9) {
    throw ValidationError("row and column marginals must each sum to 1");
  }
}

Marginals Marginals::uniform(Index rows, Index cols) {
  if (rows < 1 || cols < 1) throw ArgumentError("marginal sizes must be >= 1");
  return Marginals(Vector::Constant(rows, 1.0 / static_cast<double>(rows)),
                   Vector::Constant(cols, 1.0 / static_cast<double>(cols)));
}

namespace {

void check_inputs(const CostMatrix& cost, const Mask& mask, const Marginals& marginals) {
  if (cost.rows() != mask.rows() || cost.cols() != mask.cols()) {
    throw ArgumentError("cost is " + std::to_string(cost.rows()) + "x" +
                        std::to_string(cost.cols()) + " but mask is " +
                        std::to_string(mask.rows()) + "x" + std::to_string(mask.cols()));
  }
  if (marginals.row().size() != cost.rows() || marginals.col().size() != cost.cols()) {
    throw ArgumentError("marginal sizes do not match the cost matrix shape");
  }
  if (!cost.entries.allFinite()) throw ArgumentError("cost matrix has non-finite entries");
  for (Index i = 0; i < mask.rows(); ++i) {
    if (mask.entries.row(i).maxCoeff() == 0) {
      throw FeasibilityError("mask row " + std::to_string(i) + " has no allowed cells");
    }
  }
  for (Index j = 0; j < mask.cols(); ++j) {
    if (mask.entries.col(j).maxCoeff() == 0) {
      throw FeasibilityError("mask column " + std::to_string(j) + " has no allowed cells");
    }
  }
}

double log_sum_exp_max(double m, double sum) { return m + std::log(sum); }

}  // namespace

SinkhornState::SinkhornState(const CostMatrix& cost, const Mask& mask, const Marginals& marginals,
                             const SinkhornConfig& config)
    : marginals_(marginals),
      log_domain_(config.log_domain),
      rows_(cost.rows()),
      cols_(cost.cols()) {
  config.validate();
  check_inputs(cost, mask, marginals);

  if (mask.entries.minCoeff() != 0) {
    support_ = mask.entries;
  } else {
    SupportAnalysis analysis = analyze_support(mask.entries, marginals.row(), marginals.col());
    if (!analysis.feasible) {
      throw FeasibilityError(
          "mask admits no transport plan with the requested marginals (" + to_string(mask.kind) +
          " mask, " + std::to_string(rows_) + "x" + std::to_string(cols_) + ")");
    }
    support_ = std::move(analysis.active);
  }

  const double inv_eps = 1.0 / config.epsilon;
  auto kernel_value = [&](Index i, Index j) {
    const double scaled = -cost.entries(i, j) * inv_eps;
    return log_domain_ ? scaled : std::exp(scaled);
  };

  row_ptr_.assign(static_cast<std::size_t>(rows_ + 1), 0);
  for (Index i = 0; i < rows_; ++i) {
    for (Index j = 0; j < cols_; ++j) {
      if (support_(i, j) != 0) {
        row_col_.push_back(j);
        row_val_.push_back(kernel_value(i, j));
      }
    }
    row_ptr_[static_cast<std::size_t>(i + 1)] = static_cast<Index>(row_col_.size());
  }
  col_ptr_.assign(static_cast<std::size_t>(cols_ + 1), 0);
  for (Index j = 0; j < cols_; ++j) {
    for (Index i = 0; i < rows_; ++i) {
      if (support_(i, j) != 0) {
        col_row_.push_back(i);
        col_val_.push_back(kernel_value(i, j));
      }
    }
    col_ptr_[static_cast<std::size_t>(j + 1)] = static_cast<Index>(col_row_.size());
  }

  if (!log_domain_) {
    for (double k : row_val_) {
      if (!(k > 0.0) || !std::isfinite(k)) {
        throw NumericalError(
            "kernel exp(-C/eps) underflows or overflows in linear mode; use log_domain mode");
      }
    }
  }

  log_row_ = marginals_.row().array().log();
  log_col_ = marginals_.col().array().log();
  u_ = log_domain_ ? Vector::Zero(rows_) : Vector::Ones(rows_);
  v_ = log_domain_ ? Vector::Zero(cols_) : Vector::Ones(cols_);
  scratch_row_.resize(rows_);
  scratch_col_.resize(cols_);
}

void SinkhornState::row_reduce(Vector& out) const {
  for (Index i = 0; i < rows_; ++i) {
    const Index begin = row_ptr_[static_cast<std::size_t>(i)];
    const Index end = row_ptr_[static_cast<std::size_t>(i + 1)];
    if (log_domain_) {
      double m = -std::numeric_limits<double>::infinity();
      for (Index k = begin; k < end; ++k) {
        m = std::max(m, row_val_[static_cast<std::size_t>(k)] +
                            v_(row_col_[static_cast<std::size_t>(k)]));
      }
      double s = 0.0;
      for (Index k = begin; k < end; ++k) {
        s += std::exp(row_val_[static_cast<std::size_t>(k)] +
                      v_(row_col_[static_cast<std::size_t>(k)]) - m);
      }
      out(i) = log_sum_exp_max(m, s);
    } else {
      double s = 0.0;
      for (Index k = begin; k < end; ++k) {
        s += row_val_[static_cast<std::size_t>(k)] * v_(row_col_[static_cast<std::size_t>(k)]);
      }
      out(i) = s;
    }
  }
}

void SinkhornState::col_reduce(Vector& out) const {
  for (Index j = 0; j < cols_; ++j) {
    const Index begin = col_ptr_[static_cast<std::size_t>(j)];
    const Index end = col_ptr_[static_cast<std::size_t>(j + 1)];
    if (log_domain_) {
      double m = -std::numeric_limits<double>::infinity();
      for (Index k = begin; k < end; ++k) {
        m = std::max(m, col_val_[static_cast<std::size_t>(k)] +
                            u_(col_row_[static_cast<std::size_t>(k)]));
      }
      double s = 0.0;
      for (Index k = begin; k < end; ++k) {
        s += std::exp(col_val_[static_cast<std::size_t>(k)] +
                      u_(col_row_[static_cast<std::size_t>(k)]) - m);
      }
      out(j) = log_sum_exp_max(m, s);
    } else {
      double s = 0.0;
      for (Index k = begin; k < end; ++k) {
        s += col_val_[static_cast<std::size_t>(k)] * u_(col_row_[static_cast<std::size_t>(k)]);
      }
      out(j) = s;
    }
  }
}

double SinkhornState::violation_from_row_reduction(const Vector& reduced) const {
  double worst = 0.0;
  for (Index i = 0; i < rows_; ++i) {
    const double sum = log_domain_ ? std::exp(u_(i) + reduced(i)) : u_(i) * reduced(i);
    worst = std::max(worst, std::abs(sum - marginals_.row()(i)));
  }
  return worst;
}

void SinkhornState::update_u(const Vector& reduced) {
  for (Index i = 0; i < rows_; ++i) {
    u_(i) = log_domain_ ? log_row_(i) - reduced(i) : marginals_.row()(i) / reduced(i);
    if (!std::isfinite(u_(i)) || (!log_domain_ && u_(i) == 0.0)) {
      throw NumericalError("row scaling " + std::to_string(i) + " is not finite" +
                           (log_domain_ ? std::string() : std::string("; use log_domain mode")));
    }
  }
}

void SinkhornState::update_v(const Vector& reduced) {
  for (Index j = 0; j < cols_; ++j) {
    v_(j) = log_domain_ ? log_col_(j) - reduced(j) : marginals_.col()(j) / reduced(j);
    if (!std::isfinite(v_(j)) || (!log_domain_ && v_(j) == 0.0)) {
      throw NumericalError("column scaling " + std::to_string(j) + " is not finite" +
                           (log_domain_ ? std::string() : std::string("; use log_domain mode")));
    }
  }
}

double SinkhornState::row_violation() {
  row_reduce(scratch_row_);
  pending_row_ = true;
  return violation_from_row_reduction(scratch_row_);
}

void SinkhornState::iterate() {
  if (!pending_row_) row_reduce(scratch_row_);
  pending_row_ = false;
  update_u(scratch_row_);
  col_reduce(scratch_col_);
  update_v(scratch_col_);
}

double SinkhornState::newton_step() {
  pending_row_ = false;
  const Index n = rows_ + cols_;
  Vector f(rows_), g(cols_);
  for (Index i = 0; i < rows_; ++i) f(i) = log_domain_ ? u_(i) : std::log(u_(i));
  for (Index j = 0; j < cols_; ++j) g(j) = log_domain_ ? v_(j) : std::log(v_(j));
  auto log_k = [&](std::size_t k) {
    return log_domain_ ? row_val_[k] : std::log(row_val_[k]);
  };

  // Dual objective sum(P) - <a, f> - <b, g>, its gradient (the marginal
  // residuals) and optionally its Hessian.
  auto evaluate = [&](const Vector& f, const Vector& g, Vector& grad, Matrix* hess) {
    grad.setZero(n);
    if (hess) hess->setZero(n, n);
    double total = 0.0;
    for (Index i = 0; i < rows_; ++i) {
      for (Index k = row_ptr_[static_cast<std::size_t>(i)];
           k < row_ptr_[static_cast<std::size_t>(i + 1)]; ++k) {
        const Index j = row_col_[static_cast<std::size_t>(k)];
        const double p = std::exp(f(i) + log_k(static_cast<std::size_t>(k)) + g(j));
        total += p;
        grad(i) += p;
        grad(rows_ + j) += p;
        if (hess) {
          (*hess)(i, rows_ + j) = p;
          (*hess)(rows_ + j, i) = p;
        }
      }
    }
    if (hess) {
      for (Index k = 0; k < n; ++k) (*hess)(k, k) = grad(k);
    }
    grad.head(rows_) -= marginals_.row();
    grad.tail(cols_) -= marginals_.col();
    return total - marginals_.row().dot(f) - marginals_.col().dot(g);
  };

  Vector grad;
  Matrix hess;
  evaluate(f, g, grad, &hess);
  // The objective is flat along (f + s, g - s); a small ridge fixes the gauge.
  const double ridge = 1e-12 * hess.diagonal().maxCoeff();
  hess.diagonal().array() += ridge;
  const Vector step = -hess.ldlt().solve(grad);
  const double slope = grad.dot(step);
  if (!step.allFinite() || !(slope < 0.0)) return -1.0;

  // Backtrack on the residual norm. Near the optimum the objective itself
  // changes by less than its rounding error.
  const double norm = grad.norm();
  Vector trial_grad;
  for (double t = 1.0; t > 1e-10; t *= 0.5) {
    const Vector f_new = f + t * step.head(rows_);
    const Vector g_new = g + t * step.tail(cols_);
    const double phi_new = evaluate(f_new, g_new, trial_grad, nullptr);
    if (std::isfinite(phi_new) && trial_grad.norm() <= (1.0 - 1e-4 * t) * norm) {
      for (Index i = 0; i < rows_; ++i) u_(i) = log_domain_ ? f_new(i) : std::exp(f_new(i));
      for (Index j = 0; j < cols_; ++j) v_(j) = log_domain_ ? g_new(j) : std::exp(g_new(j));
      return trial_grad.cwiseAbs().maxCoeff();
    }
  }
  return -1.0;
}

void SinkhornState::sharpen(double factor) {
  if (!log_domain_) throw ArgumentError("epsilon scaling requires log_domain mode");
  for (double& k : row_val_) k *= factor;
  for (double& k : col_val_) k *= factor;
  u_ *= factor;
  v_ *= factor;
  pending_row_ = false;
}

Matrix SinkhornState::kernel() const {
  Matrix k = Matrix::Constant(rows_, cols_, log_domain_
                                                ? -std::numeric_limits<double>::infinity()
                                                : 0.0);
  for (Index i = 0; i < rows_; ++i) {
    for (Index p = row_ptr_[static_cast<std::size_t>(i)];
         p < row_ptr_[static_cast<std::size_t>(i + 1)]; ++p) {
      k(i, row_col_[static_cast<std::size_t>(p)]) = row_val_[static_cast<std::size_t>(p)];
    }
  }
  return k;
}

Matrix SinkhornState::plan() const {
  Matrix p = Matrix::Zero(rows_, cols_);
  for (Index i = 0; i < rows_; ++i) {
    for (Index k = row_ptr_[static_cast<std::size_t>(i)];
         k < row_ptr_[static_cast<std::size_t>(i + 1)]; ++k) {
      const Index j = row_col_[static_cast<std::size_t>(k)];
      const double kv = row_val_[static_cast<std::size_t>(k)];
      p(i, j) = log_domain_ ? std::exp(u_(i) + kv + v_(j)) : u_(i) * kv * v_(j);
    }
  }
  return p;
}

TransportPlan solve(const CostMatrix& cost, const Mask& mask, const Marginals& marginals,
                    const SinkhornConfig& config) {
  double eps = config.epsilon;
  if (config.epsilon_scaling) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (Index i = 0; i < cost.rows(); ++i) {
      for (Index j = 0; j < cost.cols(); ++j) {
        if (mask.entries(i, j) == 0) continue;
        lo = std::min(lo, cost.entries(i, j));
        hi = std::max(hi, cost.entries(i, j));
      }
    }
    if (hi > lo) eps = std::max(eps, hi - lo);
  }
  SinkhornConfig stage = config;
  stage.epsilon = eps;
  if (config.epsilon_scaling && !config.log_domain) {
    throw ArgumentError("epsilon scaling requires log_domain mode");
  }
  SinkhornState state(cost, mask, marginals, stage);

  int iterations = 0;
  for (;;) {
    bool done = false;
    for (int k = 0; k < config.max_iterations; ++k) {
      state.iterate();
      ++iterations;
      if (state.row_violation() <= config.tolerance) {
        done = true;
        break;
      }
    }
    for (int k = 0; !done && k < config.newton_steps; ++k) {
      if (state.newton_step() < 0.0) break;
      // A sweep after each step restores exact column sums.
      state.iterate();
      ++iterations;
      done = state.row_violation() <= config.tolerance;
    }
    if (eps <= config.epsilon) break;
    const double next = std::max(config.epsilon, 0.5 * eps);
    state.sharpen(eps / next);
    eps = next;
  }
  TransportPlan out;
  out.plan = state.plan();
  if (!out.plan.allFinite()) {
    throw NumericalError("transport plan has non-finite entries; use log_domain mode");
  }
  out.iterations_used = iterations;
  out.marginal_violation = marginal_violation(out.plan, marginals);
  out.converged = out.marginal_violation <= config.tolerance;
  return out;
}

double marginal_violation(const Matrix& plan, const Marginals& marginals) {
  if (plan.rows() != marginals.row().size() || plan.cols() != marginals.col().size()) {
    throw ArgumentError("plan shape does not match the marginals");
  }
  const double rows = (plan.rowwise().sum() - marginals.row()).cwiseAbs().maxCoeff();
  const double cols = (plan.colwise().sum().transpose() - marginals.col()).cwiseAbs().maxCoeff();
  return std::max(rows, cols);
}

double transport_objective(const Matrix& plan, const CostMatrix& cost) {
  if (plan.rows() != cost.rows() || plan.cols() != cost.cols()) {
    throw ArgumentError("plan shape does not match the cost matrix");
  }
  double s = 0.0;
  for (Index i = 0; i < plan.rows(); ++i) {
    for (Index j = 0; j < plan.cols(); ++j) s += plan(i, j) * cost.entries(i, j);
  }
  return s;
}

}  // namespace temporalot
