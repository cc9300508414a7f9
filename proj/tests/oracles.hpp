// Independent reference computations used to check the library.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "temporalot/cost.hpp"
#include "temporalot/linalg.hpp"
#include "temporalot/trajectory.hpp"

namespace oracle {

using temporalot::Index;
using temporalot::Matrix;

// Plain linear-domain Sinkhorn on a dense kernel, uniform marginals, starting
// from v = 1 and alternating u = a / (K v), v = b / (K^T u).
inline Matrix reference_sinkhorn(const Matrix& cost, double epsilon, int iterations) {
  const Index n = cost.rows();
  const Index m = cost.cols();
  std::vector<double> k(static_cast<std::size_t>(n * m));
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < m; ++j) k[static_cast<std::size_t>(i * m + j)] = std::exp(-cost(i, j) / epsilon);
  }
  std::vector<double> u(static_cast<std::size_t>(n), 1.0);
  std::vector<double> v(static_cast<std::size_t>(m), 1.0);
  const double a = 1.0 / static_cast<double>(n);
  const double b = 1.0 / static_cast<double>(m);
  for (int it = 0; it < iterations; ++it) {
    for (Index i = 0; i < n; ++i) {
      double s = 0.0;
      for (Index j = 0; j < m; ++j) s += k[static_cast<std::size_t>(i * m + j)] * v[static_cast<std::size_t>(j)];
      u[static_cast<std::size_t>(i)] = a / s;
    }
    for (Index j = 0; j < m; ++j) {
      double s = 0.0;
      for (Index i = 0; i < n; ++i) s += k[static_cast<std::size_t>(i * m + j)] * u[static_cast<std::size_t>(i)];
      v[static_cast<std::size_t>(j)] = b / s;
    }
  }
  Matrix plan(n, m);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < m; ++j) {
      plan(i, j) = u[static_cast<std::size_t>(i)] * k[static_cast<std::size_t>(i * m + j)] *
                   v[static_cast<std::size_t>(j)];
    }
  }
  return plan;
}

// min over permutations sigma of sum_i C[i][sigma(i)], by enumeration.
inline double best_permutation_cost(const Matrix& cost) {
  std::vector<int> perm(static_cast<std::size_t>(cost.rows()));
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < perm.size(); ++i) s += cost(static_cast<Index>(i), perm[i]);
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

inline double cosine_cost(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    dot += a[k] * b[k];
    na += a[k] * a[k];
    nb += b[k] * b[k];
  }
  return 1.0 - dot / std::sqrt(na * nb);
}

inline std::vector<double> row(const temporalot::Trajectory& t, Index i) {
  const auto f = t.frame(i);
  return {f.begin(), f.end()};
}

inline temporalot::Trajectory random_trajectory(std::mt19937_64& rng, Index length, Index dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix f(length, dim);
  for (Index i = 0; i < length; ++i) {
    for (Index j = 0; j < dim; ++j) f(i, j) = normal(rng);
  }
  return temporalot::Trajectory(f);
}

inline temporalot::CostMatrix random_cost(std::mt19937_64& rng, Index rows, Index cols) {
  std::uniform_real_distribution<double> unit(0.0, 2.0);
  temporalot::CostMatrix c;
  c.entries.resize(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) c.entries(i, j) = unit(rng);
  }
  return c;
}

// The demo frames in a random order.
inline temporalot::Trajectory shuffle_frames(const temporalot::Trajectory& t, std::mt19937_64& rng) {
  std::vector<Index> order(static_cast<std::size_t>(t.length()));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  Matrix f(t.length(), t.dim());
  for (Index i = 0; i < t.length(); ++i) f.row(i) = t.features().row(order[static_cast<std::size_t>(i)]);
  return temporalot::Trajectory(f);
}

}  // namespace oracle
