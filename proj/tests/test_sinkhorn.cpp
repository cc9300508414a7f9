#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "temporalot/error.hpp"
#include "temporalot/sinkhorn.hpp"

using namespace temporalot;

namespace {

CostMatrix cost_of(const Matrix& m) {
  CostMatrix c;
  c.entries = m;
  return c;
}

bool zero_off_support(const Matrix& plan, const Mask& mask) {
  for (Index i = 0; i < plan.rows(); ++i) {
    for (Index j = 0; j < plan.cols(); ++j) {
      if (!mask.allows(i, j) && plan(i, j) != 0.0) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("zero cost gives the uniform plan") {
  const TransportPlan p =
      solve(cost_of(Matrix::Zero(2, 2)), ones_mask(2, 2), Marginals::uniform(2, 2), {});
  CHECK(p.converged);
  for (Index i = 0; i < 2; ++i) {
    for (Index j = 0; j < 2; ++j) CHECK(p.plan(i, j) == doctest::Approx(0.25));
  }
}

TEST_CASE("k_m = 0 band forces the diagonal plan") {
  std::mt19937_64 rng(3);
  const CostMatrix c = oracle::random_cost(rng, 3, 3);
  const TransportPlan p = solve(c, band_mask(3, 3, 0), Marginals::uniform(3, 3), {});
  CHECK(p.converged);
  for (Index i = 0; i < 3; ++i) {
    for (Index j = 0; j < 3; ++j) CHECK(p.plan(i, j) == doctest::Approx(i == j ? 1.0 / 3.0 : 0.0));
  }
}

TEST_CASE("ones mask matches plain Sinkhorn iterate for iterate") {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 10; ++k) {
    const CostMatrix c = oracle::random_cost(rng, 3 + k, 5 + k % 3);
    SinkhornConfig cfg;
    cfg.epsilon = 0.2;
    cfg.tolerance = 1e-300;
    cfg.max_iterations = 7 + 10 * k;
    for (bool log_domain : {true, false}) {
      cfg.log_domain = log_domain;
      const TransportPlan p = solve(c, ones_mask(c.rows(), c.cols()),
                                    Marginals::uniform(c.rows(), c.cols()), cfg);
      CHECK(p.iterations_used == cfg.max_iterations);
      const Matrix ref = oracle::reference_sinkhorn(c.entries, cfg.epsilon, cfg.max_iterations);
      CHECK((p.plan - ref).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("small eps approaches the assignment optimum") {
  std::mt19937_64 rng(8);
  for (Index n = 2; n <= 5; ++n) {
    const CostMatrix c = oracle::random_cost(rng, n, n);
    SinkhornConfig cfg;
    cfg.epsilon = 0.001;
    cfg.max_iterations = 50;
    cfg.epsilon_scaling = true;
    cfg.newton_steps = 20;
    const TransportPlan p = solve(c, ones_mask(n, n), Marginals::uniform(n, n), cfg);
    CHECK(p.converged);
    const double opt = oracle::best_permutation_cost(c.entries) / static_cast<double>(n);
    CHECK(transport_objective(p.plan, c) == doctest::Approx(opt).epsilon(0.01));
  }
}

TEST_CASE("objective does not increase as eps shrinks") {
  std::mt19937_64 rng(13);
  for (int k = 0; k < 10; ++k) {
    const Index n = 3 + static_cast<Index>(rng() % 8);
    const Index m = 3 + static_cast<Index>(rng() % 8);
    const CostMatrix c = oracle::random_cost(rng, n, m);
    const Mask mask = band_mask(n, m, 1);
    double prev = 1e9;
    for (double eps : {0.1, 0.01, 0.001}) {
      SinkhornConfig cfg;
      cfg.epsilon = eps;
      cfg.tolerance = 1e-9;
      cfg.max_iterations = 100;
      cfg.epsilon_scaling = true;
      cfg.newton_steps = 30;
      const TransportPlan p = solve(c, mask, Marginals::uniform(n, m), cfg);
      REQUIRE(p.converged);
      const double obj = transport_objective(p.plan, c);
      CHECK(obj <= prev + 1e-6);
      prev = obj;
    }
  }
}

TEST_CASE("plans stay on the mask and meet the marginals") {
  std::mt19937_64 rng(17);
  for (int k = 0; k < 40; ++k) {
    const Index n = 1 + static_cast<Index>(rng() % 20);
    const Index m = 1 + static_cast<Index>(rng() % 20);
    const CostMatrix c = oracle::random_cost(rng, n, m);
    const MaskKind kind = static_cast<MaskKind>(k % 4);
    const Mask mask = make_mask(kind, c, static_cast<int>(rng() % 4));
    SinkhornConfig cfg;
    cfg.epsilon = 0.05;
    cfg.max_iterations = 50;
    cfg.epsilon_scaling = true;
    cfg.newton_steps = 20;
    const TransportPlan p = solve(c, mask, Marginals::uniform(n, m), cfg);
    CHECK(p.converged);
    CHECK(p.marginal_violation <= cfg.tolerance);
    CHECK(marginal_violation(p.plan, Marginals::uniform(n, m)) == p.marginal_violation);
    CHECK(zero_off_support(p.plan, mask));
    CHECK((p.plan.array() >= 0.0).all());
  }
}

TEST_CASE("causal square mask prunes to the diagonal") {
  std::mt19937_64 rng(1);
  const CostMatrix c = oracle::random_cost(rng, 6, 6);
  const TransportPlan p = solve(c, causal_mask(6, 6), Marginals::uniform(6, 6), {});
  CHECK(p.converged);
  CHECK(p.iterations_used == 1);
  CHECK((p.plan - Matrix::Identity(6, 6) / 6.0).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("solve is deterministic") {
  std::mt19937_64 rng(31);
  const CostMatrix c = oracle::random_cost(rng, 12, 9);
  SinkhornConfig cfg;
  cfg.epsilon_scaling = true;
  cfg.newton_steps = 5;
  const TransportPlan a = solve(c, dynamic_mask(c, 2), Marginals::uniform(12, 9), cfg);
  const TransportPlan b = solve(c, dynamic_mask(c, 2), Marginals::uniform(12, 9), cfg);
  CHECK(a.plan == b.plan);
  CHECK(a.iterations_used == b.iterations_used);
}

TEST_CASE("budget exhaustion is reported, not thrown") {
  std::mt19937_64 rng(2);
  const CostMatrix c = oracle::random_cost(rng, 8, 8);
  SinkhornConfig cfg;
  cfg.epsilon = 0.01;
  cfg.max_iterations = 2;
  const TransportPlan p = solve(c, ones_mask(8, 8), Marginals::uniform(8, 8), cfg);
  CHECK_FALSE(p.converged);
  CHECK(p.iterations_used == 2);
}

TEST_CASE("solver errors") {
  const CostMatrix c = cost_of(Matrix::Zero(2, 2));
  Mask empty_row = ones_mask(2, 2);
  empty_row.entries.row(1).setZero();
  CHECK_THROWS_AS(solve(c, empty_row, Marginals::uniform(2, 2), {}), FeasibilityError);
  Mask corner = ones_mask(2, 2);
  corner.entries(0, 1) = 0;
  corner.entries(1, 1) = 0;
  CHECK_THROWS_AS(solve(c, corner, Marginals::uniform(2, 2), {}), FeasibilityError);
  CHECK_THROWS_AS(solve(c, ones_mask(3, 2), Marginals::uniform(2, 2), {}), ArgumentError);
  SinkhornConfig bad;
  bad.epsilon = 0.0;
  CHECK_THROWS_AS(solve(c, ones_mask(2, 2), Marginals::uniform(2, 2), bad), ArgumentError);
  SinkhornConfig linear;
  linear.log_domain = false;
  linear.epsilon = 1e-3;
  CHECK_THROWS_AS(solve(cost_of(Matrix::Constant(2, 2, 2.0)), ones_mask(2, 2),
                        Marginals::uniform(2, 2), linear),
                  NumericalError);
  CHECK_THROWS_AS(Marginals(Vector::Constant(2, 0.5), Vector::Constant(2, 0.6)), ValidationError);
}

TEST_CASE("marginal violation and objective arithmetic") {
  const Marginals u = Marginals::uniform(2, 2);
  const Matrix uniform = Matrix::Constant(2, 2, 0.25);
  CHECK(marginal_violation(uniform, u) == 0.0);
  CHECK(marginal_violation(2.0 * uniform, u) == doctest::Approx(0.5));
  Matrix swap(2, 2);
  swap << 0, 1, 1, 0;
  CHECK(transport_objective(uniform, cost_of(swap)) == doctest::Approx(0.5));
  CHECK(transport_objective(Matrix::Identity(2, 2) / 2.0, cost_of(swap)) == 0.0);
}
