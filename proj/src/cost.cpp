#include "temporalot/cost.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "temporalot/error.hpp"

namespace temporalot {

namespace {

// Same summation order for dot products and squared norms, so that
// cosine(a, a) is exactly 1.
double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) s += a[k] * b[k];
  return s;
}

double cosine_from_parts(double ab, double aa, double bb) {
  const double c = 1.0 - ab / std::sqrt(aa * bb);
  return std::clamp(c, 0.0, 2.0);
}

std::vector<double> squared_norms(const Trajectory& t, const char* who) {
  std::vector<double> out(static_cast<std::size_t>(t.length()));
  const auto d = static_cast<std::size_t>(t.dim());
  for (Index i = 0; i < t.length(); ++i) {
    const double* row = t.features().data() + i * t.dim();
    out[static_cast<std::size_t>(i)] = dot(row, row, d);
    if (!(out[static_cast<std::size_t>(i)] > 0.0)) {
      throw ValidationError(std::string(who) + " frame " + std::to_string(i) +
                            " has zero norm; cosine cost is undefined");
    }
  }
  return out;
}

}  // namespace

double cosine_cost(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ArgumentError("cosine_cost: dimension mismatch (" + std::to_string(a.size()) + " vs " +
                        std::to_string(b.size()) + ")");
  }
  if (a.empty()) throw ArgumentError("cosine_cost: empty vectors");
  const double aa = dot(a.data(), a.data(), a.size());
  const double bb = dot(b.data(), b.data(), b.size());
  if (!(aa > 0.0) || !(bb > 0.0)) throw ValidationError("cosine_cost: zero-norm vector");
  return cosine_from_parts(dot(a.data(), b.data(), a.size()), aa, bb);
}

CostMatrix pairwise_cost_matrix(const Trajectory& agent, const Trajectory& demo) {
  if (agent.dim() != demo.dim()) {
    throw ArgumentError("feature dimension mismatch: agent " + std::to_string(agent.dim()) +
                        ", demo " + std::to_string(demo.dim()));
  }
  const auto na = squared_norms(agent, "agent");
  const auto ne = squared_norms(demo, "demo");
  const auto d = static_cast<std::size_t>(agent.dim());

  CostMatrix out{Matrix(agent.length(), demo.length()), 1};
  for (Index i = 0; i < agent.length(); ++i) {
    const double* a = agent.features().data() + i * agent.dim();
    for (Index j = 0; j < demo.length(); ++j) {
      const double* e = demo.features().data() + j * demo.dim();
      out.entries(i, j) = cosine_from_parts(dot(a, e, d), na[static_cast<std::size_t>(i)],
                                            ne[static_cast<std::size_t>(j)]);
    }
  }
  return out;
}

CostMatrix context_cost_matrix(const Trajectory& agent, const Trajectory& demo,
                               int context_length) {
  if (context_length < 1) {
    throw ArgumentError("context length must be >= 1, got " + std::to_string(context_length));
  }
  CostMatrix pair = pairwise_cost_matrix(agent, demo);
  if (context_length == 1) return pair;

  const Index ta = pair.rows();
  const Index te = pair.cols();
  CostMatrix out{Matrix(ta, te), context_length};
  for (Index i = 0; i < ta; ++i) {
    for (Index j = 0; j < te; ++j) {
      double s = 0.0;
      for (int h = 0; h < context_length; ++h) {
        s += pair.entries(std::min(i + h, ta - 1), std::min(j + h, te - 1));
      }
      out.entries(i, j) = s / context_length;
    }
  }
  return out;
}

}  // namespace temporalot
