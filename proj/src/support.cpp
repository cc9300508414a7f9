#include "temporalot/support.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <vector>

#include "temporalot/error.hpp"

namespace temporalot {

namespace {

constexpr double kFlowEps = 1e-12;

// Dinic max-flow on real capacities; residuals below kFlowEps count as zero.
class FlowNetwork {
 public:
  struct Edge {
    int to;
    int rev;
    double cap;
    double flow = 0.0;
  };

  explicit FlowNetwork(int nodes) : adj_(static_cast<std::size_t>(nodes)) {}

  // Returns the index of the forward edge in adj_[from].
  int add_edge(int from, int to, double cap) {
    auto& f = adj_[static_cast<std::size_t>(from)];
    auto& t = adj_[static_cast<std::size_t>(to)];
    f.push_back({to, static_cast<int>(t.size()), cap});
    t.push_back({from, static_cast<int>(f.size()) - 1, 0.0});
    return static_cast<int>(f.size()) - 1;
  }

  double max_flow(int s, int t) {
    double total = 0.0;
    while (build_levels(s, t)) {
      iter_.assign(adj_.size(), 0);
      for (;;) {
        const double pushed = push(s, t, std::numeric_limits<double>::infinity());
        if (pushed <= kFlowEps) break;
        total += pushed;
      }
    }
    return total;
  }

  const Edge& edge(int from, int index) const {
    return adj_[static_cast<std::size_t>(from)][static_cast<std::size_t>(index)];
  }

 private:
  bool build_levels(int s, int t) {
    level_.assign(adj_.size(), -1);
    std::queue<int> q;
    level_[static_cast<std::size_t>(s)] = 0;
    q.push(s);
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      for (const Edge& e : adj_[static_cast<std::size_t>(v)]) {
        if (e.cap - e.flow > kFlowEps && level_[static_cast<std::size_t>(e.to)] < 0) {
          level_[static_cast<std::size_t>(e.to)] = level_[static_cast<std::size_t>(v)] + 1;
          q.push(e.to);
        }
      }
    }
    return level_[static_cast<std::size_t>(t)] >= 0;
  }

  double push(int v, int t, double limit) {
    if (v == t) return limit;
    auto& edges = adj_[static_cast<std::size_t>(v)];
    for (int& k = iter_[static_cast<std::size_t>(v)]; k < static_cast<int>(edges.size()); ++k) {
      Edge& e = edges[static_cast<std::size_t>(k)];
      const double residual = e.cap - e.flow;
      if (residual <= kFlowEps ||
          level_[static_cast<std::size_t>(e.to)] != level_[static_cast<std::size_t>(v)] + 1) {
        continue;
      }
      const double got = push(e.to, t, std::min(limit, residual));
      if (got > kFlowEps) {
        e.flow += got;
        adj_[static_cast<std::size_t>(e.to)][static_cast<std::size_t>(e.rev)].flow -= got;
        return got;
      }
    }
    return 0.0;
  }

  std::vector<std::vector<Edge>> adj_;
  std::vector<int> level_;
  std::vector<int> iter_;
};

// Tarjan's strongly connected components.
class SccFinder {
 public:
  explicit SccFinder(const std::vector<std::vector<int>>& graph)
      : graph_(graph),
        index_(graph.size(), -1),
        low_(graph.size(), 0),
        on_stack_(graph.size(), false),
        component_(graph.size(), -1) {
    for (int v = 0; v < static_cast<int>(graph.size()); ++v) {
      if (index_[static_cast<std::size_t>(v)] < 0) visit(v);
    }
  }

  int component(int v) const { return component_[static_cast<std::size_t>(v)]; }

 private:
  void visit(int v) {
    const auto sv = static_cast<std::size_t>(v);
    index_[sv] = low_[sv] = counter_++;
    stack_.push_back(v);
    on_stack_[sv] = true;
    for (int w : graph_[sv]) {
      const auto sw = static_cast<std::size_t>(w);
      if (index_[sw] < 0) {
        visit(w);
        low_[sv] = std::min(low_[sv], low_[sw]);
      } else if (on_stack_[sw]) {
        low_[sv] = std::min(low_[sv], index_[sw]);
      }
    }
    if (low_[sv] == index_[sv]) {
      for (;;) {
        const int w = stack_.back();
        stack_.pop_back();
        on_stack_[static_cast<std::size_t>(w)] = false;
        component_[static_cast<std::size_t>(w)] = components_;
        if (w == v) break;
      }
      ++components_;
    }
  }

  const std::vector<std::vector<int>>& graph_;
  std::vector<int> index_;
  std::vector<int> low_;
  std::vector<bool> on_stack_;
  std::vector<int> component_;
  std::vector<int> stack_;
  int counter_ = 0;
  int components_ = 0;
};

}  // namespace

SupportAnalysis analyze_support(const BinaryMatrix& mask, const Vector& row, const Vector& col) {
  const Index rows = mask.rows();
  const Index cols = mask.cols();
  if (row.size() != rows || col.size() != cols) {
    throw ArgumentError("analyze_support: marginal sizes do not match the mask shape");
  }

  // Nodes: 0 source, 1..rows, rows+1..rows+cols, rows+cols+1 sink.
  const int source = 0;
  const int sink = static_cast<int>(rows + cols + 1);
  auto row_node = [](Index i) { return static_cast<int>(1 + i); };
  auto col_node = [rows](Index j) { return static_cast<int>(1 + rows + j); };

  FlowNetwork net(sink + 1);
  const double inf = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < rows; ++i) net.add_edge(source, row_node(i), row(i));
  for (Index j = 0; j < cols; ++j) net.add_edge(col_node(j), sink, col(j));

  std::vector<std::vector<std::pair<Index, int>>> cell_edges(static_cast<std::size_t>(rows));
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      if (mask(i, j) != 0) {
        cell_edges[static_cast<std::size_t>(i)].emplace_back(
            j, net.add_edge(row_node(i), col_node(j), inf));
      }
    }
  }

  const double total = row.sum();
  const double flow = net.max_flow(source, sink);
  SupportAnalysis out;
  out.feasible = flow >= total - 1e-9 * std::max(1.0, total);
  if (!out.feasible) return out;

  // Residual graph on rows and columns. Forward cell edges always have
  // residual capacity; a backward edge exists wherever the flow is positive.
  std::vector<std::vector<int>> graph(static_cast<std::size_t>(rows + cols));
  for (Index i = 0; i < rows; ++i) {
    for (const auto& [j, e] : cell_edges[static_cast<std::size_t>(i)]) {
      const auto r = static_cast<int>(i);
      const auto c = static_cast<int>(rows + j);
      graph[static_cast<std::size_t>(r)].push_back(c);
      if (net.edge(row_node(i), e).flow > kFlowEps) graph[static_cast<std::size_t>(c)].push_back(r);
    }
  }
  SccFinder scc(graph);

  out.active = BinaryMatrix::Zero(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (const auto& [j, e] : cell_edges[static_cast<std::size_t>(i)]) {
      (void)e;
      if (scc.component(static_cast<int>(i)) == scc.component(static_cast<int>(rows + j))) {
        out.active(i, j) = 1;
      }
    }
  }
  return out;
}

}  // namespace temporalot
