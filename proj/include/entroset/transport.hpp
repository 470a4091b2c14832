#pragma once

// Linear minimisation over the transportation polytope
//   { X >= 0 : X 1 = row, X^T 1 = col }
// by successive shortest paths on the bipartite flow network, followed by
// cycle cancelling so the answer is a vertex (its support is a forest).

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "entroset/error.hpp"

namespace entroset {

namespace detail {

struct FlowArc {
  int to;
  double cap;
  double cost;
};

class TransportNetwork {
 public:
  TransportNetwork(std::span<const double> row, std::span<const double> col, std::span<const double> cost)
      : r_(static_cast<int>(row.size())), c_(static_cast<int>(col.size())), adj_(r_ + c_ + 2) {
    for (int i = 0; i < r_; ++i) add_arc(source(), row_node(i), row[i], 0.0);
    cell_arc_.resize(static_cast<std::size_t>(r_ * c_));
    for (int i = 0; i < r_; ++i) {
      for (int j = 0; j < c_; ++j) {
        cell_arc_[i * c_ + j] = add_arc(row_node(i), col_node(j), 2.0, cost[i * c_ + j]);
      }
    }
    for (int j = 0; j < c_; ++j) add_arc(col_node(j), sink(), col[j], 0.0);
  }

  void solve(double eps) {
    const int n = static_cast<int>(adj_.size());
    std::vector<double> dist(n);
    std::vector<int> pred_arc(n);
    const int max_rounds = 4 * (r_ + c_ + 2) * (r_ + c_ + 2) + 16;
    for (int round = 0; round < max_rounds; ++round) {
      std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
      std::fill(pred_arc.begin(), pred_arc.end(), -1);
      dist[source()] = 0.0;
      for (int pass = 0; pass < n; ++pass) {
        bool changed = false;
        for (int a = 0; a < static_cast<int>(arcs_.size()); ++a) {
          const int u = from_[a];
          if (arcs_[a].cap <= eps || dist[u] == std::numeric_limits<double>::infinity()) continue;
          const double nd = dist[u] + arcs_[a].cost;
          const int v = arcs_[a].to;
          if (nd < dist[v] - 1e-12 * (1.0 + std::abs(dist[v] == std::numeric_limits<double>::infinity() ? 0.0 : dist[v]))) {
            dist[v] = nd;
            pred_arc[v] = a;
            changed = true;
          }
        }
        if (!changed) break;
      }
      if (pred_arc[sink()] < 0) return;
      double push = std::numeric_limits<double>::infinity();
      int steps = 0;
      for (int v = sink(); v != source(); v = from_[pred_arc[v]]) {
        push = std::min(push, arcs_[pred_arc[v]].cap);
        if (++steps > n) throw Error("transport: residual network has a negative cycle");
      }
      for (int v = sink(); v != source(); v = from_[pred_arc[v]]) {
        const int a = pred_arc[v];
        arcs_[a].cap -= push;
        arcs_[a ^ 1].cap += push;
      }
    }
    throw Error("transport: successive shortest paths did not terminate");
  }

  [[nodiscard]] std::vector<double> plan() const {
    std::vector<double> x(cell_arc_.size());
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = arcs_[cell_arc_[k] ^ 1].cap;
    return x;
  }

 private:
  int source() const { return 0; }
  int sink() const { return r_ + c_ + 1; }
  int row_node(int i) const { return 1 + i; }
  int col_node(int j) const { return 1 + r_ + j; }

  int add_arc(int u, int v, double cap, double cost) {
    const int id = static_cast<int>(arcs_.size());
    arcs_.push_back({v, cap, cost});
    from_.push_back(u);
    arcs_.push_back({u, 0.0, -cost});
    from_.push_back(v);
    adj_[u].push_back(id);
    adj_[v].push_back(id + 1);
    return id;
  }

  int r_;
  int c_;
  std::vector<std::vector<int>> adj_;
  std::vector<FlowArc> arcs_;
  std::vector<int> from_;
  std::vector<int> cell_arc_;
};

// Finds a cycle in the bipartite support graph of x (rows 0..r-1, columns r..r+c-1).
// Returns the cells along the cycle in order, or an empty vector for a forest.
inline std::vector<std::size_t> support_cycle(std::span<const double> x, std::size_t r, std::size_t c) {
  const std::size_t n = r + c;
  std::vector<int> parent(n, -1);
  std::vector<std::size_t> parent_cell(n, 0);
  std::vector<int> depth(n, -1);
  for (std::size_t root = 0; root < n; ++root) {
    if (depth[root] >= 0) continue;
    depth[root] = 0;
    std::vector<std::size_t> stack{root};
    while (!stack.empty()) {
      const auto u = stack.back();
      stack.pop_back();
      const bool is_row = u < r;
      const std::size_t span = is_row ? c : r;
      for (std::size_t k = 0; k < span; ++k) {
        const std::size_t v = is_row ? r + k : k;
        const std::size_t cell = is_row ? u * c + k : k * c + (u - r);
        if (x[cell] <= 0.0) continue;
        if (parent[u] == static_cast<int>(v) && parent_cell[u] == cell) continue;
        if (depth[v] < 0) {
          depth[v] = depth[u] + 1;
          parent[v] = static_cast<int>(u);
          parent_cell[v] = cell;
          stack.push_back(v);
          continue;
        }
        // Non-tree edge u-v closes a cycle through their common ancestor.
        std::vector<std::size_t> left{cell};
        std::vector<std::size_t> right;
        auto a = u;
        auto b = v;
        while (a != b) {
          if (depth[a] >= depth[b]) {
            left.push_back(parent_cell[a]);
            a = static_cast<std::size_t>(parent[a]);
          } else {
            right.push_back(parent_cell[b]);
            b = static_cast<std::size_t>(parent[b]);
          }
        }
        // Walk: v -> u (cell), u up to ancestor, then ancestor down to v.
        std::vector<std::size_t> cycle = left;
        for (auto it = right.rbegin(); it != right.rend(); ++it) cycle.push_back(*it);
        return cycle;
      }
    }
  }
  return {};
}

}  // namespace detail

/// Vertex of the transportation polytope minimising sum cost * x.
/// `cost` is row-major, rows.size() x cols.size(); the result uses the same layout.
inline std::vector<double> transport_lmo(std::span<const double> rows, std::span<const double> cols,
                                         std::span<const double> cost) {
  const auto r = rows.size();
  const auto c = cols.size();
  if (r == 0 || c == 0) throw InvalidArgumentError("transport needs nonempty marginals");
  if (cost.size() != r * c) throw InvalidArgumentError("cost matrix has the wrong shape");
  for (double v : cost) {
    if (!std::isfinite(v)) throw InvalidArgumentError("cost entries must be finite");
  }
  double rs = 0.0;
  double cs = 0.0;
  for (double v : rows) rs += v;
  for (double v : cols) cs += v;
  if (std::abs(rs - cs) > 1e-9) throw InvalidArgumentError("marginals carry different total mass");

  constexpr double kEps = 1e-15;
  detail::TransportNetwork net(rows, cols, cost);
  net.solve(kEps);
  auto x = net.plan();
  for (auto& v : x) {
    if (v < kEps) v = 0.0;
  }

  while (true) {
    const auto cycle = detail::support_cycle(x, r, c);
    if (cycle.empty()) break;
    double delta = 0.0;
    for (std::size_t k = 0; k < cycle.size(); ++k) delta += (k % 2 == 0 ? 1.0 : -1.0) * cost[cycle[k]];
    // Move along the non-increasing orientation until one cell empties.
    const std::size_t minus_parity = delta <= 0.0 ? 1 : 0;
    std::size_t hit = cycle[minus_parity];
    for (std::size_t k = minus_parity; k < cycle.size(); k += 2) {
      if (x[cycle[k]] < x[hit]) hit = cycle[k];
    }
    const double theta = x[hit];
    for (std::size_t k = 0; k < cycle.size(); ++k) {
      x[cycle[k]] += (k % 2 == minus_parity ? -theta : theta);
    }
    x[hit] = 0.0;
    for (std::size_t k = minus_parity; k < cycle.size(); k += 2) {
      if (x[cycle[k]] < kEps) x[cycle[k]] = 0.0;
    }
  }
  return x;
}

}  // namespace entroset
