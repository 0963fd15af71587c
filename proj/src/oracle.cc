// Copyright 2023 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "bud/oracle.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "bud/error.h"
#include "bud/rational.h"
#include "bud/spanning_tree.h"
#include "bud/splittability.h"

namespace bud {
namespace {

class RollbackDsu {
 public:
  explicit RollbackDsu(int n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }
  int Find(int x) const {
    while (parent_[x] != x) x = parent_[x];
    return x;
  }
  bool Unite(int a, int b) {
    a = Find(a);
    b = Find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    history_.push_back(b);
    return true;
  }
  void Undo() {
    const int b = history_.back();
    history_.pop_back();
    size_[parent_[b]] -= size_[b];
    parent_[b] = b;
  }

 private:
  std::vector<int> parent_;
  std::vector<int> size_;
  std::vector<int> history_;
};

struct PartitionEnumerator {
  const WeightedGraph& graph;
  int k;
  std::int64_t scale;
  std::int64_t lower;
  std::int64_t upper;
  std::vector<int> assignment;
  int districts = 0;
  std::vector<Partition> out;

  std::int64_t W(int v) const { return graph.population(v) * scale; }

  bool Fits(std::int64_t w, int m) const {
    return m >= 1 && static_cast<__int128>(m) * lower <= w &&
           w <= static_cast<__int128>(m) * upper;
  }

  // Every unassigned component must hold a whole number of districts and
  // the total must leave room for exactly the remaining count.
  bool RemainderFeasible() const {
    const int n = graph.num_vertices();
    std::vector<char> seen(n, 0);
    std::int64_t total = 0;
    int min_parts = 0;
    int max_parts = 0;
    std::vector<int> stack;
    for (int s = 0; s < n; ++s) {
      if (assignment[s] >= 0 || seen[s]) continue;
      std::int64_t w = 0;
      int size = 0;
      seen[s] = 1;
      stack.push_back(s);
      while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        w += W(v);
        ++size;
        for (const Arc& arc : graph.neighbors(v)) {
          if (assignment[arc.to] >= 0 || seen[arc.to]) continue;
          seen[arc.to] = 1;
          stack.push_back(arc.to);
        }
      }
      // Feasible counts for this component: ceil(w/U) .. floor(w/L).
      const std::int64_t lo = upper > 0 ? (w + upper - 1) / upper : 0;
      const std::int64_t hi = std::min<std::int64_t>(w / lower, size);
      if (lo > hi || hi < 1) return false;
      min_parts += static_cast<int>(std::max<std::int64_t>(lo, 1));
      max_parts += static_cast<int>(hi);
      total += w;
    }
    const int left = k - districts;
    return min_parts <= left && left <= max_parts && (left > 0 || total == 0);
  }

  void Next() {
    const int n = graph.num_vertices();
    int v = 0;
    while (v < n && assignment[v] >= 0) ++v;
    if (v == n) {
      if (districts == k) {
        Partition p;
        p.k = k;
        p.assignment = assignment;
        out.push_back(std::move(p));
      }
      return;
    }
    if (districts == k) return;
    std::vector<char> in_set(n, 0);
    std::vector<char> in_ext(n, 0);
    std::vector<char> excluded(n, 0);
    std::vector<int> set = {v};
    in_set[v] = 1;
    std::vector<int> ext;
    for (const Arc& arc : graph.neighbors(v)) {
      if (assignment[arc.to] < 0) {
        ext.push_back(arc.to);
        in_ext[arc.to] = 1;
      }
    }
    Grow(set, W(v), ext, in_set, in_ext, excluded);
  }

  void Grow(std::vector<int>& set, std::int64_t weight, std::vector<int> ext,
            std::vector<char>& in_set, std::vector<char>& in_ext,
            std::vector<char>& excluded) {
    if (weight > upper) return;
    if (weight >= lower) Close(set);
    const std::vector<int> initial = ext;
    std::vector<int> banned_here;
    while (!ext.empty()) {
      const int u = ext.back();
      ext.pop_back();
      in_ext[u] = 0;
      std::vector<int> grown = ext;
      std::vector<int> added;
      for (const Arc& arc : graph.neighbors(u)) {
        const int w = arc.to;
        if (assignment[w] >= 0 || in_set[w] || excluded[w] || in_ext[w]) {
          continue;
        }
        grown.push_back(w);
        in_ext[w] = 1;
        added.push_back(w);
      }
      set.push_back(u);
      in_set[u] = 1;
      Grow(set, weight + W(u), grown, in_set, in_ext, excluded);
      in_set[u] = 0;
      set.pop_back();
      for (int w : added) in_ext[w] = 0;
      excluded[u] = 1;
      banned_here.push_back(u);
    }
    for (int u : banned_here) excluded[u] = 0;
    for (int u : initial) in_ext[u] = 1;
  }

  void Close(const std::vector<int>& set) {
    for (int v : set) assignment[v] = districts;
    ++districts;
    if (RemainderFeasible()) Next();
    --districts;
    for (int v : set) assignment[v] = -1;
  }
};

void RequireExact(const BalanceSpec& spec) {
  if (spec.lower() != spec.upper()) {
    throw Error(ErrorKind::kInvalidArgument,
                "splittable-tree counts need exact balance (L == U)");
  }
}

}  // namespace

std::vector<Partition> EnumeratePartitions(const WeightedGraph& graph,
                                           const BalanceSpec& spec) {
  if (graph.num_vertices() > kMaxPartitionVertices) {
    throw Error(ErrorKind::kGuard,
                "partition enumeration limited to " +
                    std::to_string(kMaxPartitionVertices) + " vertices, got " +
                    std::to_string(graph.num_vertices()));
  }
  const BalanceSpec::Scaled sc = spec.scaled();
  PartitionEnumerator e{graph,    spec.k(), sc.scale,
                        sc.lower, sc.upper, std::vector<int>(graph.num_vertices(), -1)};
  if (e.RemainderFeasible()) e.Next();
  return std::move(e.out);
}

BigInt CountSplittableTrees(const WeightedGraph& graph,
                            const BalanceSpec& spec) {
  RequireExact(spec);
  BigInt total = 0;
  for (const Partition& p : EnumeratePartitions(graph, spec)) {
    BigInt forests = 1;
    std::vector<std::vector<int>> members(p.k);
    for (int v = 0; v < graph.num_vertices(); ++v) {
      members[p.assignment[v]].push_back(v);
    }
    for (const auto& m : members) forests *= CountSpanningTrees(graph, m);
    total += forests * CountSpanningTrees(Quotient(graph, p));
  }
  return total;
}

void ForEachSpanningTree(
    const WeightedGraph& graph,
    const std::function<void(const std::vector<int>&)>& visit) {
  const int n = graph.num_vertices();
  const int m = graph.num_edges();
  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 0);
  const BigInt count = CountSpanningTrees(graph, all);
  if (count > BigInt(5000000)) {
    throw Error(ErrorKind::kGuard, "spanning-tree enumeration limited to 5e6 "
                                   "trees, graph has " + count.str());
  }
  RollbackDsu dsu(n);
  std::vector<char> dropped(m, 0);
  std::vector<int> chosen;

  auto still_connected = [&](int next) {
    RollbackDsu check(n);
    int joined = 0;
    for (int e : chosen) joined += check.Unite(graph.edge(e).u, graph.edge(e).v);
    for (int e = next; e < m; ++e) {
      if (!dropped[e]) joined += check.Unite(graph.edge(e).u, graph.edge(e).v);
    }
    return joined == n - 1;
  };

  std::function<void(int)> rec = [&](int e) {
    if (static_cast<int>(chosen.size()) == n - 1) {
      visit(chosen);
      return;
    }
    if (e == m) return;
    const Edge& edge = graph.edge(e);
    if (dsu.Unite(edge.u, edge.v)) {
      chosen.push_back(e);
      rec(e + 1);
      chosen.pop_back();
      dsu.Undo();
    }
    dropped[e] = 1;
    if (still_connected(e + 1)) rec(e + 1);
    dropped[e] = 0;
  };
  if (n == 1) {
    visit(chosen);
    return;
  }
  rec(0);
}

BigInt CountSplittableTreesDirect(const WeightedGraph& graph,
                                  const BalanceSpec& spec) {
  RequireExact(spec);
  BigInt count = 0;
  ForEachSpanningTree(graph, [&](const std::vector<int>& edges) {
    if (Rational(graph.total_population(), spec.k()) != spec.lower()) return;
    if (UniqueExactSplit(FromHostEdges(graph, edges), spec.k())) ++count;
  });
  return count;
}

std::vector<std::vector<int>> EnumerateMarkedSets(const WeightedTree& tree,
                                                  const BalanceSpec& spec,
                                                  int parts) {
  const int m = tree.num_edges();
  if (m > kMaxMarkedSetEdges) {
    throw Error(ErrorKind::kGuard,
                "marked-set enumeration limited to " +
                    std::to_string(kMaxMarkedSetEdges) + " edges, got " +
                    std::to_string(m));
  }
  if (parts < 1) {
    throw Error(ErrorKind::kInvalidArgument, "district count must be positive");
  }
  std::vector<std::vector<int>> out;
  if (parts - 1 > m) return out;
  const int n = tree.size();
  const auto& edges = tree.edge_list();
  std::vector<int> chosen;
  std::vector<char> cut(m, 0);
  auto check = [&]() {
    RollbackDsu dsu(n);
    for (int e = 0; e < m; ++e) {
      if (!cut[e]) dsu.Unite(edges[e].a, edges[e].b);
    }
    std::vector<std::int64_t> sum(n, 0);
    for (int v = 0; v < n; ++v) sum[dsu.Find(v)] += tree.weight(v);
    for (int v = 0; v < n; ++v) {
      if (dsu.Find(v) == v && !spec.Contains(sum[v])) return;
    }
    std::vector<int> labels;
    for (int e : chosen) labels.push_back(edges[e].label);
    std::sort(labels.begin(), labels.end());
    out.push_back(std::move(labels));
  };
  std::function<void(int)> rec = [&](int next) {
    if (static_cast<int>(chosen.size()) == parts - 1) {
      check();
      return;
    }
    for (int e = next; e < m; ++e) {
      chosen.push_back(e);
      cut[e] = 1;
      rec(e + 1);
      cut[e] = 0;
      chosen.pop_back();
    }
  };
  rec(0);
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

std::vector<int> Swapped(const std::vector<int>& edges, int add, int remove) {
  std::vector<int> out;
  out.reserve(edges.size());
  for (int e : edges) {
    if (e != remove) out.push_back(e);
  }
  if (add != remove) out.push_back(add);
  std::sort(out.begin(), out.end());
  return out;
}

void AddState(TransitionMatrix* m, ChainState s) {
  if (static_cast<int>(m->states.size()) >= kMaxChainStates) {
    throw Error(ErrorKind::kGuard, "chain state space exceeds " +
                                       std::to_string(kMaxChainStates));
  }
  m->index.emplace(s, static_cast<int>(m->states.size()));
  m->states.push_back(std::move(s));
}

int Lookup(const TransitionMatrix& m, const ChainState& s) {
  const auto it = m.index.find(s);
  if (it == m.index.end()) {
    throw Error(ErrorKind::kInvalidArgument, "transition leaves the state space");
  }
  return it->second;
}

}  // namespace

TransitionMatrix BuildTransitionMatrix(const WeightedGraph& graph,
                                       const BalanceSpec& spec,
                                       const OracleChain& chain) {
  TransitionMatrix m;
  const int k = spec.k();
  ForEachSpanningTree(graph, [&](const std::vector<int>& edges) {
    switch (chain.kind) {
      case ChainKind::kUpDown:
        AddState(&m, {edges, {}});
        break;
      case ChainKind::kBudTree:
        if (IsSplittable(FromHostEdges(graph, edges), spec, k)) {
          AddState(&m, {edges, {}});
        }
        break;
      case ChainKind::kBudMarked:
        for (auto& marks :
             EnumerateMarkedSets(FromHostEdges(graph, edges), spec, k)) {
          AddState(&m, {edges, std::move(marks)});
        }
        break;
    }
  });
  const int n = static_cast<int>(m.states.size());
  m.p = Eigen::MatrixXd::Zero(n, n);

  std::vector<double> log_target;
  if (chain.kind == ChainKind::kBudMarked) {
    LogTarget target(graph, chain.measure);
    for (const ChainState& s : m.states) {
      const MarkedTree mt(SpanningTree(graph, s.edges), s.marked, spec);
      log_target.push_back(target(mt));
    }
  }

  for (int i = 0; i < n; ++i) {
    const ChainState& s = m.states[i];
    const SpanningTree tree(graph, s.edges);
    const std::vector<int> out_edges = tree.NonTreeEdges();
    if (out_edges.empty()) {
      throw Error(ErrorKind::kInvalidArgument, "graph is a tree");
    }
    const double w_edge = 1.0 / static_cast<double>(out_edges.size());
    for (int e : out_edges) {
      if (chain.kind == ChainKind::kUpDown) {
        const Cycle c = FundamentalCycle(tree, e);
        for (int f : c.edges) {
          m.p(i, Lookup(m, {Swapped(s.edges, e, f), {}})) += w_edge / c.length();
        }
        continue;
      }
      if (chain.kind == ChainKind::kBudTree) {
        const std::vector<int> r = RemovableEdges(tree, e, spec, k);
        for (int f : r) {
          m.p(i, Lookup(m, {Swapped(s.edges, e, f), {}})) += w_edge / r.size();
        }
        continue;
      }
      const MarkedTree state(tree, s.marked, spec);
      const Neighborhood nb = BuildNeighborhood(state, e, chain.d, spec);
      if (std::find(nb.removable.begin(), nb.removable.end(), e) ==
          nb.removable.end()) {
        continue;
      }
      const std::optional<double> reverse = MarkedSetLogProb(
          DropEdge(nb.h, e), spec, nb.parts, chain.sampler, nb.near_marks);
      if (!reverse) continue;
      const double w_remove = w_edge / nb.removable.size();
      for (int f : nb.removable) {
        const WeightedTree h_prime = DropEdge(nb.h, f);
        const std::vector<int> next_edges = Swapped(s.edges, e, f);
        for (const auto& marks :
             EnumerateMarkedSets(h_prime, spec, nb.parts)) {
          const std::optional<double> forward =
              MarkedSetLogProb(h_prime, spec, nb.parts, chain.sampler, marks);
          if (!forward) continue;
          std::vector<int> next_marks = nb.far_marks;
          next_marks.insert(next_marks.end(), marks.begin(), marks.end());
          std::sort(next_marks.begin(), next_marks.end());
          const int j = Lookup(m, {next_edges, next_marks});
          if (j == i) continue;
          const double log_ratio =
              *reverse - *forward + log_target[j] - log_target[i];
          m.p(i, j) += w_remove * std::exp(*forward) *
                       std::min(1.0, std::exp(log_ratio));
        }
      }
    }
  }
  // Rejections, self-loops and identical proposals stay put.
  for (int i = 0; i < n; ++i) {
    m.p(i, i) = 0.0;
    m.p(i, i) = 1.0 - m.p.row(i).sum();
  }
  return m;
}

std::vector<std::vector<int>> CommunicatingClasses(const Eigen::MatrixXd& p) {
  const int n = static_cast<int>(p.rows());
  // Kosaraju: finish order on the forward graph, then sweep the reverse.
  std::vector<char> seen(n, 0);
  std::vector<int> finish;
  for (int s = 0; s < n; ++s) {
    if (seen[s]) continue;
    std::vector<std::pair<int, int>> stack = {{s, 0}};
    seen[s] = 1;
    while (!stack.empty()) {
      auto& [v, next] = stack.back();
      while (next < n && !(p(v, next) > 0.0 && !seen[next])) ++next;
      if (next == n) {
        finish.push_back(v);
        stack.pop_back();
        continue;
      }
      const int to = next++;
      seen[to] = 1;
      stack.push_back({to, 0});
    }
  }
  std::vector<int> comp(n, -1);
  std::vector<std::vector<int>> classes;
  for (auto it = finish.rbegin(); it != finish.rend(); ++it) {
    if (comp[*it] >= 0) continue;
    const int id = static_cast<int>(classes.size());
    classes.emplace_back();
    std::vector<int> stack = {*it};
    comp[*it] = id;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      classes[id].push_back(v);
      for (int u = 0; u < n; ++u) {
        if (p(u, v) > 0.0 && comp[u] < 0) {
          comp[u] = id;
          stack.push_back(u);
        }
      }
    }
  }
  for (auto& c : classes) std::sort(c.begin(), c.end());
  std::sort(classes.begin(), classes.end());
  return classes;
}

Stationary StationaryOnClass(const Eigen::MatrixXd& p,
                             const std::vector<int>& states) {
  const int n = static_cast<int>(states.size());
  if (n == 0) throw Error(ErrorKind::kInvalidArgument, "empty class");
  Eigen::MatrixXd q(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) q(a, b) = p(states[a], states[b]);
  }
  Eigen::MatrixXd system = q.transpose() - Eigen::MatrixXd::Identity(n, n);
  system.row(n - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;
  Stationary out;
  out.pi = system.fullPivLu().solve(rhs);
  for (int iter = 0; iter < 20; ++iter) {
    out.pi = (out.pi.transpose() * q).transpose();
    out.pi /= out.pi.sum();
  }
  out.residual =
      ((out.pi.transpose() * q).transpose() - out.pi).cwiseAbs().maxCoeff();
  return out;
}

}  // namespace bud
