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

#ifndef BUD_TESTS_TEST_UTIL_H_
#define BUD_TESTS_TEST_UTIL_H_

#include <cstdint>
#include <functional>
#include <numeric>
#include <vector>

#include "bud/graph.h"
#include "bud/weighted_tree.h"

namespace bud::testing {

class Dsu {
 public:
  explicit Dsu(int n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }
  int Find(int x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  bool Unite(int a, int b) {
    a = Find(a);
    b = Find(b);
    if (a == b) return false;
    parent_[a] = b;
    return true;
  }

 private:
  std::vector<int> parent_;
};

// Calls `visit` with every (n-1)-subset of edges that is a spanning tree.
inline void ForEachSpanningTree(
    const WeightedGraph& graph,
    const std::function<void(const std::vector<int>&)>& visit) {
  const int n = graph.num_vertices();
  const int m = graph.num_edges();
  std::vector<int> chosen;
  std::function<void(int)> rec = [&](int next) {
    if (static_cast<int>(chosen.size()) == n - 1) {
      Dsu dsu(n);
      for (int e : chosen) {
        if (!dsu.Unite(graph.edge(e).u, graph.edge(e).v)) return;
      }
      visit(chosen);
      return;
    }
    if (m - next < n - 1 - static_cast<int>(chosen.size())) return;
    for (int e = next; e < m; ++e) {
      chosen.push_back(e);
      rec(e + 1);
      chosen.pop_back();
    }
  };
  rec(0);
}

inline std::int64_t BruteSpanningTreeCount(const WeightedGraph& graph) {
  std::int64_t count = 0;
  testing::ForEachSpanningTree(graph, [&](const std::vector<int>&) { ++count; });
  return count;
}

// Component weights of `tree` after deleting the edges at the given
// positions of edge_list().
inline std::vector<std::int64_t> PieceWeights(const WeightedTree& tree,
                                              const std::vector<int>& cut) {
  Dsu dsu(tree.size());
  std::vector<char> removed(tree.num_edges(), 0);
  for (int i : cut) removed[i] = 1;
  for (int i = 0; i < tree.num_edges(); ++i) {
    if (!removed[i]) dsu.Unite(tree.edge_list()[i].a, tree.edge_list()[i].b);
  }
  std::vector<std::int64_t> sum(tree.size(), 0);
  for (int v = 0; v < tree.size(); ++v) sum[dsu.Find(v)] += tree.weight(v);
  std::vector<std::int64_t> out;
  for (int v = 0; v < tree.size(); ++v) {
    if (dsu.Find(v) == v) out.push_back(sum[v]);
  }
  return out;
}

// Random labelled tree on n nodes with weights drawn from [lo, hi].
template <typename Rng>
WeightedTree RandomTree(int n, std::int64_t lo, std::int64_t hi, Rng& rng) {
  WeightedTree tree;
  for (int v = 0; v < n; ++v) {
    tree.AddNode(lo + static_cast<std::int64_t>(rng.Index(hi - lo + 1)));
  }
  for (int v = 1; v < n; ++v) {
    tree.AddEdge(static_cast<int>(rng.Index(v)), v, v - 1);
  }
  return tree;
}

}  // namespace bud::testing

#endif  // BUD_TESTS_TEST_UTIL_H_
