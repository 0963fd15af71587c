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

#ifndef BUD_SPANNING_TREE_H_
#define BUD_SPANNING_TREE_H_

#include <span>
#include <vector>

#include "bud/graph.h"
#include "bud/rng.h"

namespace bud {

// Unique cycle of T + e. vertices[i] and vertices[i + 1] (cyclically) are
// joined by edges[i]; the last edge is the added non-tree edge.
struct Cycle {
  std::vector<int> vertices;
  std::vector<int> edges;

  int length() const { return static_cast<int>(edges.size()); }
};

// Spanning tree of a host graph, rooted at vertex 0. The host graph must
// outlive the tree. Parent pointers and depths are maintained under edge
// exchanges by re-rooting only the detached subtree.
class SpanningTree {
 public:
  SpanningTree(const WeightedGraph& graph, std::span<const int> edge_ids);

  const WeightedGraph& graph() const { return *graph_; }
  int num_vertices() const { return graph_->num_vertices(); }
  bool Contains(int edge) const { return in_tree_[edge] != 0; }

  // Sorted host edge ids.
  std::vector<int> Edges() const;
  std::vector<int> NonTreeEdges() const;
  int num_non_tree_edges() const {
    return graph_->num_edges() - (num_vertices() - 1);
  }

  int parent(int v) const { return parent_[v]; }
  int parent_edge(int v) const { return parent_edge_[v]; }
  int depth(int v) const { return depth_[v]; }
  std::span<const Arc> neighbors(int v) const { return adjacency_[v]; }
  int degree(int v) const { return static_cast<int>(adjacency_[v].size()); }

  // Replaces `remove_edge` by `add_edge`. A no-op when they coincide.
  // `remove_edge` must lie on the fundamental cycle of `add_edge`.
  void Exchange(int add_edge, int remove_edge);

  // Full consistency check; throws Error(kInvalidArgument) on violation.
  void CheckInvariants() const;

  friend bool operator==(const SpanningTree& a, const SpanningTree& b) {
    return a.graph_ == b.graph_ && a.in_tree_ == b.in_tree_;
  }

 private:
  void Rebuild();
  void RefreshDepths(int start);
  void RemoveArc(int v, int edge);
  bool InSubtree(int v, int subtree_root) const;

  const WeightedGraph* graph_;
  std::vector<char> in_tree_;
  std::vector<std::vector<Arc>> adjacency_;
  std::vector<int> parent_;
  std::vector<int> parent_edge_;
  std::vector<int> depth_;
};

// Uniform spanning tree by loop-erased random walks (Wilson's algorithm).
SpanningTree WilsonUniformSpanningTree(const WeightedGraph& graph, Rng& rng);

// Host edge ids of a uniform spanning tree of the subgraph induced by
// `members`, which must be connected.
std::vector<int> WilsonTreeEdges(const WeightedGraph& graph,
                                 std::span<const int> members, Rng& rng);

Cycle FundamentalCycle(const SpanningTree& tree, int edge);

// Longest path length in edges (double breadth-first sweep).
int TreeDiameter(const SpanningTree& tree);

struct EdgeSwap {
  int added;
  int removed;
};

// One step of the unrestricted up-down walk: add a uniform non-tree edge and
// drop a uniform edge of the resulting cycle.
EdgeSwap UpDownStep(SpanningTree& tree, Rng& rng);

// Contraction by a representative map (rep[v] is the representative of v's
// class; rep[rep[v]] == rep[v]). Classes must be connected in the input.
// Output vertices are the representatives in index order, with summed
// populations; self-loops are dropped.
WeightedGraph Contract(const WeightedGraph& graph, std::span<const int> rep);
Multigraph ContractMulti(const WeightedGraph& graph, std::span<const int> rep);

// The tree's own edges as a standalone graph.
WeightedGraph TreeAsGraph(const SpanningTree& tree);

}  // namespace bud

#endif  // BUD_SPANNING_TREE_H_
