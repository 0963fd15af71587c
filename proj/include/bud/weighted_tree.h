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

#ifndef BUD_WEIGHTED_TREE_H_
#define BUD_WEIGHTED_TREE_H_

#include <cstdint>
#include <span>
#include <vector>

#include "bud/spanning_tree.h"

namespace bud {

struct TreeArc {
  int to;
  int label;
};

// Standalone node-weighted tree used by the splittability DP and the
// marked-edge sampler. Nodes may stand for contracted groups of host
// vertices: `order_key` carries the sampler's leaf ordering and edge labels
// carry host edge ids.
class WeightedTree {
 public:
  int AddNode(std::int64_t weight, int order_key);
  int AddNode(std::int64_t weight) { return AddNode(weight, size()); }
  void AddEdge(int a, int b, int label = -1);

  int size() const { return static_cast<int>(weight_.size()); }
  int num_edges() const { return num_edges_; }
  std::int64_t weight(int v) const { return weight_[v]; }
  int order_key(int v) const { return order_key_[v]; }
  std::span<const TreeArc> arcs(int v) const { return adjacency_[v]; }
  int degree(int v) const { return static_cast<int>(adjacency_[v].size()); }
  std::int64_t total_weight() const;

  // (a, b, label) triples in insertion order.
  struct EdgeRecord {
    int a;
    int b;
    int label;
  };
  const std::vector<EdgeRecord>& edge_list() const { return edges_; }

  // True iff connected and acyclic.
  bool IsTree() const;

  // Path of unit weights 1..n etc. for tests and oracles.
  static WeightedTree Path(std::span<const std::int64_t> weights);

 private:
  std::vector<std::int64_t> weight_;
  std::vector<int> order_key_;
  std::vector<std::vector<TreeArc>> adjacency_;
  std::vector<EdgeRecord> edges_;
  int num_edges_ = 0;
};

// Host tree with populations as weights, vertex index as order key and host
// edge ids as labels.
WeightedTree FromSpanningTree(const SpanningTree& tree);

// Same for an arbitrary host edge set forming a spanning tree.
WeightedTree FromHostEdges(const WeightedGraph& graph,
                           std::span<const int> edge_ids);

}  // namespace bud

#endif  // BUD_WEIGHTED_TREE_H_
