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

#include "bud/weighted_tree.h"

#include "bud/error.h"

namespace bud {

int WeightedTree::AddNode(std::int64_t weight, int order_key) {
  if (weight < 0) {
    throw Error(ErrorKind::kInvalidArgument, "negative node weight");
  }
  weight_.push_back(weight);
  order_key_.push_back(order_key);
  adjacency_.emplace_back();
  return size() - 1;
}

void WeightedTree::AddEdge(int a, int b, int label) {
  if (a == b || a < 0 || b < 0 || a >= size() || b >= size()) {
    throw Error(ErrorKind::kInvalidArgument, "bad tree edge endpoints");
  }
  adjacency_[a].push_back({b, label});
  adjacency_[b].push_back({a, label});
  edges_.push_back({a, b, label});
  ++num_edges_;
}

std::int64_t WeightedTree::total_weight() const {
  std::int64_t total = 0;
  for (std::int64_t w : weight_) total += w;
  return total;
}

bool WeightedTree::IsTree() const {
  if (size() == 0 || num_edges_ != size() - 1) return false;
  std::vector<char> seen(size(), 0);
  std::vector<int> stack = {0};
  seen[0] = 1;
  int reached = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (const TreeArc& arc : adjacency_[v]) {
      if (!seen[arc.to]) {
        seen[arc.to] = 1;
        ++reached;
        stack.push_back(arc.to);
      }
    }
  }
  return reached == size();
}

WeightedTree WeightedTree::Path(std::span<const std::int64_t> weights) {
  WeightedTree t;
  for (std::int64_t w : weights) t.AddNode(w);
  for (int i = 0; i + 1 < t.size(); ++i) t.AddEdge(i, i + 1, i);
  return t;
}

WeightedTree FromHostEdges(const WeightedGraph& graph,
                           std::span<const int> edge_ids) {
  WeightedTree t;
  for (int v = 0; v < graph.num_vertices(); ++v) {
    t.AddNode(graph.population(v), v);
  }
  for (int e : edge_ids) t.AddEdge(graph.edge(e).u, graph.edge(e).v, e);
  return t;
}

WeightedTree FromSpanningTree(const SpanningTree& tree) {
  return FromHostEdges(tree.graph(), tree.Edges());
}

}  // namespace bud
