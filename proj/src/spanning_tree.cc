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

#include "bud/spanning_tree.h"

#include <algorithm>
#include <deque>
#include <map>
#include <string>
#include <unordered_map>

#include "bud/error.h"

namespace bud {

SpanningTree::SpanningTree(const WeightedGraph& graph,
                           std::span<const int> edge_ids)
    : graph_(&graph),
      in_tree_(graph.num_edges(), 0),
      adjacency_(graph.num_vertices()) {
  if (static_cast<int>(edge_ids.size()) != graph.num_vertices() - 1) {
    throw Error(ErrorKind::kInvalidArgument,
                "a spanning tree needs |V| - 1 edges");
  }
  for (int e : edge_ids) {
    if (e < 0 || e >= graph.num_edges()) {
      throw Error(ErrorKind::kInvalidArgument, "tree edge not in host graph");
    }
    if (in_tree_[e]) {
      throw Error(ErrorKind::kInvalidArgument, "repeated tree edge");
    }
    in_tree_[e] = 1;
    const Edge& edge = graph.edge(e);
    adjacency_[edge.u].push_back({edge.v, e});
    adjacency_[edge.v].push_back({edge.u, e});
  }
  Rebuild();
}

void SpanningTree::Rebuild() {
  const int n = num_vertices();
  parent_.assign(n, -1);
  parent_edge_.assign(n, -1);
  depth_.assign(n, -1);
  std::vector<int> queue = {0};
  depth_[0] = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const int v = queue[head];
    for (const Arc& arc : adjacency_[v]) {
      if (depth_[arc.to] >= 0) continue;
      depth_[arc.to] = depth_[v] + 1;
      parent_[arc.to] = v;
      parent_edge_[arc.to] = arc.edge;
      queue.push_back(arc.to);
    }
  }
  if (static_cast<int>(queue.size()) != n) {
    throw Error(ErrorKind::kInvalidArgument, "edge set is not a spanning tree");
  }
}

std::vector<int> SpanningTree::Edges() const {
  std::vector<int> out;
  out.reserve(num_vertices() - 1);
  for (int e = 0; e < graph_->num_edges(); ++e) {
    if (in_tree_[e]) out.push_back(e);
  }
  return out;
}

std::vector<int> SpanningTree::NonTreeEdges() const {
  std::vector<int> out;
  out.reserve(num_non_tree_edges());
  for (int e = 0; e < graph_->num_edges(); ++e) {
    if (!in_tree_[e]) out.push_back(e);
  }
  return out;
}

void SpanningTree::RemoveArc(int v, int edge) {
  auto& arcs = adjacency_[v];
  auto it = std::find_if(arcs.begin(), arcs.end(),
                         [edge](const Arc& a) { return a.edge == edge; });
  *it = arcs.back();
  arcs.pop_back();
}

bool SpanningTree::InSubtree(int v, int subtree_root) const {
  while (depth_[v] > depth_[subtree_root]) v = parent_[v];
  return v == subtree_root;
}

void SpanningTree::RefreshDepths(int start) {
  std::vector<int> stack = {start};
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    depth_[v] = depth_[parent_[v]] + 1;
    for (const Arc& arc : adjacency_[v]) {
      if (arc.to != parent_[v]) stack.push_back(arc.to);
    }
  }
}

void SpanningTree::Exchange(int add_edge, int remove_edge) {
  if (add_edge == remove_edge) return;
  if (in_tree_[add_edge] || !in_tree_[remove_edge]) {
    throw Error(ErrorKind::kInvalidArgument,
                "exchange needs a non-tree edge and a tree edge");
  }
  const Edge& removed = graph_->edge(remove_edge);
  const int child = parent_[removed.v] == removed.u ? removed.v : removed.u;
  const Edge& added = graph_->edge(add_edge);
  const bool u_inside = InSubtree(added.u, child);
  if (u_inside == InSubtree(added.v, child)) {
    throw Error(ErrorKind::kInvalidArgument,
                "removed edge is not on the added edge's cycle");
  }
  const int inside = u_inside ? added.u : added.v;
  const int outside = added.Other(inside);

  // Reverse parent pointers along inside -> child, hanging the detached
  // subtree from `outside` through the added edge.
  int prev = outside;
  int prev_edge = add_edge;
  int cur = inside;
  while (true) {
    const int next = parent_[cur];
    const int next_edge = parent_edge_[cur];
    parent_[cur] = prev;
    parent_edge_[cur] = prev_edge;
    if (cur == child) break;
    prev = cur;
    prev_edge = next_edge;
    cur = next;
  }
  RemoveArc(removed.u, remove_edge);
  RemoveArc(removed.v, remove_edge);
  adjacency_[added.u].push_back({added.v, add_edge});
  adjacency_[added.v].push_back({added.u, add_edge});
  in_tree_[remove_edge] = 0;
  in_tree_[add_edge] = 1;
  RefreshDepths(inside);
}

void SpanningTree::CheckInvariants() const {
  const int n = num_vertices();
  int count = 0;
  for (int e = 0; e < graph_->num_edges(); ++e) count += in_tree_[e];
  if (count != n - 1) {
    throw Error(ErrorKind::kInvalidArgument, "tree edge count mismatch");
  }
  if (parent_[0] != -1 || depth_[0] != 0) {
    throw Error(ErrorKind::kInvalidArgument, "root bookkeeping corrupt");
  }
  for (int v = 1; v < n; ++v) {
    const int e = parent_edge_[v];
    if (e < 0 || !in_tree_[e] || graph_->edge(e).Other(v) != parent_[v] ||
        depth_[v] != depth_[parent_[v]] + 1) {
      throw Error(ErrorKind::kInvalidArgument,
                  "parent array disagrees with edge set at vertex " +
                      std::to_string(v));
    }
  }
  int arcs = 0;
  for (int v = 0; v < n; ++v) {
    for (const Arc& arc : adjacency_[v]) {
      if (!in_tree_[arc.edge] || graph_->edge(arc.edge).Other(v) != arc.to) {
        throw Error(ErrorKind::kInvalidArgument, "adjacency corrupt");
      }
      ++arcs;
    }
  }
  if (arcs != 2 * (n - 1)) {
    throw Error(ErrorKind::kInvalidArgument, "adjacency size mismatch");
  }
}

std::vector<int> WilsonTreeEdges(const WeightedGraph& graph,
                                 std::span<const int> members, Rng& rng) {
  const int n = static_cast<int>(members.size());
  if (n == 0) throw Error(ErrorKind::kInvalidArgument, "empty vertex set");
  std::unordered_map<int, int> local;
  local.reserve(n);
  for (int i = 0; i < n; ++i) local.emplace(members[i], i);
  std::vector<std::vector<Arc>> adj(n);
  for (int i = 0; i < n; ++i) {
    for (const Arc& arc : graph.neighbors(members[i])) {
      auto it = local.find(arc.to);
      if (it != local.end()) adj[i].push_back({it->second, arc.edge});
    }
  }
  if (!InducedConnected(graph, members)) {
    throw Error(ErrorKind::kDisconnected, "graph is not connected");
  }
  std::vector<char> in_tree(n, 0);
  std::vector<int> next(n, -1);
  std::vector<int> next_edge(n, -1);
  in_tree[0] = 1;
  std::vector<int> edges;
  edges.reserve(n - 1);
  for (int start = 1; start < n; ++start) {
    // Random walk until the tree is hit; overwriting `next` erases loops.
    int v = start;
    while (!in_tree[v]) {
      const Arc& arc = adj[v][rng.Index(adj[v].size())];
      next[v] = arc.to;
      next_edge[v] = arc.edge;
      v = arc.to;
    }
    for (v = start; !in_tree[v]; v = next[v]) {
      in_tree[v] = 1;
      edges.push_back(next_edge[v]);
    }
  }
  return edges;
}

SpanningTree WilsonUniformSpanningTree(const WeightedGraph& graph, Rng& rng) {
  std::vector<int> all(graph.num_vertices());
  for (int v = 0; v < graph.num_vertices(); ++v) all[v] = v;
  const std::vector<int> edges = WilsonTreeEdges(graph, all, rng);
  return SpanningTree(graph, edges);
}

Cycle FundamentalCycle(const SpanningTree& tree, int edge) {
  const WeightedGraph& graph = tree.graph();
  if (edge < 0 || edge >= graph.num_edges()) {
    throw Error(ErrorKind::kInvalidArgument, "edge not in host graph");
  }
  if (tree.Contains(edge)) {
    throw Error(ErrorKind::kInvalidArgument, "edge already in tree");
  }
  const Edge& e = graph.edge(edge);
  int a = e.u;
  int b = e.v;
  std::vector<int> a_vertices, a_edges, b_vertices, b_edges;
  while (tree.depth(a) > tree.depth(b)) {
    a_vertices.push_back(a);
    a_edges.push_back(tree.parent_edge(a));
    a = tree.parent(a);
  }
  while (tree.depth(b) > tree.depth(a)) {
    b_vertices.push_back(b);
    b_edges.push_back(tree.parent_edge(b));
    b = tree.parent(b);
  }
  while (a != b) {
    a_vertices.push_back(a);
    a_edges.push_back(tree.parent_edge(a));
    a = tree.parent(a);
    b_vertices.push_back(b);
    b_edges.push_back(tree.parent_edge(b));
    b = tree.parent(b);
  }
  Cycle cycle;
  cycle.vertices = std::move(a_vertices);
  cycle.vertices.push_back(a);
  cycle.vertices.insert(cycle.vertices.end(), b_vertices.rbegin(),
                        b_vertices.rend());
  cycle.edges = std::move(a_edges);
  cycle.edges.insert(cycle.edges.end(), b_edges.rbegin(), b_edges.rend());
  cycle.edges.push_back(edge);
  return cycle;
}

namespace {

// Farthest vertex from `start` and its distance.
std::pair<int, int> Farthest(const SpanningTree& tree, int start) {
  std::vector<int> dist(tree.num_vertices(), -1);
  std::vector<int> queue = {start};
  dist[start] = 0;
  int best = start;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const int v = queue[head];
    if (dist[v] > dist[best]) best = v;
    for (const Arc& arc : tree.neighbors(v)) {
      if (dist[arc.to] < 0) {
        dist[arc.to] = dist[v] + 1;
        queue.push_back(arc.to);
      }
    }
  }
  return {best, dist[best]};
}

}  // namespace

int TreeDiameter(const SpanningTree& tree) {
  const auto [end, unused] = Farthest(tree, 0);
  return Farthest(tree, end).second;
}

EdgeSwap UpDownStep(SpanningTree& tree, Rng& rng) {
  if (tree.num_non_tree_edges() == 0) {
    throw Error(ErrorKind::kInvalidArgument,
                "graph is a tree: no non-tree edges to add");
  }
  const std::vector<int> candidates = tree.NonTreeEdges();
  const int added = candidates[rng.Index(candidates.size())];
  const Cycle cycle = FundamentalCycle(tree, added);
  const int removed = cycle.edges[rng.Index(cycle.edges.size())];
  tree.Exchange(added, removed);
  return {added, removed};
}

namespace {

// Dense index of each representative, after checking class connectivity.
std::map<int, int> ClassIndex(const WeightedGraph& graph,
                              std::span<const int> rep) {
  if (static_cast<int>(rep.size()) != graph.num_vertices()) {
    throw Error(ErrorKind::kInvalidArgument, "mapping must cover every vertex");
  }
  std::map<int, std::vector<int>> classes;
  for (int v = 0; v < graph.num_vertices(); ++v) {
    if (rep[v] < 0 || rep[v] >= graph.num_vertices() || rep[rep[v]] != rep[v]) {
      throw Error(ErrorKind::kInvalidArgument,
                  "mapping target is not a representative");
    }
    classes[rep[v]].push_back(v);
  }
  std::map<int, int> index;
  for (const auto& [r, members] : classes) {
    if (!InducedConnected(graph, members)) {
      throw Error(ErrorKind::kDisconnected,
                  "class of '" + graph.id(r) + "' is disconnected");
    }
    const int next = static_cast<int>(index.size());
    index.emplace(r, next);
  }
  return index;
}

}  // namespace

WeightedGraph Contract(const WeightedGraph& graph, std::span<const int> rep) {
  const std::map<int, int> index = ClassIndex(graph, rep);
  std::vector<std::int64_t> pops(index.size(), 0);
  for (int v = 0; v < graph.num_vertices(); ++v) {
    pops[index.at(rep[v])] += graph.population(v);
  }
  WeightedGraph out;
  for (const auto& [r, i] : index) {
    out.AddVertex(graph.id(r), pops[i], graph.attrs(r));
  }
  for (const Edge& e : graph.edges()) {
    const int a = index.at(rep[e.u]);
    const int b = index.at(rep[e.v]);
    if (a != b && !out.FindEdge(a, b)) out.AddEdge(a, b);
  }
  return out;
}

Multigraph ContractMulti(const WeightedGraph& graph, std::span<const int> rep) {
  const std::map<int, int> index = ClassIndex(graph, rep);
  const int n = static_cast<int>(index.size());
  Multigraph out;
  out.population.assign(n, 0);
  out.multiplicity.assign(n, std::vector<std::int64_t>(n, 0));
  for (int v = 0; v < graph.num_vertices(); ++v) {
    out.population[index.at(rep[v])] += graph.population(v);
  }
  for (const Edge& e : graph.edges()) {
    const int a = index.at(rep[e.u]);
    const int b = index.at(rep[e.v]);
    if (a != b) {
      ++out.multiplicity[a][b];
      ++out.multiplicity[b][a];
    }
  }
  return out;
}

WeightedGraph TreeAsGraph(const SpanningTree& tree) {
  const WeightedGraph& host = tree.graph();
  WeightedGraph out;
  for (int v = 0; v < host.num_vertices(); ++v) {
    out.AddVertex(host.id(v), host.population(v), host.attrs(v));
  }
  for (int e : tree.Edges()) out.AddEdge(host.edge(e).u, host.edge(e).v);
  return out;
}

}  // namespace bud
