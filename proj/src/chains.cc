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

#include "bud/chains.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <utility>

#include <boost/container_hash/hash.hpp>

#include "bud/diagnostics.h"
#include "bud/error.h"
#include "bud/matrix_tree.h"
#include "bud/splittability.h"

namespace bud {

std::string MeasureName(MeasureKind kind) {
  switch (kind) {
    case MeasureKind::kUniformSplittableTrees:
      return "uniform-splittable";
    case MeasureKind::kUniformForests:
      return "uniform-forest";
    case MeasureKind::kUniformPartitions:
      return "uniform-partition";
    case MeasureKind::kCustom:
      return "custom";
  }
  return "";
}

std::optional<MeasureKind> ParseMeasureKind(const std::string& name) {
  for (MeasureKind k :
       {MeasureKind::kUniformSplittableTrees, MeasureKind::kUniformForests,
        MeasureKind::kUniformPartitions, MeasureKind::kCustom}) {
    if (MeasureName(k) == name) return k;
  }
  return std::nullopt;
}

MeasureSpec CutEdgeMeasure(double beta) {
  MeasureSpec m;
  m.kind = MeasureKind::kCustom;
  m.log_weight = [beta](const WeightedGraph& graph, const Partition& p) {
    return -beta * static_cast<double>(CutEdges(graph, p));
  };
  return m;
}

std::size_t LogTarget::VectorHash::operator()(const std::vector<int>& v) const {
  return boost::hash_range(v.begin(), v.end());
}

LogTarget::LogTarget(const WeightedGraph& graph, MeasureSpec measure)
    : graph_(graph), measure_(std::move(measure)) {
  if (measure_.kind == MeasureKind::kCustom && !measure_.log_weight) {
    throw Error(ErrorKind::kInvalidArgument,
                "custom measure needs a log-weight function");
  }
}

double LogTarget::LogDistrictTrees(const std::vector<int>& members) {
  auto it = district_cache_.find(members);
  if (it != district_cache_.end()) return it->second;
  const double value = Log(CountSpanningTrees(graph_, members));
  district_cache_.emplace(members, value);
  return value;
}

double LogTarget::operator()(const Partition& partition) {
  if (measure_.kind == MeasureKind::kUniformSplittableTrees) return 0.0;
  double log_weight = -Log(CountSpanningTrees(Quotient(graph_, partition)));
  if (measure_.kind == MeasureKind::kUniformForests) return log_weight;
  std::vector<std::vector<int>> members(partition.k);
  for (int v = 0; v < graph_.num_vertices(); ++v) {
    members[partition.assignment[v]].push_back(v);
  }
  for (const auto& m : members) log_weight -= LogDistrictTrees(m);
  if (measure_.kind == MeasureKind::kCustom) {
    log_weight += measure_.log_weight(graph_, partition);
  }
  return log_weight;
}

std::vector<int> RemovableEdges(const SpanningTree& tree, int added,
                                const BalanceSpec& spec, int parts) {
  if (tree.Contains(added)) {
    throw Error(ErrorKind::kInvalidArgument, "added edge is already a tree edge");
  }
  const Cycle cycle = FundamentalCycle(tree, added);
  std::vector<int> edges = tree.Edges();
  edges.push_back(added);
  std::vector<int> out;
  std::vector<int> trial;
  for (int f : cycle.edges) {
    if (f == added) {
      out.push_back(f);
      continue;
    }
    trial.clear();
    for (int e : edges) {
      if (e != f) trial.push_back(e);
    }
    if (IsSplittable(FromHostEdges(tree.graph(), trial), spec, parts)) {
      out.push_back(f);
    }
  }
  return out;
}

EdgeSwap BudStep(SpanningTree& tree, const BalanceSpec& spec, int parts,
                 Rng& rng) {
  if (tree.num_non_tree_edges() == 0) {
    throw Error(ErrorKind::kInvalidArgument,
                "graph is a tree: no non-tree edges to add");
  }
  const std::vector<int> candidates = tree.NonTreeEdges();
  const int added = candidates[rng.Index(candidates.size())];
  const std::vector<int> removable = RemovableEdges(tree, added, spec, parts);
  const int removed = removable[rng.Index(removable.size())];
  tree.Exchange(added, removed);
  return {added, removed};
}

WeightedTree DropEdge(const WeightedTree& graph, int label) {
  WeightedTree out;
  for (int v = 0; v < graph.size(); ++v) {
    out.AddNode(graph.weight(v), graph.order_key(v));
  }
  for (const auto& e : graph.edge_list()) {
    if (e.label != label) out.AddEdge(e.a, e.b, e.label);
  }
  return out;
}

Neighborhood BuildNeighborhood(const MarkedTree& state, int added, int d,
                               const BalanceSpec& spec) {
  if (d < 0) throw Error(ErrorKind::kInvalidArgument, "distance must be >= 0");
  const SpanningTree& tree = state.tree();
  const WeightedGraph& graph = tree.graph();
  const int n = graph.num_vertices();
  Neighborhood nb;
  nb.added = added;
  nb.cycle = FundamentalCycle(tree, added);

  std::vector<int> dist(n, -1);
  std::vector<int> toward(n, -1);
  std::deque<int> queue;
  for (int v : nb.cycle.vertices) {
    dist[v] = 0;
    queue.push_back(v);
  }
  std::vector<int> order;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    order.push_back(v);
    for (const Arc& arc : tree.neighbors(v)) {
      if (dist[arc.to] >= 0) continue;
      dist[arc.to] = dist[v] + 1;
      toward[arc.to] = v;
      queue.push_back(arc.to);
    }
  }
  std::vector<char> far(graph.num_edges(), 0);
  for (int m : state.marked()) {
    const Edge& e = graph.edge(m);
    if (dist[e.u] <= d && dist[e.v] <= d) {
      nb.near_marks.push_back(m);
    } else {
      nb.far_marks.push_back(m);
      far[m] = 1;
    }
  }
  nb.parts = static_cast<int>(nb.near_marks.size()) + 1;

  // Vertices still attached to the cycle once far marks are cut. In BFS
  // order each vertex hangs off `toward`, so membership propagates outward.
  std::vector<char> inside(n, 0);
  std::vector<int> rep(n, -1);
  for (int v : order) {
    if (dist[v] == 0) {
      inside[v] = 1;
    } else {
      const int up = toward[v];
      int edge = -1;
      for (const Arc& arc : tree.neighbors(v)) {
        if (arc.to == up) edge = arc.edge;
      }
      inside[v] = inside[up] && !far[edge];
    }
    if (inside[v]) rep[v] = dist[v] <= d ? v : rep[toward[v]];
  }
  std::vector<int> node(n, -1);
  std::vector<std::int64_t> weight(n, 0);
  for (int v = 0; v < n; ++v) {
    if (inside[v]) weight[rep[v]] += graph.population(v);
  }
  for (int v = 0; v < n; ++v) {
    if (inside[v] && rep[v] == v) node[v] = nb.h.AddNode(weight[v], v);
  }
  for (int e : tree.Edges()) {
    const Edge& edge = graph.edge(e);
    if (node[edge.u] >= 0 && node[edge.v] >= 0) {
      nb.h.AddEdge(node[edge.u], node[edge.v], e);
    }
  }
  const Edge& extra = graph.edge(added);
  nb.h.AddEdge(node[extra.u], node[extra.v], added);

  for (int f : nb.cycle.edges) {
    if (IsSplittable(DropEdge(nb.h, f), spec, nb.parts)) {
      nb.removable.push_back(f);
    }
  }
  return nb;
}

namespace {

ProposalOutcome SelfLoop(const MarkedTree& current, ProposalOutcome out,
                         std::string reason) {
  out.proposed = current;
  out.self_loop = true;
  out.reason = std::move(reason);
  out.forward_log_prob = 0.0;
  out.reverse_log_prob = 0.0;
  return out;
}

}  // namespace

ProposalOutcome RestrictedBudPropose(const MarkedTree& current, int d,
                                     const SamplerConfig& config,
                                     const BalanceSpec& spec, Rng& rng) {
  const SpanningTree& tree = current.tree();
  if (tree.num_non_tree_edges() == 0) {
    throw Error(ErrorKind::kInvalidArgument,
                "graph is a tree: no non-tree edges to add");
  }
  ProposalOutcome out;
  const std::vector<int> candidates = tree.NonTreeEdges();
  out.added = candidates[rng.Index(candidates.size())];
  const Edge& e = tree.graph().edge(out.added);
  out.internal = current.partition().assignment[e.u] ==
                 current.partition().assignment[e.v];

  const Neighborhood nb = BuildNeighborhood(current, out.added, d, spec);
  if (std::find(nb.removable.begin(), nb.removable.end(), out.added) ==
      nb.removable.end()) {
    return SelfLoop(current, std::move(out), "current tree not removable");
  }
  out.removed = nb.removable[rng.Index(nb.removable.size())];

  MarkedSelection selection;
  try {
    selection = SelectMarkedTree(DropEdge(nb.h, out.removed), spec, nb.parts,
                                 config, rng);
  } catch (const Error& err) {
    return SelfLoop(current, std::move(out), err.what());
  }
  const std::optional<double> reverse = MarkedSetLogProb(
      DropEdge(nb.h, out.added), spec, nb.parts, config, nb.near_marks);
  if (!reverse) {
    return SelfLoop(current, std::move(out), "current marks not reproducible");
  }
  out.forward_log_prob = selection.log_prob;
  out.reverse_log_prob = *reverse;

  SpanningTree next = tree;
  next.Exchange(out.added, out.removed);
  std::vector<int> marks = nb.far_marks;
  marks.insert(marks.end(), selection.labels.begin(), selection.labels.end());
  try {
    out.proposed.emplace(std::move(next), std::move(marks), spec);
  } catch (const Error& err) {
    return SelfLoop(current, std::move(out), err.what());
  }
  return out;
}

double MhLogRatio(const ProposalOutcome& proposal, double log_target_current,
                  double log_target_proposed) {
  return proposal.reverse_log_prob - proposal.forward_log_prob +
         log_target_proposed - log_target_current;
}

StepOutcome MhStep(MarkedTree& state, LogTarget& target, int d,
                   const SamplerConfig& config, const BalanceSpec& spec,
                   Rng& rng) {
  ProposalOutcome p = RestrictedBudPropose(state, d, config, spec, rng);
  StepOutcome out;
  out.internal = p.internal;
  if (p.self_loop) {
    out.self_loop = true;
    return out;
  }
  if (*p.proposed == state) {
    out.accepted = true;
    return out;
  }
  const double log_ratio = MhLogRatio(p, target(state), target(*p.proposed));
  if (log_ratio >= 0.0 || std::log(rng.Uniform()) < log_ratio) {
    state = std::move(*p.proposed);
    out.accepted = true;
  }
  return out;
}

namespace {

struct Splitter {
  const WeightedGraph& graph;
  std::int64_t scale;
  std::int64_t lower;
  std::int64_t upper;
  std::int64_t max_attempts;
  std::int64_t attempts = 0;
  Rng& rng;

  std::int64_t Weight(const std::vector<int>& members) const {
    std::int64_t w = 0;
    for (int v : members) w += graph.population(v);
    return CheckedMul(w, scale);
  }

  bool Fits(std::int64_t w, int m) const {
    return static_cast<__int128>(m) * lower <= w &&
           w <= static_cast<__int128>(m) * upper;
  }

  // Splits `members` into m districts appended to `out`.
  bool Split(const std::vector<int>& members, int m,
             std::vector<std::vector<int>>* out) {
    const std::int64_t total = Weight(members);
    if (m == 1) {
      if (!Fits(total, 1)) return false;
      out->push_back(members);
      return true;
    }
    if (!Fits(total, m) || static_cast<int>(members.size()) < m) return false;
    for (int local_try = 0; local_try < 25; ++local_try) {
      if (++attempts > max_attempts) return false;
      const std::vector<int> edges = WilsonTreeEdges(graph, members, rng);
      // Root the region tree at members[0].
      std::vector<std::vector<int>> adj(graph.num_vertices());
      for (int e : edges) {
        adj[graph.edge(e).u].push_back(graph.edge(e).v);
        adj[graph.edge(e).v].push_back(graph.edge(e).u);
      }
      std::vector<int> order = {members[0]};
      std::vector<int> parent(graph.num_vertices(), -2);
      parent[members[0]] = -1;
      for (std::size_t i = 0; i < order.size(); ++i) {
        for (int to : adj[order[i]]) {
          if (parent[to] != -2) continue;
          parent[to] = order[i];
          order.push_back(to);
        }
      }
      std::vector<std::int64_t> sub(graph.num_vertices(), 0);
      for (auto it = order.rbegin(); it != order.rend(); ++it) {
        sub[*it] += CheckedMul(graph.population(*it), scale);
        if (parent[*it] >= 0) sub[parent[*it]] += sub[*it];
      }
      std::vector<std::pair<int, int>> cuts;
      for (std::size_t i = 1; i < order.size(); ++i) {
        const int c = order[i];
        for (int a = 1; a < m; ++a) {
          if (Fits(sub[c], a) && Fits(total - sub[c], m - a)) {
            cuts.emplace_back(c, a);
          }
        }
      }
      if (cuts.empty()) continue;
      const auto [c, a] = cuts[rng.Index(cuts.size())];
      std::vector<char> below(graph.num_vertices(), 0);
      below[c] = 1;
      for (int v : order) {
        if (parent[v] >= 0 && below[parent[v]]) below[v] = 1;
      }
      std::vector<int> side;
      std::vector<int> rest;
      for (int v : members) (below[v] ? side : rest).push_back(v);
      const std::size_t mark = out->size();
      if (Split(side, a, out) && Split(rest, m - a, out)) return true;
      out->resize(mark);
      if (attempts > max_attempts) return false;
    }
    return false;
  }
};

void CheckInitArgs(const WeightedGraph& graph, const BalanceSpec& spec) {
  spec.CheckAgainst(graph.total_population());
  if (spec.k() > graph.num_vertices()) {
    throw Error(ErrorKind::kGiveUp,
                "cannot place " + std::to_string(spec.k()) + " districts on " +
                    std::to_string(graph.num_vertices()) + " vertices");
  }
}

std::string GiveUpMessage(std::int64_t budget) {
  return "no balanced initial state found within " + std::to_string(budget) +
         " attempts";
}

MarkedTree BisectionState(const WeightedGraph& graph, const BalanceSpec& spec,
                          const InitOptions& options, Rng& rng) {
  const BalanceSpec::Scaled sc = spec.scaled();
  Splitter splitter{graph, sc.scale, sc.lower, sc.upper, options.max_attempts,
                    0, rng};
  std::vector<int> all(graph.num_vertices());
  for (int v = 0; v < graph.num_vertices(); ++v) all[v] = v;
  std::vector<std::vector<int>> districts;
  while (!splitter.Split(all, spec.k(), &districts)) {
    districts.clear();
    if (splitter.attempts >= options.max_attempts) {
      throw Error(ErrorKind::kGiveUp, GiveUpMessage(options.max_attempts));
    }
  }
  Partition partition;
  partition.k = spec.k();
  partition.assignment.assign(graph.num_vertices(), -1);
  std::vector<int> edges;
  for (int d = 0; d < partition.k; ++d) {
    for (int v : districts[d]) partition.assignment[v] = d;
    const std::vector<int> local = WilsonTreeEdges(graph, districts[d], rng);
    edges.insert(edges.end(), local.begin(), local.end());
  }
  std::vector<int> crossing;
  for (int e = 0; e < graph.num_edges(); ++e) {
    if (partition.assignment[graph.edge(e).u] !=
        partition.assignment[graph.edge(e).v]) {
      crossing.push_back(e);
    }
  }
  for (std::size_t i = crossing.size(); i > 1; --i) {
    std::swap(crossing[i - 1], crossing[rng.Index(i)]);
  }
  std::vector<int> root(partition.k);
  for (int d = 0; d < partition.k; ++d) root[d] = d;
  auto find = [&](int x) {
    while (root[x] != x) x = root[x] = root[root[x]];
    return x;
  };
  std::vector<int> marks;
  for (int e : crossing) {
    const int a = find(partition.assignment[graph.edge(e).u]);
    const int b = find(partition.assignment[graph.edge(e).v]);
    if (a == b) continue;
    root[a] = b;
    marks.push_back(e);
  }
  edges.insert(edges.end(), marks.begin(), marks.end());
  return MarkedTree(SpanningTree(graph, edges), std::move(marks), spec);
}

SpanningTree RejectionTree(const WeightedGraph& graph, const BalanceSpec& spec,
                           const InitOptions& options, Rng& rng) {
  for (std::int64_t attempt = 0; attempt < options.max_attempts; ++attempt) {
    SpanningTree tree = WilsonUniformSpanningTree(graph, rng);
    if (IsSplittable(FromSpanningTree(tree), spec, spec.k())) return tree;
  }
  throw Error(ErrorKind::kGiveUp, GiveUpMessage(options.max_attempts));
}

}  // namespace

SpanningTree InitSplittableTree(const WeightedGraph& graph,
                                const BalanceSpec& spec,
                                const InitOptions& options, Rng& rng) {
  CheckInitArgs(graph, spec);
  if (options.strategy == InitStrategy::kRejection) {
    return RejectionTree(graph, spec, options, rng);
  }
  return BisectionState(graph, spec, options, rng).tree();
}

MarkedTree InitState(const WeightedGraph& graph, const BalanceSpec& spec,
                     const InitOptions& options, const SamplerConfig& config,
                     Rng& rng) {
  CheckInitArgs(graph, spec);
  if (options.strategy == InitStrategy::kBisection) {
    return BisectionState(graph, spec, options, rng);
  }
  SpanningTree tree = RejectionTree(graph, spec, options, rng);
  MarkedSelection sel =
      SelectMarkedTree(FromSpanningTree(tree), spec, spec.k(), config, rng);
  return MarkedTree(std::move(tree), std::move(sel.labels), spec);
}

std::string ChainName(ChainKind kind) {
  switch (kind) {
    case ChainKind::kBudTree:
      return "bud-tree";
    case ChainKind::kBudMarked:
      return "bud-marked";
    case ChainKind::kUpDown:
      return "up-down";
  }
  return "";
}

std::optional<ChainKind> ParseChainKind(const std::string& name) {
  for (ChainKind k :
       {ChainKind::kBudTree, ChainKind::kBudMarked, ChainKind::kUpDown}) {
    if (ChainName(k) == name) return k;
  }
  return std::nullopt;
}

double ChainSummary::acceptance_rate() const {
  return steps == 0 ? 0.0 : static_cast<double>(accepted) / steps;
}

double ChainSummary::internal_fraction() const {
  const std::int64_t total = internal_proposals + spanning_proposals;
  return total == 0 ? 0.0 : static_cast<double>(internal_proposals) / total;
}

namespace {

// Partition of a tree-level state when the balance is exact, from the unique
// cut set.
std::optional<Partition> ExactPartition(const SpanningTree& tree,
                                        const BalanceSpec& spec) {
  if (spec.lower() != spec.upper()) return std::nullopt;
  const auto cuts = UniqueExactSplit(FromSpanningTree(tree), spec.k());
  if (!cuts) return std::nullopt;
  return ForestPartition(tree, *cuts);
}

void Emit(const ChainOptions& options,
          std::int64_t step, const StepOutcome& outcome,
          const SpanningTree& tree, const Partition* partition,
          TraceSink& sink) {
  TraceRecord r;
  r.step = step;
  r.kind = ChainName(options.kind);
  r.accepted = outcome.accepted;
  r.internal = outcome.internal;
  r.obs = ComputeObservables(tree, partition, options.shares);
  if (options.emit_assignment && partition != nullptr) r.assignment = *partition;
  sink.Write(r);
}

}  // namespace

ChainSummary RunChain(const WeightedGraph& graph, const BalanceSpec& spec,
                      const ChainOptions& options, Rng& rng, TraceSink& sink) {
  if (options.steps < 0) {
    throw Error(ErrorKind::kInvalidArgument, "steps must be >= 0");
  }
  if (options.record_every < 1) {
    throw Error(ErrorKind::kInvalidArgument, "record_every must be >= 1");
  }
  if (graph.num_edges() < graph.num_vertices()) {
    throw Error(ErrorKind::kInvalidArgument,
                "graph is a tree: no non-tree edges to add");
  }
  options.sampler.Validate();
  ChainSummary summary;

  auto record = [&](std::int64_t step, const StepOutcome& outcome,
                    const SpanningTree& tree, const Partition* partition) {
    if (options.track_partitions && partition != nullptr) {
      summary.visited_partitions.insert(CanonicalKey(*partition));
    }
    if (step % options.record_every == 0) {
      Emit(options, step, outcome, tree, partition, sink);
      ++summary.records;
    }
  };
  auto tally = [&](const StepOutcome& outcome) {
    ++summary.steps;
    summary.accepted += outcome.accepted;
    summary.self_loops += outcome.self_loop;
    (outcome.internal ? summary.internal_proposals
                      : summary.spanning_proposals)++;
  };

  switch (options.kind) {
    case ChainKind::kBudMarked: {
      if (!spec.SatisfiesMarkedHypothesis()) {
        throw Error(ErrorKind::kGapHypothesis,
                    "bud-marked chain needs 2L > U");
      }
      LogTarget target(graph, options.measure);
      MarkedTree state = InitState(graph, spec, options.init, options.sampler, rng);
      for (std::int64_t s = 1; s <= options.steps; ++s) {
        const StepOutcome outcome =
            MhStep(state, target, options.d, options.sampler, spec, rng);
        tally(outcome);
        record(s, outcome, state.tree(), &state.partition());
      }
      break;
    }
    case ChainKind::kBudTree: {
      SpanningTree tree = InitSplittableTree(graph, spec, options.init, rng);
      std::optional<Partition> partition = ExactPartition(tree, spec);
      for (std::int64_t s = 1; s <= options.steps; ++s) {
        StepOutcome outcome;
        const EdgeSwap swap = BudStep(tree, spec, spec.k(), rng);
        if (partition) {
          const Edge& e = graph.edge(swap.added);
          outcome.internal =
              partition->assignment[e.u] == partition->assignment[e.v];
        }
        outcome.accepted = true;
        outcome.self_loop = swap.added == swap.removed;
        tally(outcome);
        if (!outcome.self_loop) partition = ExactPartition(tree, spec);
        record(s, outcome, tree, partition ? &*partition : nullptr);
      }
      break;
    }
    case ChainKind::kUpDown: {
      SpanningTree tree = WilsonUniformSpanningTree(graph, rng);
      for (std::int64_t s = 1; s <= options.steps; ++s) {
        StepOutcome outcome;
        const EdgeSwap swap = UpDownStep(tree, rng);
        outcome.accepted = true;
        outcome.self_loop = swap.added == swap.removed;
        tally(outcome);
        record(s, outcome, tree, nullptr);
      }
      break;
    }
  }
  return summary;
}

}  // namespace bud
