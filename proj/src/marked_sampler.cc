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

#include "bud/marked_sampler.h"

#include <algorithm>
#include <climits>
#include <cmath>
#include <string>
#include <utility>

#include "bud/error.h"
#include "bud/rational.h"
#include "bud/splittability.h"

namespace bud {
namespace {

// Rebuilds `tree` with nodes merged by group id (dense, -1 drops the node).
WeightedTree Regroup(const WeightedTree& tree, const std::vector<int>& group,
                     int groups) {
  std::vector<std::int64_t> weight(groups, 0);
  std::vector<int> key(groups, INT_MAX);
  for (int v = 0; v < tree.size(); ++v) {
    const int g = group[v];
    if (g < 0) continue;
    weight[g] += tree.weight(v);
    key[g] = std::min(key[g], tree.order_key(v));
  }
  WeightedTree out;
  for (int g = 0; g < groups; ++g) out.AddNode(weight[g], key[g]);
  for (const auto& e : tree.edge_list()) {
    const int ga = group[e.a];
    const int gb = group[e.b];
    if (ga < 0 || gb < 0 || ga == gb) continue;
    out.AddEdge(ga, gb, e.label);
  }
  return out;
}

// Merges every node in `from` into `into`.
WeightedTree MergeInto(const WeightedTree& tree, std::span<const int> from,
                       int into) {
  std::vector<int> group(tree.size(), -2);
  for (int v : from) group[v] = -3;
  int next = 0;
  for (int v = 0; v < tree.size(); ++v) {
    if (group[v] == -2) group[v] = next++;
  }
  for (int v : from) group[v] = group[into];
  return Regroup(tree, group, next);
}

WeightedTree Without(const WeightedTree& tree, std::span<const int> drop) {
  std::vector<int> group(tree.size(), 0);
  for (int v : drop) group[v] = -1;
  int next = 0;
  for (int v = 0; v < tree.size(); ++v) {
    if (group[v] == 0) group[v] = next++;
  }
  return Regroup(tree, group, next);
}

struct ScaledBounds {
  std::int64_t scale;
  std::int64_t lower;
  std::int64_t upper;
};

ScaledBounds Bounds(const BalanceSpec& spec) {
  const BalanceSpec::Scaled s = spec.scaled();
  return {s.scale, s.lower, s.upper};
}

// Contracts leaves lighter than L into their neighbor, smallest order key
// first, until every leaf is a district.
WeightedTree ContractLightLeaves(WeightedTree tree, const ScaledBounds& b,
                                 int parts) {
  while (true) {
    if (tree.size() == 1) {
      if (parts >= 2) {
        throw Error(ErrorKind::kNotSplittable,
                    "tree collapsed to one node with districts left");
      }
      return tree;
    }
    int best = -1;
    for (int v = 0; v < tree.size(); ++v) {
      if (tree.degree(v) != 1) continue;
      const std::int64_t w = CheckedMul(tree.weight(v), b.scale);
      if (w > b.upper) {
        throw Error(ErrorKind::kNotSplittable, "leaf heavier than the upper bound");
      }
      if (w < b.lower &&
          (best < 0 || tree.order_key(v) < tree.order_key(best))) {
        best = v;
      }
    }
    if (best < 0) return tree;
    const int leaf[] = {best};
    tree = MergeInto(tree, leaf, tree.arcs(best)[0].to);
  }
}

int FirstLeaf(const WeightedTree& tree) {
  int best = -1;
  for (int v = 0; v < tree.size(); ++v) {
    if (tree.degree(v) > 1) continue;
    if (best < 0 || tree.order_key(v) < tree.order_key(best)) best = v;
  }
  return best;
}

struct Viable {
  int label;
  int position;
};

std::vector<Viable> ViableOnBranch(const WeightedTree& tree, const Branch& br,
                                   const BalanceSpec& spec,
                                   const ScaledBounds& b, int parts) {
  std::vector<Viable> out;
  if (parts < 2) return out;
  std::int64_t prefix = 0;
  for (int i = 0; i < static_cast<int>(br.edge_labels.size()); ++i) {
    prefix = CheckedAdd(prefix, CheckedMul(tree.weight(br.nodes[i]), b.scale));
    if (prefix > b.upper) break;
    if (prefix < b.lower) continue;
    const std::span<const int> side(br.nodes.data(), i + 1);
    if (IsSplittable(Without(tree, side), spec, parts - 1)) {
      out.push_back({br.edge_labels[i], i});
    }
  }
  return out;
}

WeightedTree ContractBranch(const WeightedTree& tree, const Branch& br) {
  const std::span<const int> path(br.nodes.data(), br.nodes.size() - 1);
  return MergeInto(tree, path, br.nodes.back());
}

void CheckLabels(const WeightedTree& tree) {
  std::vector<int> labels;
  for (const auto& e : tree.edge_list()) labels.push_back(e.label);
  std::sort(labels.begin(), labels.end());
  if (std::adjacent_find(labels.begin(), labels.end()) != labels.end()) {
    throw Error(ErrorKind::kInvalidArgument, "tree edge labels must be distinct");
  }
}

void CheckPreconditions(const WeightedTree& tree, const BalanceSpec& spec,
                        int parts, const SamplerConfig& config) {
  config.Validate();
  if (parts < 1) {
    throw Error(ErrorKind::kInvalidArgument, "district count must be positive");
  }
  if (!tree.IsTree()) {
    throw Error(ErrorKind::kInvalidArgument, "input is not a tree");
  }
  if (!spec.SatisfiesMarkedHypothesis()) {
    throw Error(ErrorKind::kGapHypothesis,
                "marked-edge sampler needs 2L > U, got L = " +
                    RationalToString(spec.lower()) +
                    ", U = " + RationalToString(spec.upper()));
  }
  CheckLabels(tree);
}

// One round's view of the working tree.
struct Round {
  Branch branch;
  std::vector<Viable> viable;
  bool contractible = false;
};

Round Inspect(const WeightedTree& tree, const BalanceSpec& spec,
              const ScaledBounds& b, int parts) {
  Round r;
  r.branch = LeafBranch(tree, FirstLeaf(tree));
  r.viable = ViableOnBranch(tree, r.branch, spec, b, parts);
  r.contractible = r.branch.ends_at_junction &&
                   IsSplittable(ContractBranch(tree, r.branch), spec, parts);
  return r;
}

WeightedTree Detach(const WeightedTree& tree, const Branch& br, int position) {
  const std::span<const int> side(br.nodes.data(), position + 1);
  return Without(tree, side);
}

}  // namespace

void SamplerConfig::Validate() const {
  if (!(p > 0.0 && p < 1.0)) {
    throw Error(ErrorKind::kInvalidArgument,
                "contraction probability must lie strictly inside (0, 1)");
  }
}

Branch LeafBranch(const WeightedTree& tree, int leaf) {
  if (leaf < 0 || leaf >= tree.size() || tree.degree(leaf) > 1) {
    throw Error(ErrorKind::kInvalidArgument, "branch start is not a leaf");
  }
  Branch br;
  br.nodes.push_back(leaf);
  int prev = -1;
  int cur = leaf;
  while (true) {
    const TreeArc* step = nullptr;
    for (const TreeArc& arc : tree.arcs(cur)) {
      if (arc.to != prev) {
        step = &arc;
        break;
      }
    }
    if (step == nullptr) break;
    br.edge_labels.push_back(step->label);
    br.nodes.push_back(step->to);
    prev = cur;
    cur = step->to;
    if (tree.degree(cur) >= 3) {
      br.ends_at_junction = true;
      break;
    }
    if (tree.degree(cur) == 1) break;
  }
  return br;
}

std::vector<int> ViableEdges(const WeightedTree& tree, int leaf,
                             const BalanceSpec& spec, int parts) {
  const Branch br = LeafBranch(tree, leaf);
  std::vector<int> out;
  for (const Viable& v : ViableOnBranch(tree, br, spec, Bounds(spec), parts)) {
    out.push_back(v.label);
  }
  return out;
}

MarkedSelection SelectMarkedTree(const WeightedTree& tree,
                                 const BalanceSpec& spec, int parts,
                                 const SamplerConfig& config, Rng& rng) {
  CheckPreconditions(tree, spec, parts, config);
  if (!IsSplittable(tree, spec, parts)) {
    throw Error(ErrorKind::kNotSplittable,
                "tree is not " + std::to_string(parts) + "-splittable");
  }
  const ScaledBounds b = Bounds(spec);
  const double log_p = std::log(config.p);
  const double log_q = std::log1p(-config.p);
  MarkedSelection out;
  WeightedTree work = tree;
  int left = parts;
  while (left > 1) {
    work = ContractLightLeaves(std::move(work), b, left);
    const Round r = Inspect(work, spec, b, left);
    if (r.contractible && (r.viable.empty() || rng.Bernoulli(config.p))) {
      if (!r.viable.empty()) out.log_prob += log_p;
      work = ContractBranch(work, r.branch);
      continue;
    }
    if (r.viable.empty()) {
      throw Error(ErrorKind::kNotSplittable,
                  "no viable edge and no admissible contraction");
    }
    const Viable pick = r.viable[rng.Index(r.viable.size())];
    out.log_prob += (r.contractible ? log_q : 0.0) -
                    std::log(static_cast<double>(r.viable.size()));
    out.labels.push_back(pick.label);
    work = Detach(work, r.branch, pick.position);
    --left;
  }
  return out;
}

std::optional<double> MarkedSetLogProb(const WeightedTree& tree,
                                       const BalanceSpec& spec, int parts,
                                       const SamplerConfig& config,
                                       std::span<const int> labels) {
  CheckPreconditions(tree, spec, parts, config);
  if (static_cast<int>(labels.size()) != parts - 1) return std::nullopt;
  std::vector<int> marks(labels.begin(), labels.end());
  std::sort(marks.begin(), marks.end());
  if (std::adjacent_find(marks.begin(), marks.end()) != marks.end()) {
    return std::nullopt;
  }
  if (!IsSplittable(tree, spec, parts)) return std::nullopt;
  auto is_mark = [&](int label) {
    return std::binary_search(marks.begin(), marks.end(), label);
  };
  const ScaledBounds b = Bounds(spec);
  const double log_p = std::log(config.p);
  const double log_q = std::log1p(-config.p);
  double log_prob = 0.0;
  int consumed = 0;
  WeightedTree work = tree;
  int left = parts;
  try {
    while (left > 1) {
      work = ContractLightLeaves(std::move(work), b, left);
      const Round r = Inspect(work, spec, b, left);
      int target = -1;
      for (int i = 0; i < static_cast<int>(r.branch.edge_labels.size()); ++i) {
        if (is_mark(r.branch.edge_labels[i])) {
          target = i;
          break;
        }
      }
      if (target < 0) {
        if (!r.contractible) return std::nullopt;
        if (!r.viable.empty()) log_prob += log_p;
        work = ContractBranch(work, r.branch);
        continue;
      }
      const auto it = std::find_if(
          r.viable.begin(), r.viable.end(),
          [&](const Viable& v) { return v.position == target; });
      if (it == r.viable.end()) return std::nullopt;
      log_prob += (r.contractible ? log_q : 0.0) -
                  std::log(static_cast<double>(r.viable.size()));
      ++consumed;
      work = Detach(work, r.branch, target);
      --left;
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kNotSplittable) return std::nullopt;
    throw;
  }
  if (consumed != parts - 1) return std::nullopt;
  return log_prob;
}

Partition ForestPartition(const SpanningTree& tree,
                          std::span<const int> marked) {
  const int n = tree.num_vertices();
  std::vector<char> cut(tree.graph().num_edges(), 0);
  for (int e : marked) cut[e] = 1;
  Partition p;
  p.assignment.assign(n, -1);
  std::vector<int> stack;
  for (int s = 0; s < n; ++s) {
    if (p.assignment[s] >= 0) continue;
    p.assignment[s] = p.k;
    stack.push_back(s);
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (const Arc& arc : tree.neighbors(v)) {
        if (cut[arc.edge] || p.assignment[arc.to] >= 0) continue;
        p.assignment[arc.to] = p.k;
        stack.push_back(arc.to);
      }
    }
    ++p.k;
  }
  return p;
}

MarkedTree::MarkedTree(SpanningTree tree, std::vector<int> marked,
                       const BalanceSpec& spec)
    : tree_(std::move(tree)), marked_(std::move(marked)) {
  std::sort(marked_.begin(), marked_.end());
  partition_ = ForestPartition(tree_, marked_);
  weights_ = DistrictPopulations(tree_.graph(), partition_);
  CheckInvariants(spec);
}

bool MarkedTree::IsMarked(int edge) const {
  return std::binary_search(marked_.begin(), marked_.end(), edge);
}

void MarkedTree::CheckInvariants(const BalanceSpec& spec) const {
  if (static_cast<int>(marked_.size()) != spec.k() - 1) {
    throw Error(ErrorKind::kInvalidArgument,
                "expected " + std::to_string(spec.k() - 1) + " marked edges");
  }
  for (std::size_t i = 0; i < marked_.size(); ++i) {
    if (!tree_.Contains(marked_[i]) || (i > 0 && marked_[i] == marked_[i - 1])) {
      throw Error(ErrorKind::kInvalidArgument,
                  "marked edges must be distinct tree edges");
    }
  }
  if (partition_.k != spec.k()) {
    throw Error(ErrorKind::kInvalidArgument, "district count mismatch");
  }
  const auto weights = DistrictPopulations(tree_.graph(), partition_);
  if (weights != weights_) {
    throw Error(ErrorKind::kInvalidArgument, "stale district weights");
  }
  for (std::int64_t w : weights_) {
    if (!spec.Contains(w)) {
      throw Error(ErrorKind::kInvalidArgument,
                  "district weight " + std::to_string(w) + " out of bounds");
    }
  }
}

}  // namespace bud
