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

#ifndef BUD_MARKED_SAMPLER_H_
#define BUD_MARKED_SAMPLER_H_

#include <optional>
#include <span>
#include <vector>

#include "bud/graph.h"
#include "bud/rng.h"
#include "bud/spanning_tree.h"
#include "bud/weighted_tree.h"

namespace bud {

// Leaf order is the order_key of the working tree's nodes; contracted groups
// take the minimum key they contain.
struct SamplerConfig {
  double p = 0.25;

  void Validate() const;
};

// Path from a leaf to the nearest node of degree >= 3 (inclusive), or the
// whole tree when it is a path. edge_labels[i] joins nodes[i] and
// nodes[i + 1].
struct Branch {
  std::vector<int> nodes;
  std::vector<int> edge_labels;
  bool ends_at_junction = false;
};

Branch LeafBranch(const WeightedTree& tree, int leaf);

// Labels of branch edges whose deletion leaves a district containing `leaf`
// and a (parts-1)-splittable remainder, in order of distance from the leaf.
std::vector<int> ViableEdges(const WeightedTree& tree, int leaf,
                             const BalanceSpec& spec, int parts);

struct MarkedSelection {
  std::vector<int> labels;
  double log_prob = 0.0;
};

// Draws parts-1 edge labels whose deletion splits `tree` into districts,
// together with the exact log-probability of the draw. Edge labels must be
// distinct. Throws kNotSplittable if the tree cannot be split and
// kGapHypothesis unless 2L > U.
MarkedSelection SelectMarkedTree(const WeightedTree& tree,
                                 const BalanceSpec& spec, int parts,
                                 const SamplerConfig& config, Rng& rng);

// Log-probability that SelectMarkedTree returns exactly `labels`, by
// deterministic replay; nullopt when that probability is zero.
std::optional<double> MarkedSetLogProb(const WeightedTree& tree,
                                       const BalanceSpec& spec, int parts,
                                       const SamplerConfig& config,
                                       std::span<const int> labels);

// Spanning tree plus k-1 marked edges whose deletion leaves k districts.
class MarkedTree {
 public:
  // Validates the marks against `spec`.
  MarkedTree(SpanningTree tree, std::vector<int> marked,
             const BalanceSpec& spec);

  const SpanningTree& tree() const { return tree_; }
  // Sorted host edge ids.
  const std::vector<int>& marked() const { return marked_; }
  bool IsMarked(int edge) const;
  // Districts numbered by their smallest vertex.
  const Partition& partition() const { return partition_; }
  const std::vector<std::int64_t>& district_weights() const {
    return weights_;
  }

  void CheckInvariants(const BalanceSpec& spec) const;

  friend bool operator==(const MarkedTree& a, const MarkedTree& b) {
    return a.tree_ == b.tree_ && a.marked_ == b.marked_;
  }

 private:
  SpanningTree tree_;
  std::vector<int> marked_;
  Partition partition_;
  std::vector<std::int64_t> weights_;
};

// Partition of the forest tree minus `marked`, districts numbered by their
// smallest vertex.
Partition ForestPartition(const SpanningTree& tree,
                          std::span<const int> marked);

}  // namespace bud

#endif  // BUD_MARKED_SAMPLER_H_
