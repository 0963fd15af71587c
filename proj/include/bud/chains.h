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

#ifndef BUD_CHAINS_H_
#define BUD_CHAINS_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "bud/graph.h"
#include "bud/marked_sampler.h"
#include "bud/rng.h"
#include "bud/spanning_tree.h"
#include "bud/trace.h"
#include "bud/weighted_tree.h"

namespace bud {

enum class MeasureKind {
  kUniformSplittableTrees,
  kUniformForests,
  kUniformPartitions,
  kCustom,
};

std::string MeasureName(MeasureKind kind);
std::optional<MeasureKind> ParseMeasureKind(const std::string& name);

struct MeasureSpec {
  MeasureKind kind = MeasureKind::kUniformSplittableTrees;
  // log pi of a partition; used by kCustom only.
  std::function<double(const WeightedGraph&, const Partition&)> log_weight;
};

// Custom measure with log pi = -beta * (cut edges).
MeasureSpec CutEdgeMeasure(double beta);

// Log of the target weight of a marked tree, which depends on its partition
// only. Spanning-tree counts of districts are cached by vertex set.
class LogTarget {
 public:
  LogTarget(const WeightedGraph& graph, MeasureSpec measure);

  double operator()(const Partition& partition);
  double operator()(const MarkedTree& state) {
    return (*this)(state.partition());
  }

  std::size_t cache_size() const { return district_cache_.size(); }

 private:
  struct VectorHash {
    std::size_t operator()(const std::vector<int>& v) const;
  };

  double LogDistrictTrees(const std::vector<int>& members);

  const WeightedGraph& graph_;
  MeasureSpec measure_;
  std::unordered_map<std::vector<int>, double, VectorHash> district_cache_;
};

// Edges of the fundamental cycle of `added` whose removal leaves a
// parts-splittable tree. Always contains `added`.
std::vector<int> RemovableEdges(const SpanningTree& tree, int added,
                                const BalanceSpec& spec, int parts);

// One step of the tree-level walk on splittable trees.
EdgeSwap BudStep(SpanningTree& tree, const BalanceSpec& spec, int parts,
                 Rng& rng);

// Local re-marking window around the cycle of T + added. Distances are
// measured in T + added from the cycle. `h` is unicyclic: nodes are the
// vertices within distance d that stay connected to the cycle once far marks
// are deleted, each carrying the weight of the vertices beyond distance d
// that hang below it. Node order keys are host vertex indices and edge labels
// host edge ids.
struct Neighborhood {
  int added = -1;
  Cycle cycle;
  WeightedTree h;
  std::vector<int> near_marks;
  std::vector<int> far_marks;
  int parts = 1;
  std::vector<int> removable;
};

Neighborhood BuildNeighborhood(const MarkedTree& state, int added, int d,
                               const BalanceSpec& spec);

// Copy of `graph` without the edge labelled `label`.
WeightedTree DropEdge(const WeightedTree& graph, int label);

struct ProposalOutcome {
  std::optional<MarkedTree> proposed;
  int added = -1;
  int removed = -1;
  double forward_log_prob = 0.0;
  double reverse_log_prob = 0.0;
  bool self_loop = false;
  std::string reason;
  // Added edge joins two vertices of one district.
  bool internal = false;
};

ProposalOutcome RestrictedBudPropose(const MarkedTree& current, int d,
                                     const SamplerConfig& config,
                                     const BalanceSpec& spec, Rng& rng);

// log of the Metropolis-Hastings ratio for a non-self-loop proposal.
double MhLogRatio(const ProposalOutcome& proposal, double log_target_current,
                  double log_target_proposed);

struct StepOutcome {
  bool accepted = false;
  bool internal = false;
  bool self_loop = false;
};

StepOutcome MhStep(MarkedTree& state, LogTarget& target, int d,
                   const SamplerConfig& config, const BalanceSpec& spec,
                   Rng& rng);

enum class InitStrategy { kRejection, kBisection };

struct InitOptions {
  InitStrategy strategy = InitStrategy::kBisection;
  std::int64_t max_attempts = 100000;
};

// A spanning tree that splits into spec.k() districts.
SpanningTree InitSplittableTree(const WeightedGraph& graph,
                                const BalanceSpec& spec,
                                const InitOptions& options, Rng& rng);

MarkedTree InitState(const WeightedGraph& graph, const BalanceSpec& spec,
                     const InitOptions& options, const SamplerConfig& config,
                     Rng& rng);

enum class ChainKind { kBudTree, kBudMarked, kUpDown };

std::string ChainName(ChainKind kind);
std::optional<ChainKind> ParseChainKind(const std::string& name);

struct ChainOptions {
  ChainKind kind = ChainKind::kBudMarked;
  MeasureSpec measure;
  std::int64_t steps = 0;
  std::int64_t record_every = 1;
  int d = 0;
  SamplerConfig sampler;
  InitOptions init;
  std::vector<ShareSpec> shares;
  bool emit_assignment = false;
  // Collect canonical keys of every partition visited after each step.
  bool track_partitions = false;
};

struct ChainSummary {
  std::int64_t steps = 0;
  std::int64_t accepted = 0;
  std::int64_t self_loops = 0;
  std::int64_t internal_proposals = 0;
  std::int64_t spanning_proposals = 0;
  std::int64_t records = 0;
  std::set<std::string> visited_partitions;

  double acceptance_rate() const;
  double internal_fraction() const;
};

ChainSummary RunChain(const WeightedGraph& graph, const BalanceSpec& spec,
                      const ChainOptions& options, Rng& rng, TraceSink& sink);

}  // namespace bud

#endif  // BUD_CHAINS_H_
