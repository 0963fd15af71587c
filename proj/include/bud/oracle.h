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

#ifndef BUD_ORACLE_H_
#define BUD_ORACLE_H_

#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bud/chains.h"
#include "bud/graph.h"
#include "bud/marked_sampler.h"
#include "bud/matrix_tree.h"
#include "bud/weighted_tree.h"

namespace bud {

inline constexpr int kMaxPartitionVertices = 24;
inline constexpr int kMaxMarkedSetEdges = 25;
inline constexpr int kMaxChainStates = 50000;

// All partitions into spec.k() connected districts with weights in [L, U],
// districts numbered by smallest vertex.
std::vector<Partition> EnumeratePartitions(const WeightedGraph& graph,
                                           const BalanceSpec& spec);

// Sum over balanced partitions of tau(F) * tau(G / P). Needs L == U.
BigInt CountSplittableTrees(const WeightedGraph& graph,
                            const BalanceSpec& spec);

// Calls `visit` with the sorted edge ids of every spanning tree.
void ForEachSpanningTree(const WeightedGraph& graph,
                         const std::function<void(const std::vector<int>&)>& visit);

// Direct count: spanning trees whose exact split into spec.k() parts exists.
// Needs L == U.
BigInt CountSplittableTreesDirect(const WeightedGraph& graph,
                                  const BalanceSpec& spec);

// All (parts-1)-subsets of edge labels whose deletion leaves districts in
// [L, U], each sorted, in lexicographic order.
std::vector<std::vector<int>> EnumerateMarkedSets(const WeightedTree& tree,
                                                  const BalanceSpec& spec,
                                                  int parts);

struct ChainState {
  std::vector<int> edges;
  std::vector<int> marked;

  friend auto operator<=>(const ChainState&, const ChainState&) = default;
};

struct TransitionMatrix {
  std::vector<ChainState> states;
  std::map<ChainState, int> index;
  Eigen::MatrixXd p;
};

struct OracleChain {
  ChainKind kind = ChainKind::kBudTree;
  MeasureSpec measure;
  int d = 0;
  SamplerConfig sampler;
};

// Exact one-step matrix over all states of the chain: splittable trees
// (bud-tree), marked trees (bud-marked) or spanning trees (up-down).
TransitionMatrix BuildTransitionMatrix(const WeightedGraph& graph,
                                       const BalanceSpec& spec,
                                       const OracleChain& chain);

// Strongly connected components of the positive-entry digraph, each sorted.
std::vector<std::vector<int>> CommunicatingClasses(const Eigen::MatrixXd& p);

struct Stationary {
  Eigen::VectorXd pi;
  // max_i |(pi P)_i - pi_i|
  double residual = 0.0;
};

// Stationary vector of P restricted to a closed class, by a direct solve
// followed by power iterations.
Stationary StationaryOnClass(const Eigen::MatrixXd& p,
                             const std::vector<int>& states);

}  // namespace bud

#endif  // BUD_ORACLE_H_
