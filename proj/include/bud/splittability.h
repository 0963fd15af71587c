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

#ifndef BUD_SPLITTABILITY_H_
#define BUD_SPLITTABILITY_H_

#include <cstdint>
#include <optional>
#include <vector>

#include "bud/graph.h"
#include "bud/interval_set.h"
#include "bud/weighted_tree.h"

namespace bud {

// Surplus sets live in integer units of 1/scale, where scale makes both
// balance bounds integral; all comparisons are exact.
using SurplusSet = IntervalSet<std::int64_t>;

// Per-node DP tables. General path: levels[v][l] approximates the closure of
// the set of surpluses left at v after carving l complete districts out of
// the subtree below v, for l = 0..parts. Fast path: levels[v] holds a single
// set, the union over all l.
struct SurplusTable {
  std::int64_t scale = 1;
  bool fast_path = false;
  int root = 0;
  std::vector<std::vector<SurplusSet>> levels;
  SurplusSet root_result;
};

struct TappResult {
  bool splittable = false;
  SurplusTable table;
};

enum class TappPath { kAuto, kGeneral, kFast };

// True iff `parts` is the only district count m with m*L <= total <= m*U.
// This is the exact condition under which the single-table DP decides the
// fixed-count question.
bool SingleCountFeasible(std::int64_t total_weight, const BalanceSpec& spec,
                         int parts);

// Decides whether `tree` can be cut into `parts` connected pieces whose
// weights all lie in [L, U], by the closure-compressed interval DP folded one
// child at a time. kAuto takes the single-table variant when
// SingleCountFeasible holds; kFast throws if it does not.
TappResult TappDecide(const WeightedTree& tree, const BalanceSpec& spec,
                      int parts, TappPath path = TappPath::kAuto);

// Decision only, no tables kept. Exact-balance instances with positive
// weights go through UniqueExactSplit.
bool IsSplittable(const WeightedTree& tree, const BalanceSpec& spec, int parts);

// Exact balance with target total/k: a single leaf-to-root pass cutting every
// edge whose residual subtree weight hits the target. Returns the cut edge
// labels, or nullopt when no exact split exists. Assumes positive weights
// (with zero weights the cut set need not be unique; a valid one is returned
// when the greedy pass finds it).
std::optional<std::vector<int>> UniqueExactSplit(const WeightedTree& tree,
                                                 int k);

// Brute force over all (parts-1)-subsets of edges. Guarded to trees with at
// most 25 edges.
bool TappOracle(const WeightedTree& tree, const BalanceSpec& spec, int parts);

}  // namespace bud

#endif  // BUD_SPLITTABILITY_H_
