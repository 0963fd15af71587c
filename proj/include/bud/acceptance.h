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

#ifndef BUD_ACCEPTANCE_H_
#define BUD_ACCEPTANCE_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bud/graph.h"
#include "bud/weighted_tree.h"

namespace bud {

// Pinned tolerances and budgets.
inline constexpr int kOracleTrees = 1500;
inline constexpr int kSamplerCorpus = 400;
inline constexpr int kSamplerDraws = 100000;
inline constexpr int kSamplerDrawTrees = 4;
inline constexpr double kSamplerSigmas = 3.0;
inline constexpr double kReplaySumTolerance = 1e-12;
inline constexpr double kTreeChainResidual = 1e-12;
inline constexpr double kMarkedChainTolerance = 1e-10;
inline constexpr std::int64_t kGridSteps = 200000;
inline constexpr double kGridTvBudget = 0.05;
inline constexpr int kMixingChains = 6;
inline constexpr std::int64_t kMixingSamples = 100000;
inline constexpr double kMixingTvBudget = 0.1;
inline constexpr std::int64_t kBaselineSteps = 200000;
inline constexpr int kBaselineMaxLag = 200;

enum class AcceptanceLevel { kFast, kFull };

using SplitDecider =
    std::function<bool(const WeightedTree&, const BalanceSpec&, int)>;

struct AcceptanceOptions {
  std::uint64_t seed = 20240607;
  // Replaces the decision procedure checked by criterion 2.
  SplitDecider decider;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

std::vector<int> CriteriaFor(AcceptanceLevel level);

CriterionResult RunCriterion(int id, const AcceptanceOptions& options);

// Runs every criterion of the level, reporting each result as it finishes.
std::vector<CriterionResult> RunAcceptance(
    AcceptanceLevel level, const AcceptanceOptions& options,
    const std::function<void(const CriterionResult&)>& report = {});

std::string FormatResult(const CriterionResult& result);

// A decider that ignores tree structure and only checks the totals; used to
// confirm that criterion 2 catches a broken implementation.
SplitDecider CorruptedDecider();

}  // namespace bud

#endif  // BUD_ACCEPTANCE_H_
