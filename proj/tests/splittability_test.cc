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

#include "bud/splittability.h"

#include <algorithm>
#include <set>
#include <utility>
#include <vector>

#include <gtest/gtest.h>

#include "bud/error.h"
#include "bud/rational.h"
#include "bud/rng.h"
#include "test_util.h"

namespace bud {
namespace {

WeightedTree PathTree(std::vector<std::int64_t> weights) {
  return WeightedTree::Path(weights);
}

TEST(SplittabilityTest, PathExamples) {
  const BalanceSpec s = BalanceSpec::FromBounds(3, Rational(3), Rational(3));
  EXPECT_TRUE(TappDecide(PathTree({1, 2, 3, 1, 2}), s, 3).splittable);
  EXPECT_FALSE(TappDecide(PathTree({1, 3, 2, 1, 2}), s, 3).splittable);
  EXPECT_TRUE(IsSplittable(PathTree({1, 2, 3, 1, 2}), s, 3));
  EXPECT_FALSE(IsSplittable(PathTree({1, 3, 2, 1, 2}), s, 3));
}

// Weights (2,2,2) with bounds [2,3] split into three parts but never two.
// The single-table DP answers the wrong question here, so it must not be
// taken.
TEST(SplittabilityTest, AmbiguousDistrictCount) {
  const BalanceSpec s = BalanceSpec::FromBounds(2, Rational(2), Rational(3));
  const WeightedTree t = PathTree({2, 2, 2});
  EXPECT_FALSE(SingleCountFeasible(6, s, 2));
  EXPECT_FALSE(TappOracle(t, s, 2));
  EXPECT_FALSE(TappDecide(t, s, 2).splittable);
  EXPECT_FALSE(IsSplittable(t, s, 2));
  EXPECT_TRUE(TappDecide(t, s, 3).splittable);
  EXPECT_THROW(TappDecide(t, s, 2, TappPath::kFast), Error);
}

TEST(SplittabilityTest, TrivialCases) {
  const BalanceSpec s = BalanceSpec::FromBounds(2, Rational(1), Rational(10));
  const WeightedTree single = PathTree({5});
  EXPECT_TRUE(IsSplittable(single, s, 1));
  EXPECT_FALSE(IsSplittable(single, s, 2));
  EXPECT_FALSE(TappDecide(single, s, 2).splittable);
  EXPECT_THROW(IsSplittable(single, s, 0), Error);
  EXPECT_FALSE(IsSplittable(PathTree({20}), s, 1));
}

TEST(SplittabilityTest, ZeroWeights) {
  const BalanceSpec s = BalanceSpec::FromBounds(2, Rational(2), Rational(2));
  const WeightedTree t = PathTree({0, 2, 0, 0, 2, 0});
  EXPECT_TRUE(TappOracle(t, s, 2));
  EXPECT_TRUE(IsSplittable(t, s, 2));
  EXPECT_FALSE(IsSplittable(PathTree({2, 0, 0, 0}), s, 2));
}

TEST(SplittabilityTest, RationalBounds) {
  // Bounds [5/2, 7/2]: pieces of weight exactly 3.
  const BalanceSpec s = BalanceSpec::FromBounds(2, Rational(5, 2), Rational(7, 2));
  EXPECT_TRUE(IsSplittable(PathTree({1, 2, 2, 1}), s, 2));
  EXPECT_FALSE(IsSplittable(PathTree({2, 2, 1, 1}), s, 2));
  EXPECT_EQ(TappDecide(PathTree({1, 2, 2, 1}), s, 2).table.scale, 2);
}

struct Instance {
  WeightedTree tree;
  BalanceSpec spec;
  int parts;
};

Instance RandomInstance(Rng& rng, bool allow_zero) {
  const int n = 2 + static_cast<int>(rng.Index(10));
  WeightedTree tree = testing::RandomTree(n, allow_zero ? 0 : 1, 6, rng);
  const std::int64_t total = std::max<std::int64_t>(tree.total_weight(), 1);
  const int parts = 1 + static_cast<int>(rng.Index(std::min(n, 5)));
  const Rational ideal(total, parts);
  // Tolerances from 0 up to roughly half the ideal weight, sometimes
  // fractional.
  const Rational below(static_cast<std::int64_t>(rng.Index(7)), 4);
  const Rational above(static_cast<std::int64_t>(rng.Index(7)), 3);
  Rational lower = ideal - below * ideal / 4;
  if (lower <= 0) lower = Rational(1, 2);
  const Rational upper = ideal + above * ideal / 4;
  return {std::move(tree), BalanceSpec::FromBounds(parts, lower, upper), parts};
}

TEST(SplittabilityTest, MatchesOracleOnRandomTrees) {
  Rng rng(2024, 0);
  int positives = 0;
  int fast = 0;
  for (int trial = 0; trial < 3000; ++trial) {
    const Instance in = RandomInstance(rng, trial % 5 == 0);
    const bool expected = TappOracle(in.tree, in.spec, in.parts);
    positives += expected;
    ASSERT_EQ(TappDecide(in.tree, in.spec, in.parts, TappPath::kGeneral)
                  .splittable,
              expected)
        << "trial " << trial;
    ASSERT_EQ(TappDecide(in.tree, in.spec, in.parts).splittable, expected);
    ASSERT_EQ(IsSplittable(in.tree, in.spec, in.parts), expected);
    if (SingleCountFeasible(in.tree.total_weight(), in.spec, in.parts)) {
      ++fast;
      ASSERT_EQ(
          TappDecide(in.tree, in.spec, in.parts, TappPath::kFast).splittable,
          expected)
          << "trial " << trial;
    }
  }
  EXPECT_GT(positives, 300);
  EXPECT_GT(fast, 300);
}

TEST(SplittabilityTest, SingleCountGateMatchesCentered) {
  // For bounds P/k +- P*eps/2 the gate holds exactly when eps < 2/(k(k+1)).
  for (int k = 2; k <= 6; ++k) {
    const std::int64_t total = 60 * k * (k + 1);
    const Rational threshold(2, k * (k + 1));
    for (Rational eps : {threshold - Rational(1, 1000), threshold,
                         threshold + Rational(1, 1000)}) {
      const BalanceSpec s = BalanceSpec::FromEpsilon(k, total, eps);
      EXPECT_EQ(SingleCountFeasible(total, s, k), eps < threshold)
          << k << " " << eps;
    }
  }
}

// True surplus sets by enumeration: for each node v and each l, the weights
// of v's own piece over all cuts of v's subtree leaving l valid pieces below,
// plus 0 whenever v's piece can itself be closed.
std::vector<std::vector<std::set<std::int64_t>>> TrueSurpluses(
    const WeightedTree& tree, const BalanceSpec& spec, int parts) {
  const int n = tree.size();
  std::vector<int> parent(n, -1);
  std::vector<int> order = {0};
  std::vector<char> seen(n, 0);
  seen[0] = 1;
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (const TreeArc& arc : tree.arcs(order[i])) {
      if (seen[arc.to]) continue;
      seen[arc.to] = 1;
      parent[arc.to] = order[i];
      order.push_back(arc.to);
    }
  }
  const std::int64_t scale = spec.scaled().scale;
  std::vector<std::vector<std::set<std::int64_t>>> out(
      n, std::vector<std::set<std::int64_t>>(parts + 1));
  for (int v = 0; v < n; ++v) {
    std::vector<char> inside(n, 0);
    for (int u : order) {
      inside[u] = (u == v) || (parent[u] >= 0 && inside[parent[u]]);
    }
    std::vector<int> local;
    for (int i = 0; i < tree.num_edges(); ++i) {
      const auto& e = tree.edge_list()[i];
      if (inside[e.a] && inside[e.b]) local.push_back(i);
    }
    for (std::uint32_t mask = 0; mask < (1u << local.size()); ++mask) {
      testing::Dsu dsu(n);
      for (std::size_t j = 0; j < local.size(); ++j) {
        if (mask >> j & 1) continue;
        dsu.Unite(tree.edge_list()[local[j]].a, tree.edge_list()[local[j]].b);
      }
      std::vector<std::int64_t> sum(n, 0);
      for (int u = 0; u < n; ++u) {
        if (inside[u]) sum[dsu.Find(u)] += tree.weight(u);
      }
      int closed = 0;
      bool ok = true;
      for (int u = 0; u < n; ++u) {
        if (!inside[u] || dsu.Find(u) != u || u == dsu.Find(v)) continue;
        ok = ok && spec.Contains(sum[u]);
        ++closed;
      }
      if (!ok || closed > parts) continue;
      const std::int64_t own = sum[dsu.Find(v)];
      out[v][closed].insert(own * scale);
      if (spec.Contains(own) && closed + 1 <= parts) {
        out[v][closed + 1].insert(0);
      }
    }
  }
  return out;
}

TEST(SplittabilityTest, TablesAreSoundAndCompact) {
  Rng rng(77, 0);
  for (int trial = 0; trial < 400; ++trial) {
    Instance in = RandomInstance(rng, trial % 4 == 0);
    if (in.tree.size() > 10) continue;
    const TappResult r =
        TappDecide(in.tree, in.spec, in.parts, TappPath::kGeneral);
    const auto truth = TrueSurpluses(in.tree, in.spec, in.parts);
    const BalanceSpec::Scaled sc = in.spec.scaled();
    const std::int64_t gap = sc.upper - sc.lower;
    for (int v = 0; v < in.tree.size(); ++v) {
      for (int l = 0; l <= in.parts; ++l) {
        const SurplusSet& got = r.table.levels[v][l];
        for (std::int64_t x : truth[v][l]) {
          if (x <= sc.upper) {
            EXPECT_TRUE(got.Contains(x)) << "v=" << v << " l=" << l;
          }
        }
        for (const Interval<std::int64_t>& part : got.components()) {
          EXPECT_TRUE(truth[v][l].count(part.lo)) << got << " trial " << trial;
        }
        if (gap > 0) EXPECT_LE(got.size(), sc.upper / gap + 1);
      }
    }
    EXPECT_EQ(r.splittable, truth[0][in.parts].count(0) > 0);
  }
}

TEST(UniqueExactSplitTest, MatchesOracle) {
  Rng rng(31, 0);
  int found = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = 2 + static_cast<int>(rng.Index(11));
    const WeightedTree tree = testing::RandomTree(n, 1, 3, rng);
    const int k = 1 + static_cast<int>(rng.Index(4));
    const auto cuts = UniqueExactSplit(tree, k);
    const std::int64_t total = tree.total_weight();
    if (total % k != 0) {
      EXPECT_FALSE(cuts.has_value());
      continue;
    }
    const Rational target(total / k);
    const BalanceSpec s = BalanceSpec::FromBounds(k, target, target);
    ASSERT_EQ(cuts.has_value(), TappOracle(tree, s, k)) << trial;
    if (!cuts) continue;
    ++found;
    // Labels are positions in edge_list() for RandomTree.
    for (std::int64_t w : testing::PieceWeights(tree, *cuts)) {
      EXPECT_EQ(w, total / k);
    }
  }
  EXPECT_GT(found, 200);
}

TEST(TappOracleTest, Guard) {
  std::vector<std::int64_t> w(27, 1);
  EXPECT_THROW(
      TappOracle(PathTree(w), BalanceSpec::FromBounds(3, Rational(9), Rational(9)), 3),
      Error);
}

}  // namespace
}  // namespace bud
