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

#include <cmath>
#include <map>
#include <sstream>

#include <gtest/gtest.h>

#include "bud/error.h"
#include "bud/oracle.h"
#include "bud/rational.h"
#include "bud/splittability.h"

namespace bud {
namespace {

WeightedGraph Ring(int n) {
  WeightedGraph g;
  for (int v = 0; v < n; ++v) g.AddVertex("v" + std::to_string(v + 1), 1);
  for (int v = 0; v < n; ++v) g.AddEdge(v, (v + 1) % n);
  return g;
}

BalanceSpec Bounds(int k, std::int64_t lo, std::int64_t hi) {
  return BalanceSpec::FromBounds(k, Rational(lo), Rational(hi));
}

TEST(LogTargetTest, FourCycle) {
  const WeightedGraph g = Ring(4);
  const Partition p{2, {0, 0, 1, 1}};
  LogTarget uniform(g, MeasureSpec{});
  LogTarget forests(g, MeasureSpec{MeasureKind::kUniformForests, {}});
  LogTarget partitions(g, MeasureSpec{MeasureKind::kUniformPartitions, {}});
  EXPECT_EQ(uniform(p), 0.0);
  EXPECT_NEAR(forests(p), -std::log(2.0), 1e-15);
  EXPECT_NEAR(partitions(p), -std::log(2.0), 1e-15);
  LogTarget custom(g, CutEdgeMeasure(0.5));
  EXPECT_NEAR(custom(p), -1.0 - std::log(2.0), 1e-15);
  EXPECT_EQ(partitions.cache_size(), 2u);
  EXPECT_THROW(LogTarget(g, MeasureSpec{MeasureKind::kCustom, {}}), Error);
}

TEST(LogTargetTest, GridPartitionMeasure) {
  const WeightedGraph g = MakeGrid(2, 4, 1);
  // Left and right 2x2 blocks: tau = 4 each, two crossing edges.
  const Partition p{2, {0, 0, 1, 1, 0, 0, 1, 1}};
  LogTarget target(g, MeasureSpec{MeasureKind::kUniformPartitions, {}});
  EXPECT_NEAR(target(p), -std::log(4.0 * 4.0 * 2.0), 1e-12);
}

TEST(RemovableEdgesTest, FourCycle) {
  const WeightedGraph g = Ring(4);
  const SpanningTree t(g, std::vector<int>{0, 1, 2});
  const std::vector<int> r = RemovableEdges(t, 3, Bounds(2, 2, 2), 2);
  EXPECT_EQ(r.size(), 4u);
}

TEST(RemovableEdgesTest, OnlyAddedEdge) {
  // Path 0-1-2-3 with weights 1,1,1,1 inside a graph with chord (0,2):
  // adding the chord and dropping (0,1) or (1,2) leaves a star-like tree
  // whose only 2+2 split needs vertex 1 paired with an endpoint.
  WeightedGraph g;
  for (int v = 0; v < 4; ++v) g.AddVertex("v" + std::to_string(v), 1);
  g.AddEdge(0, 1);
  g.AddEdge(1, 2);
  g.AddEdge(2, 3);
  g.AddEdge(0, 2);
  const SpanningTree t(g, std::vector<int>{0, 1, 2});
  const std::vector<int> r = RemovableEdges(t, 3, Bounds(2, 2, 2), 2);
  // Dropping (0,1) gives 1-2-3 plus 0-2: star at 2, unsplittable.
  // Dropping (1,2) gives path 1-0-2-3: splittable.
  EXPECT_EQ(r, (std::vector<int>{1, 3}));
}

TEST(BudStepTest, FourCycleUniformNeighbors) {
  const WeightedGraph g = Ring(4);
  SpanningTree t(g, std::vector<int>{0, 1, 2});
  const BalanceSpec s = Bounds(2, 2, 2);
  Rng rng(4, 0);
  std::map<std::vector<int>, int> counts;
  const int draws = 40000;
  for (int i = 0; i < draws; ++i) {
    SpanningTree copy = t;
    BudStep(copy, s, 2, rng);
    ++counts[copy.Edges()];
  }
  ASSERT_EQ(counts.size(), 4u);
  for (const auto& [edges, n] : counts) {
    EXPECT_NEAR(n, draws / 4.0, 4 * std::sqrt(draws * 0.25 * 0.75));
  }
}

TEST(BudStepTest, TreeGraphIsAnError) {
  const WeightedGraph g = MakeGrid(1, 4, 1);
  SpanningTree t(g, std::vector<int>{0, 1, 2});
  Rng rng(1, 0);
  EXPECT_THROW(BudStep(t, Bounds(2, 2, 2), 2, rng), Error);
}

TEST(BudStepTest, EmpiricalTransitionsMatchOracle) {
  const WeightedGraph g = MakeGrid(2, 3, 1);
  const BalanceSpec s = Bounds(2, 3, 3);
  const TransitionMatrix m = BuildTransitionMatrix(g, s, OracleChain{});
  const int n = static_cast<int>(m.states.size());
  Rng rng(8, 0);
  const int per_state = 20000;
  for (int i = 0; i < n; ++i) {
    std::vector<int> counts(n, 0);
    for (int r = 0; r < per_state; ++r) {
      SpanningTree t(g, m.states[i].edges);
      BudStep(t, s, 2, rng);
      ++counts[m.index.at({t.Edges(), {}})];
    }
    for (int j = 0; j < n; ++j) {
      const double p = m.p(i, j);
      const double sigma = std::sqrt(per_state * p * (1 - p));
      EXPECT_LE(std::abs(counts[j] - per_state * p), 4 * sigma + 1e-9)
          << i << "->" << j;
    }
  }
}

TEST(RestrictedProposalTest, FourCycleForcedMarks) {
  const WeightedGraph g = Ring(4);
  const BalanceSpec s = Bounds(2, 2, 2);
  // Path v1..v4, mark (v2, v3).
  const MarkedTree state(SpanningTree(g, std::vector<int>{0, 1, 2}), {1}, s);
  Rng rng(3, 0);
  for (int i = 0; i < 50; ++i) {
    const ProposalOutcome p = RestrictedBudPropose(state, 0, SamplerConfig{}, s, rng);
    ASSERT_FALSE(p.self_loop) << p.reason;
    EXPECT_EQ(p.added, 3);
    EXPECT_DOUBLE_EQ(p.forward_log_prob, 0.0);
    EXPECT_DOUBLE_EQ(p.reverse_log_prob, 0.0);
    p.proposed->CheckInvariants(s);
  }
  const Neighborhood nb = BuildNeighborhood(state, 3, 0, s);
  EXPECT_EQ(nb.removable.size(), 4u);
  EXPECT_EQ(nb.parts, 2);
  EXPECT_EQ(nb.h.size(), 4);
}

void ExpectSameNeighborhood(const Neighborhood& a, const Neighborhood& b) {
  std::vector<int> ra = a.removable;
  std::vector<int> rb = b.removable;
  std::sort(ra.begin(), ra.end());
  std::sort(rb.begin(), rb.end());
  EXPECT_EQ(ra, rb);
  std::vector<int> fa = a.far_marks;
  std::vector<int> fb = b.far_marks;
  std::sort(fa.begin(), fa.end());
  std::sort(fb.begin(), fb.end());
  EXPECT_EQ(fa, fb);
  EXPECT_EQ(a.parts, b.parts);
  ASSERT_EQ(a.h.size(), b.h.size());
  for (int v = 0; v < a.h.size(); ++v) {
    EXPECT_EQ(a.h.weight(v), b.h.weight(v));
    EXPECT_EQ(a.h.order_key(v), b.h.order_key(v));
  }
  std::vector<int> la;
  std::vector<int> lb;
  for (const auto& e : a.h.edge_list()) la.push_back(e.label);
  for (const auto& e : b.h.edge_list()) lb.push_back(e.label);
  std::sort(la.begin(), la.end());
  std::sort(lb.begin(), lb.end());
  EXPECT_EQ(la, lb);
}

TEST(RestrictedProposalTest, ForwardReverseSymmetry) {
  const WeightedGraph g = MakeGrid(4, 4, 1);
  const BalanceSpec s = Bounds(4, 3, 5);
  Rng rng(21, 0);
  MarkedTree state = InitState(g, s, InitOptions{}, SamplerConfig{}, rng);
  LogTarget target(g, MeasureSpec{});
  int compared = 0;
  for (int i = 0; i < 10000; ++i) {
    const int d = i % 3;
    Rng probe = rng;
    const ProposalOutcome p = RestrictedBudPropose(state, d, SamplerConfig{}, s, probe);
    if (!p.self_loop) {
      const Neighborhood fwd = BuildNeighborhood(state, p.added, d, s);
      const Neighborhood rev = BuildNeighborhood(*p.proposed, p.removed, d, s);
      ExpectSameNeighborhood(fwd, rev);
      ++compared;
      const auto back = MarkedSetLogProb(DropEdge(rev.h, p.removed), s, rev.parts,
                                         SamplerConfig{}, rev.near_marks);
      ASSERT_TRUE(back.has_value());
      EXPECT_NEAR(*back, p.forward_log_prob, 1e-12);
    }
    MhStep(state, target, d, SamplerConfig{}, s, rng);
    state.CheckInvariants(s);
  }
  EXPECT_GT(compared, 9000);
}

TEST(RestrictedProposalTest, LargeDistanceCoversTree) {
  const WeightedGraph g = MakeGrid(3, 3, 1);
  const BalanceSpec s = Bounds(3, 2, 4);
  Rng rng(2, 0);
  const MarkedTree state = InitState(g, s, InitOptions{}, SamplerConfig{}, rng);
  for (int e : state.tree().NonTreeEdges()) {
    const Neighborhood nb = BuildNeighborhood(state, e, 100, s);
    EXPECT_EQ(nb.h.size(), 9);
    EXPECT_TRUE(nb.far_marks.empty());
    EXPECT_EQ(nb.parts, 3);
  }
}

TEST(MhStepTest, UniformExactBalanceAlwaysAccepts) {
  const WeightedGraph g = MakeGrid(4, 4, 1);
  const BalanceSpec s = Bounds(4, 4, 4);
  Rng rng(5, 0);
  MarkedTree state = InitState(g, s, InitOptions{}, SamplerConfig{}, rng);
  LogTarget target(g, MeasureSpec{});
  for (int i = 0; i < 2000; ++i) {
    const StepOutcome o = MhStep(state, target, 0, SamplerConfig{}, s, rng);
    EXPECT_TRUE(o.accepted || o.self_loop);
  }
}

TEST(InitStateTest, SmallGrid) {
  const WeightedGraph g = MakeGrid(2, 2, 1);
  const BalanceSpec s = Bounds(2, 2, 2);
  Rng rng(6, 0);
  for (InitStrategy strategy : {InitStrategy::kRejection, InitStrategy::kBisection}) {
    for (int i = 0; i < 20; ++i) {
      const MarkedTree m = InitState(g, s, InitOptions{strategy, 1000},
                                     SamplerConfig{}, rng);
      EXPECT_NO_THROW(m.CheckInvariants(s));
    }
  }
}

TEST(InitStateTest, RejectionOnFourByFour) {
  const WeightedGraph g = MakeGrid(4, 4, 1);
  const BalanceSpec s = Bounds(4, 4, 4);
  Rng rng(7, 0);
  const MarkedTree m =
      InitState(g, s, InitOptions{InitStrategy::kRejection, 1000},
                SamplerConfig{}, rng);
  EXPECT_EQ(m.partition().k, 4);
}

TEST(InitStateTest, GiveUp) {
  const WeightedGraph g = MakeGrid(2, 2, 1);
  Rng rng(1, 0);
  try {
    InitState(g, BalanceSpec::FromBounds(5, Rational(1, 2), Rational(1)),
              InitOptions{}, SamplerConfig{}, rng);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kGiveUp);
  }
}

TEST(RunChainTest, ZeroSteps) {
  const WeightedGraph g = MakeGrid(3, 3, 1);
  VectorSink sink;
  Rng rng(1, 0);
  ChainOptions o;
  const ChainSummary s = RunChain(g, Bounds(3, 3, 3), o, rng, sink);
  EXPECT_TRUE(sink.records().empty());
  EXPECT_EQ(s.steps, 0);
  EXPECT_EQ(s.accepted, 0);
  EXPECT_EQ(s.acceptance_rate(), 0.0);
}

std::string TraceBytes(ChainKind kind, std::uint64_t seed) {
  const WeightedGraph g = MakeGrid(3, 4, 1);
  std::ostringstream out;
  JsonlSink sink(out, g);
  Rng rng(seed, 0);
  ChainOptions o;
  o.kind = kind;
  o.steps = 300;
  o.record_every = 7;
  o.emit_assignment = true;
  RunChain(g, Bounds(3, 4, 4), o, rng, sink);
  return out.str();
}

TEST(RunChainTest, DeterministicTraces) {
  for (ChainKind kind : {ChainKind::kBudMarked, ChainKind::kBudTree, ChainKind::kUpDown}) {
    const std::string a = TraceBytes(kind, 42);
    EXPECT_EQ(a, TraceBytes(kind, 42));
    EXPECT_NE(a, TraceBytes(kind, 43));
    EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 300 / 7);
  }
}

TEST(RunChainTest, ObservablesByKind) {
  const WeightedGraph g = MakeGrid(3, 4, 1);
  for (ChainKind kind : {ChainKind::kBudMarked, ChainKind::kBudTree, ChainKind::kUpDown}) {
    VectorSink sink;
    Rng rng(9, 0);
    ChainOptions o;
    o.kind = kind;
    o.steps = 50;
    RunChain(g, Bounds(3, 4, 4), o, rng, sink);
    ASSERT_EQ(sink.records().size(), 50u);
    const TraceRecord& r = sink.records().back();
    EXPECT_EQ(r.kind, ChainName(kind));
    EXPECT_EQ(r.obs.cut_edges.has_value(), kind != ChainKind::kUpDown);
    EXPECT_GT(r.obs.tree_diameter, 0);
  }
  VectorSink sink;
  Rng rng(9, 0);
  ChainOptions o;
  o.kind = ChainKind::kBudTree;
  o.steps = 10;
  RunChain(g, Bounds(3, 3, 5), o, rng, sink);
  EXPECT_FALSE(sink.records().back().obs.cut_edges.has_value());
  EXPECT_FALSE(sink.records().back().internal);
}

TEST(RunChainTest, MarkedChainNeedsGapHypothesis) {
  const WeightedGraph g = MakeGrid(3, 4, 1);
  NullSink sink;
  Rng rng(1, 0);
  ChainOptions o;
  o.steps = 5;
  try {
    RunChain(g, Bounds(3, 2, 6), o, rng, sink);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kGapHypothesis);
  }
}

TEST(ChainNamesTest, RoundTrip) {
  for (ChainKind k : {ChainKind::kBudTree, ChainKind::kBudMarked, ChainKind::kUpDown}) {
    EXPECT_EQ(ParseChainKind(ChainName(k)), k);
  }
  for (MeasureKind k : {MeasureKind::kUniformSplittableTrees, MeasureKind::kUniformForests,
                        MeasureKind::kUniformPartitions, MeasureKind::kCustom}) {
    EXPECT_EQ(ParseMeasureKind(MeasureName(k)), k);
  }
  EXPECT_FALSE(ParseChainKind("recom").has_value());
}

}  // namespace
}  // namespace bud
