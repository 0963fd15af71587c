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

#include "bud/diagnostics.h"

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "bud/error.h"
#include "bud/rational.h"
#include "bud/rng.h"

namespace bud {
namespace {

WeightedGraph Ring(int n) {
  WeightedGraph g;
  for (int v = 0; v < n; ++v) g.AddVertex("v" + std::to_string(v + 1), 1);
  for (int v = 0; v < n; ++v) g.AddEdge(v, (v + 1) % n);
  return g;
}

TEST(CutEdgesTest, Examples) {
  EXPECT_EQ(CutEdges(Ring(4), Partition{2, {0, 0, 1, 1}}), 2);
  EXPECT_EQ(CutEdges(Ring(4), Partition{1, {0, 0, 0, 0}}), 0);
  EXPECT_EQ(CutEdges(MakeGrid(2, 3, 1), Partition{2, {0, 0, 0, 1, 1, 1}}), 3);
}

TEST(IsoperimetricRatiosTest, Examples) {
  EXPECT_EQ(IsoperimetricRatios(Ring(4), Partition{2, {0, 0, 1, 1}}),
            (std::vector<Rational>{Rational(2), Rational(2)}));
  EXPECT_EQ(IsoperimetricRatios(Ring(4), Partition{1, {0, 0, 0, 0}}),
            (std::vector<Rational>{Rational(0)}));
  EXPECT_EQ(IsoperimetricRatios(MakeGrid(2, 3, 1), Partition{2, {0, 0, 0, 1, 1, 1}}),
            (std::vector<Rational>{Rational(3), Rational(3)}));
  // 3x3 grid: corner singleton has 2 leaving edges, the rest 2 too.
  EXPECT_EQ(IsoperimetricRatios(MakeGrid(3, 3, 1),
                                Partition{2, {0, 1, 1, 1, 1, 1, 1, 1, 1}}),
            (std::vector<Rational>{Rational(1, 2), Rational(4)}));
}

WeightedGraph SharesGraph() {
  return LoadGraphFromString(R"({"vertices":[
    {"id":"a","pop":1,"attrs":{"r":1,"t":2}},
    {"id":"b","pop":1,"attrs":{"r":1,"t":3}},
    {"id":"c","pop":1,"attrs":{"r":3,"t":5}},
    {"id":"d","pop":1,"attrs":{"r":0,"t":0}}],
    "edges":[["a","b"],["b","c"],["c","d"]]})");
}

TEST(RankedSharesTest, SortedAndRelabelInvariant) {
  const WeightedGraph g = SharesGraph();
  const std::vector<double> a = RankedShares(g, Partition{2, {0, 0, 1, 1}}, "r", "t");
  const std::vector<double> b = RankedShares(g, Partition{2, {1, 1, 0, 0}}, "r", "t");
  EXPECT_EQ(a, b);
  ASSERT_EQ(a.size(), 2u);
  EXPECT_DOUBLE_EQ(a[0], 0.4);
  EXPECT_DOUBLE_EQ(a[1], 0.6);
}

TEST(RankedSharesTest, UniformAttributes) {
  WeightedGraph g;
  for (int v = 0; v < 6; ++v) g.AddVertex(std::to_string(v), 1, {{"x", 2}, {"y", 5}});
  for (int v = 0; v + 1 < 6; ++v) g.AddEdge(v, v + 1);
  const std::vector<double> s = RankedShares(g, Partition{3, {0, 0, 1, 1, 2, 2}}, "x", "y");
  for (double x : s) EXPECT_DOUBLE_EQ(x, 0.4);
}

TEST(RankedSharesTest, Errors) {
  const WeightedGraph g = SharesGraph();
  EXPECT_THROW(RankedShares(g, Partition{2, {0, 0, 1, 1}}, "r", "missing"), Error);
  EXPECT_THROW(RankedShares(g, Partition{2, {0, 0, 0, 1}}, "r", "t"), Error);
}

TEST(AutocorrelationTest, Examples) {
  const std::vector<double> constant(100, 3.0);
  const std::vector<double> rc = Autocorrelation(constant, 5);
  EXPECT_EQ(rc[0], 1.0);
  for (int t = 1; t <= 5; ++t) EXPECT_EQ(rc[t], 0.0);

  std::vector<double> alt(1000);
  for (int i = 0; i < 1000; ++i) alt[i] = i % 2 == 0 ? 1.0 : -1.0;
  EXPECT_NEAR(Autocorrelation(alt, 1)[1], -1.0, 2e-3);

  Rng rng(1, 0);
  std::vector<double> iid(100000);
  for (double& x : iid) x = rng.Uniform();
  EXPECT_LT(std::abs(Autocorrelation(iid, 1)[1]), 0.02);

  EXPECT_THROW(Autocorrelation(std::vector<double>{1, 2, 3}, 3), Error);
}

TEST(AutocorrelationTest, BoundedForRandomInputs) {
  Rng rng(2, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng.Index(40));
    std::vector<double> s(n);
    for (double& x : s) x = std::floor(rng.Uniform() * 4) - 2;
    for (double r : Autocorrelation(s, n - 1)) {
      EXPECT_LE(std::abs(r), 1.0 + 1e-12);
    }
  }
}

TEST(EffectiveSampleSizeTest, Examples) {
  Rng rng(3, 0);
  const int n = 100000;
  std::vector<double> iid(n);
  for (double& x : iid) x = rng.Uniform();
  EXPECT_NEAR(EffectiveSampleSize(iid), n, 0.1 * n);

  std::vector<double> doubled(n);
  for (int i = 0; i < n; i += 2) doubled[i] = doubled[i + 1] = rng.Uniform();
  // rho_1 = 1/2, rho_t = 0 beyond: n / (1 + 2 * 1/2).
  EXPECT_NEAR(EffectiveSampleSize(doubled), n / 2.0, 0.1 * n / 2.0);

  std::vector<double> alt(n);
  for (int i = 0; i < n; ++i) alt[i] = i % 2 == 0 ? 1.0 : -1.0;
  const double ess = EffectiveSampleSize(alt);
  EXPECT_GT(ess, n);
  EXPECT_TRUE(std::isfinite(ess));

  std::vector<double> ar(n);
  double x = 0;
  for (double& v : ar) {
    x = 0.9 * x + (rng.Uniform() - 0.5);
    v = x;
  }
  // AR(1) with phi = 0.9: tau = (1 + phi) / (1 - phi) = 19.
  EXPECT_NEAR(EffectiveSampleSize(ar), n / 19.0, 0.3 * n / 19.0);

  EXPECT_THROW(EffectiveSampleSize(std::vector<double>(50, 1.0)), Error);
}

TEST(HistogramTest, Binning) {
  Histogram h(0.002);
  h.Add(0.0);
  h.Add(0.0019);
  h.Add(0.002);
  h.Add(0.5, 3);
  EXPECT_EQ(h.total(), 6);
  EXPECT_EQ(h.bins().at(0), 2);
  EXPECT_EQ(h.bins().at(1), 1);
  EXPECT_EQ(h.bins().at(250), 3);
  EXPECT_THROW(Histogram(0.0), Error);
}

TEST(TvDistanceTest, Examples) {
  Histogram a(1.0);
  a.Add(0);
  a.Add(1);
  Histogram b(1.0);
  b.Add(0, 2);
  EXPECT_DOUBLE_EQ(TvDistance(a, b), 0.5);
  EXPECT_DOUBLE_EQ(TvDistance(a, a), 0.0);
  Histogram c(1.0);
  c.Add(7, 4);
  EXPECT_DOUBLE_EQ(TvDistance(a, c), 1.0);
  EXPECT_THROW(TvDistance(a, Histogram(2.0)), Error);
  EXPECT_THROW(TvDistance(a, Histogram(1.0)), Error);
}

TEST(TvDistanceTest, MetricProperties) {
  Rng rng(4, 0);
  auto random_hist = [&] {
    Histogram h(1.0);
    const int n = 1 + static_cast<int>(rng.Index(20));
    for (int i = 0; i < n; ++i) h.Add(static_cast<double>(rng.Index(6)));
    return h;
  };
  for (int trial = 0; trial < 500; ++trial) {
    const Histogram a = random_hist();
    const Histogram b = random_hist();
    const Histogram c = random_hist();
    const double ab = TvDistance(a, b);
    EXPECT_DOUBLE_EQ(ab, TvDistance(b, a));
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 1.0 + 1e-12);
    EXPECT_LE(TvDistance(a, c), ab + TvDistance(b, c) + 1e-12);
  }
}

}  // namespace
}  // namespace bud
