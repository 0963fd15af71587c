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

#include "bud/graph.h"

#include <sstream>

#include <gtest/gtest.h>

#include "bud/error.h"
#include "bud/rational.h"

namespace bud {
namespace {

ErrorKind KindOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorKind::kInvalidArgument;
}

TEST(GridTest, ShapeAndIds) {
  const WeightedGraph g = MakeGrid(4, 4, 1);
  EXPECT_EQ(g.num_vertices(), 16);
  EXPECT_EQ(g.num_edges(), 24);
  EXPECT_EQ(g.total_population(), 16);
  EXPECT_EQ(g.id(5), "r1c1");
  EXPECT_TRUE(g.FindEdge(0, 1).has_value());
  EXPECT_TRUE(g.FindEdge(0, 4).has_value());
  EXPECT_FALSE(g.FindEdge(0, 5).has_value());
  EXPECT_EQ(g.degree(0), 2);
  EXPECT_EQ(g.degree(5), 4);
  EXPECT_TRUE(g.IsConnected());
}

TEST(GridTest, RejectsEmptyDimensions) {
  EXPECT_EQ(KindOf([] { MakeGrid(0, 3, 1); }), ErrorKind::kInvalidArgument);
  EXPECT_EQ(KindOf([] { MakeGrid(2, 2, 0); }), ErrorKind::kInvalidArgument);
}

TEST(GraphTest, RejectsSelfLoopsAndDuplicates) {
  WeightedGraph g;
  g.AddVertex("a", 1);
  g.AddVertex("b", 1);
  g.AddEdge(0, 1);
  EXPECT_EQ(KindOf([&] { g.AddEdge(1, 0); }), ErrorKind::kNotSimple);
  EXPECT_EQ(KindOf([&] { g.AddEdge(1, 1); }), ErrorKind::kNotSimple);
  EXPECT_EQ(KindOf([&] { g.AddVertex("a", 2); }), ErrorKind::kParse);
}

TEST(GraphIoTest, RoundTrip) {
  WeightedGraph g = MakeGrid(2, 3, 7);
  const std::string text = SerializeGraph(g);
  const WeightedGraph h = LoadGraphFromString(text);
  EXPECT_EQ(SerializeGraph(h), text);
  EXPECT_EQ(h.num_edges(), 7);
  EXPECT_EQ(h.total_population(), 42);
}

TEST(GraphIoTest, Attributes) {
  const WeightedGraph g = LoadGraphFromString(
      R"({"vertices":[{"id":"x","pop":3,"attrs":{"m":1.5}},{"id":"y","pop":4}],)"
      R"("edges":[["x","y"]]})");
  EXPECT_DOUBLE_EQ(g.attrs(0).at("m"), 1.5);
  EXPECT_TRUE(g.attrs(1).empty());
}

TEST(GraphIoTest, ParseErrors) {
  EXPECT_EQ(KindOf([] { LoadGraphFromString("{"); }), ErrorKind::kParse);
  EXPECT_EQ(KindOf([] {
              LoadGraphFromString(
                  R"({"vertices":[{"id":"x","pop":1.5}],"edges":[]})");
            }),
            ErrorKind::kParse);
  EXPECT_EQ(KindOf([] {
              LoadGraphFromString(
                  R"({"vertices":[{"id":"x","pop":1}],"edges":[["x","q"]]})");
            }),
            ErrorKind::kParse);
  try {
    LoadGraphFromString(
        R"({"vertices":[{"id":"x","pop":1}],"edges":[["x","ghost"]]})");
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("ghost"), std::string::npos);
  }
  EXPECT_EQ(KindOf([] {
              LoadGraphFromString(
                  R"({"vertices":[{"id":"x","pop":1},{"id":"y","pop":1}],)"
                  R"("edges":[]})");
            }),
            ErrorKind::kDisconnected);
  EXPECT_EQ(KindOf([] { LoadGraphFromFile("/nonexistent/graph.json"); }),
            ErrorKind::kIo);
}

TEST(BalanceSpecTest, FromEpsilon) {
  const BalanceSpec s = BalanceSpec::FromEpsilon(4, 16, Rational(1, 4));
  EXPECT_EQ(s.lower(), Rational(2));
  EXPECT_EQ(s.upper(), Rational(6));
  EXPECT_EQ(s.gap(), Rational(4));
  const BalanceSpec exact = BalanceSpec::FromEpsilon(4, 16, Rational(0));
  EXPECT_EQ(exact.lower(), exact.upper());
  EXPECT_TRUE(exact.fast_path());
  EXPECT_TRUE(exact.SatisfiesMarkedHypothesis());
}

TEST(BalanceSpecTest, Scaled) {
  const BalanceSpec s = BalanceSpec::FromBounds(3, Rational(5, 2), Rational(10, 3));
  const BalanceSpec::Scaled sc = s.scaled();
  EXPECT_EQ(sc.scale, 6);
  EXPECT_EQ(sc.lower, 15);
  EXPECT_EQ(sc.upper, 20);
}

TEST(BalanceSpecTest, FastPathGate) {
  // L > k * gap.
  EXPECT_TRUE(BalanceSpec::FromBounds(2, Rational(5), Rational(7, 1)).fast_path());
  EXPECT_FALSE(BalanceSpec::FromBounds(2, Rational(4), Rational(6)).fast_path());
  EXPECT_FALSE(BalanceSpec::FromBounds(2, Rational(2), Rational(3)).fast_path());
}

TEST(BalanceSpecTest, Validation) {
  EXPECT_EQ(KindOf([] { BalanceSpec::FromBounds(0, Rational(1), Rational(2)); }),
            ErrorKind::kInvalidArgument);
  EXPECT_EQ(KindOf([] { BalanceSpec::FromBounds(2, Rational(3), Rational(2)); }),
            ErrorKind::kInvalidArgument);
  const BalanceSpec s = BalanceSpec::FromBounds(2, Rational(3), Rational(5));
  EXPECT_NO_THROW(s.CheckAgainst(8));
  EXPECT_THROW(s.CheckAgainst(12), Error);
  EXPECT_TRUE(s.Contains(3));
  EXPECT_TRUE(s.Contains(5));
  EXPECT_FALSE(s.Contains(6));
}

TEST(PartitionTest, ValidateAndCanonical) {
  const WeightedGraph g = MakeGrid(2, 2, 1);
  Partition p{2, {1, 1, 0, 0}};
  EXPECT_NO_THROW(ValidatePartition(g, p));
  EXPECT_EQ(CanonicalKey(p), "AABB");
  Partition diagonal{2, {0, 1, 1, 0}};
  EXPECT_THROW(ValidatePartition(g, diagonal), Error);
  const BalanceSpec tight = BalanceSpec::FromBounds(2, Rational(2), Rational(2));
  Partition lopsided{2, {0, 0, 0, 1}};
  EXPECT_NO_THROW(ValidatePartition(g, lopsided));
  EXPECT_THROW(ValidatePartition(g, lopsided, &tight), Error);
}

TEST(PartitionTest, QuotientAndJson) {
  const WeightedGraph g = MakeGrid(2, 3, 1);
  Partition p{2, {0, 0, 1, 0, 1, 1}};
  const Multigraph q = Quotient(g, p);
  EXPECT_EQ(q.size(), 2);
  EXPECT_EQ(q.multiplicity[0][1], 3);
  EXPECT_EQ(q.num_edges(), 3);
  EXPECT_EQ(InternalEdgeCount(g, p), 4);
  const Partition back = PartitionFromJson(g, PartitionToJson(g, p));
  EXPECT_EQ(back.assignment, p.assignment);
  EXPECT_EQ(PartitionToJson(g, p)["assignment"]["r0c0"], 1);
}

TEST(RationalTest, Parse) {
  EXPECT_EQ(ParseRational("7/2"), Rational(7, 2));
  EXPECT_EQ(ParseRational("0.025"), Rational(1, 40));
  EXPECT_EQ(ParseRational("-3"), Rational(-3));
  EXPECT_EQ(RationalToString(Rational(6, 4)), "3/2");
  EXPECT_THROW(ParseRational("1/0"), Error);
  EXPECT_THROW(ParseRational("abc"), Error);
  EXPECT_THROW(CheckedMul(INT64_MAX, 2), Error);
}

}  // namespace
}  // namespace bud
