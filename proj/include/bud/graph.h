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

#ifndef BUD_GRAPH_H_
#define BUD_GRAPH_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "bud/rational.h"
#include "json.hpp"

namespace bud {

struct Edge {
  int u;
  int v;  // u < v

  int Other(int w) const { return w == u ? v : u; }
};

struct Arc {
  int to;
  int edge;
};

using AttrMap = std::map<std::string, double>;

// Simple undirected vertex-weighted graph. Vertex ids are arbitrary strings;
// the dense index assigned at insertion is the canonical vertex order used by
// every downstream sampler. Immutable once built, so it can be shared by
// concurrently running chains.
class WeightedGraph {
 public:
  int AddVertex(std::string id, std::int64_t population, AttrMap attrs = {});
  int AddEdge(int u, int v);

  int num_vertices() const { return static_cast<int>(ids_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  const std::string& id(int v) const { return ids_[v]; }
  std::optional<int> IndexOf(std::string_view id) const;
  std::int64_t population(int v) const { return population_[v]; }
  std::int64_t total_population() const { return total_population_; }
  const AttrMap& attrs(int v) const { return attrs_[v]; }

  const Edge& edge(int e) const { return edges_[e]; }
  std::span<const Edge> edges() const { return edges_; }
  std::span<const Arc> neighbors(int v) const { return adjacency_[v]; }
  int degree(int v) const { return static_cast<int>(adjacency_[v].size()); }
  std::optional<int> FindEdge(int u, int v) const;

  bool IsConnected() const;

 private:
  static std::uint64_t Key(int u, int v);

  std::vector<std::string> ids_;
  std::unordered_map<std::string, int> index_;
  std::vector<std::int64_t> population_;
  std::vector<AttrMap> attrs_;
  std::vector<Edge> edges_;
  std::vector<std::vector<Arc>> adjacency_;
  std::unordered_map<std::uint64_t, int> edge_index_;
  std::int64_t total_population_ = 0;
};

// True iff the vertices in `members` induce a connected subgraph. The empty
// set is not connected.
bool InducedConnected(const WeightedGraph& graph, std::span<const int> members);

// District count plus exact closed bounds [lower, upper] on each district's
// population.
class BalanceSpec {
 public:
  static BalanceSpec FromBounds(int k, Rational lower, Rational upper);

  // Maps the normalized tolerance convention (district weights within
  // P/k +- P*epsilon/2, with P the total population) to absolute bounds.
  static BalanceSpec FromEpsilon(int k, std::int64_t total_population,
                                 Rational epsilon);

  int k() const { return k_; }
  const Rational& lower() const { return lower_; }
  const Rational& upper() const { return upper_; }
  Rational gap() const { return upper_ - lower_; }

  // Throws unless 0 < L <= P/k <= U.
  void CheckAgainst(std::int64_t total_population) const;

  // L > k * gap: a total weight in [kL, kU] then admits exactly one feasible
  // district count, which is what the single-table splittability DP needs.
  bool fast_path() const;

  // 2L > U, the hypothesis under which viable edges of a leaf lie on its
  // branch. Required by the marked-edge sampler.
  bool SatisfiesMarkedHypothesis() const;

  bool Contains(std::int64_t weight) const;

  // Smallest common scale making both bounds integral.
  struct Scaled {
    std::int64_t scale;
    std::int64_t lower;
    std::int64_t upper;
  };
  Scaled scaled() const;

 private:
  BalanceSpec(int k, Rational lower, Rational upper)
      : k_(k), lower_(lower), upper_(upper) {}

  int k_;
  Rational lower_;
  Rational upper_;
};

// District assignment, 0-based internally; exported 1-based.
struct Partition {
  int k = 0;
  std::vector<int> assignment;
};

std::vector<std::int64_t> DistrictPopulations(const WeightedGraph& graph,
                                              const Partition& partition);

// Throws Error(kInvalidArgument) when a district index is out of range, a
// district is empty or disconnected, or (when `spec` is given) a district
// population falls outside the bounds.
void ValidatePartition(const WeightedGraph& graph, const Partition& partition,
                       const BalanceSpec* spec = nullptr);

// Relabels districts by first appearance in vertex order.
Partition Canonicalize(const Partition& partition);
std::string CanonicalKey(const Partition& partition);

// Symmetric multiplicity matrix with zero diagonal plus node populations.
struct Multigraph {
  std::vector<std::int64_t> population;
  std::vector<std::vector<std::int64_t>> multiplicity;

  int size() const { return static_cast<int>(multiplicity.size()); }
  std::int64_t num_edges() const;
};

// G/P: one node per district, m[i][j] = number of host edges between
// districts i and j.
Multigraph Quotient(const WeightedGraph& graph, const Partition& partition);

// Number of internal edges (both endpoints in one district).
std::int64_t InternalEdgeCount(const WeightedGraph& graph,
                               const Partition& partition);

WeightedGraph MakeGrid(int rows, int cols, std::int64_t pop_per_vertex);

WeightedGraph LoadGraph(std::istream& in);
WeightedGraph LoadGraphFromString(std::string_view text);
WeightedGraph LoadGraphFromFile(const std::string& path);
nlohmann::json GraphToJson(const WeightedGraph& graph);
// Canonical compact serialization; LoadGraph round-trips it exactly.
std::string SerializeGraph(const WeightedGraph& graph);

nlohmann::json PartitionToJson(const WeightedGraph& graph,
                               const Partition& partition);
Partition PartitionFromJson(const WeightedGraph& graph,
                            const nlohmann::json& doc);

}  // namespace bud

#endif  // BUD_GRAPH_H_
