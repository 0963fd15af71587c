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

#include <algorithm>
#include <fstream>
#include <istream>
#include <numeric>
#include <sstream>
#include <utility>

#include "bud/error.h"

namespace bud {

using nlohmann::json;

std::uint64_t WeightedGraph::Key(int u, int v) {
  if (u > v) std::swap(u, v);
  return (static_cast<std::uint64_t>(u) << 32) | static_cast<std::uint32_t>(v);
}

int WeightedGraph::AddVertex(std::string id, std::int64_t population,
                             AttrMap attrs) {
  if (population < 0) {
    throw Error(ErrorKind::kInvalidArgument,
                "negative population at vertex '" + id + "'");
  }
  if (index_.count(id) != 0) {
    throw Error(ErrorKind::kParse, "duplicate vertex id '" + id + "'");
  }
  const int v = num_vertices();
  index_.emplace(id, v);
  ids_.push_back(std::move(id));
  population_.push_back(population);
  attrs_.push_back(std::move(attrs));
  adjacency_.emplace_back();
  total_population_ = CheckedAdd(total_population_, population);
  return v;
}

int WeightedGraph::AddEdge(int u, int v) {
  if (u < 0 || v < 0 || u >= num_vertices() || v >= num_vertices()) {
    throw Error(ErrorKind::kInvalidArgument, "edge endpoint out of range");
  }
  if (u == v) {
    throw Error(ErrorKind::kNotSimple, "self-loop at vertex '" + ids_[u] + "'");
  }
  if (u > v) std::swap(u, v);
  if (!edge_index_.emplace(Key(u, v), num_edges()).second) {
    throw Error(ErrorKind::kNotSimple,
                "duplicate edge ['" + ids_[u] + "', '" + ids_[v] + "']");
  }
  const int e = num_edges();
  edges_.push_back({u, v});
  adjacency_[u].push_back({v, e});
  adjacency_[v].push_back({u, e});
  return e;
}

std::optional<int> WeightedGraph::IndexOf(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> WeightedGraph::FindEdge(int u, int v) const {
  auto it = edge_index_.find(Key(u, v));
  if (it == edge_index_.end()) return std::nullopt;
  return it->second;
}

bool WeightedGraph::IsConnected() const {
  std::vector<int> all(num_vertices());
  std::iota(all.begin(), all.end(), 0);
  return InducedConnected(*this, all);
}

bool InducedConnected(const WeightedGraph& graph, std::span<const int> members) {
  if (members.empty()) return false;
  // 0 = outside, 1 = member, 2 = reached
  std::vector<char> state(graph.num_vertices(), 0);
  for (int v : members) state[v] = 1;
  std::vector<int> stack = {members.front()};
  state[members.front()] = 2;
  std::size_t reached = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (const Arc& arc : graph.neighbors(v)) {
      if (state[arc.to] == 1) {
        state[arc.to] = 2;
        ++reached;
        stack.push_back(arc.to);
      }
    }
  }
  return reached == members.size();
}

BalanceSpec BalanceSpec::FromBounds(int k, Rational lower, Rational upper) {
  if (k < 1) {
    throw Error(ErrorKind::kInvalidArgument, "district count must be >= 1");
  }
  if (lower <= 0) {
    throw Error(ErrorKind::kInvalidArgument, "lower bound must be positive");
  }
  if (upper < lower) {
    throw Error(ErrorKind::kInvalidArgument, "upper bound below lower bound");
  }
  return BalanceSpec(k, lower, upper);
}

BalanceSpec BalanceSpec::FromEpsilon(int k, std::int64_t total_population,
                                     Rational epsilon) {
  if (k < 1) {
    throw Error(ErrorKind::kInvalidArgument, "district count must be >= 1");
  }
  if (epsilon < 0) {
    throw Error(ErrorKind::kInvalidArgument, "epsilon must be non-negative");
  }
  const Rational ideal(total_population, k);
  const Rational half_width = Rational(total_population) * epsilon / 2;
  return FromBounds(k, ideal - half_width, ideal + half_width);
}

void BalanceSpec::CheckAgainst(std::int64_t total_population) const {
  const Rational ideal(total_population, k_);
  if (!(lower_ > 0 && lower_ <= ideal && ideal <= upper_)) {
    throw Error(ErrorKind::kInvalidArgument,
                "bounds [" + RationalToString(lower_) + ", " +
                    RationalToString(upper_) + "] do not bracket P/k = " +
                    RationalToString(ideal));
  }
}

bool BalanceSpec::fast_path() const { return lower_ > gap() * k_; }

bool BalanceSpec::SatisfiesMarkedHypothesis() const {
  return lower_ * 2 > upper_;
}

bool BalanceSpec::Contains(std::int64_t weight) const {
  const Rational w(weight);
  return lower_ <= w && w <= upper_;
}

BalanceSpec::Scaled BalanceSpec::scaled() const {
  const std::int64_t scale =
      std::lcm(lower_.denominator(), upper_.denominator());
  return {scale, CheckedMul(lower_.numerator(), scale / lower_.denominator()),
          CheckedMul(upper_.numerator(), scale / upper_.denominator())};
}

std::vector<std::int64_t> DistrictPopulations(const WeightedGraph& graph,
                                              const Partition& partition) {
  std::vector<std::int64_t> pops(partition.k, 0);
  for (int v = 0; v < graph.num_vertices(); ++v) {
    pops[partition.assignment[v]] += graph.population(v);
  }
  return pops;
}

void ValidatePartition(const WeightedGraph& graph, const Partition& partition,
                       const BalanceSpec* spec) {
  if (static_cast<int>(partition.assignment.size()) != graph.num_vertices()) {
    throw Error(ErrorKind::kInvalidArgument,
                "partition does not cover the graph");
  }
  std::vector<std::vector<int>> members(partition.k);
  for (int v = 0; v < graph.num_vertices(); ++v) {
    const int d = partition.assignment[v];
    if (d < 0 || d >= partition.k) {
      throw Error(ErrorKind::kInvalidArgument,
                  "district index out of range at vertex '" + graph.id(v) + "'");
    }
    members[d].push_back(v);
  }
  for (int d = 0; d < partition.k; ++d) {
    if (!InducedConnected(graph, members[d])) {
      throw Error(ErrorKind::kInvalidArgument,
                  "district " + std::to_string(d + 1) +
                      " is empty or disconnected");
    }
  }
  if (spec != nullptr) {
    const auto pops = DistrictPopulations(graph, partition);
    for (int d = 0; d < partition.k; ++d) {
      if (!spec->Contains(pops[d])) {
        throw Error(ErrorKind::kInvalidArgument,
                    "district " + std::to_string(d + 1) + " population " +
                        std::to_string(pops[d]) + " out of bounds");
      }
    }
  }
}

Partition Canonicalize(const Partition& partition) {
  Partition out;
  out.k = partition.k;
  out.assignment.resize(partition.assignment.size());
  std::vector<int> relabel(partition.k, -1);
  int next = 0;
  for (std::size_t v = 0; v < partition.assignment.size(); ++v) {
    int& label = relabel[partition.assignment[v]];
    if (label < 0) label = next++;
    out.assignment[v] = label;
  }
  return out;
}

std::string CanonicalKey(const Partition& partition) {
  const Partition canon = Canonicalize(partition);
  std::string key;
  key.reserve(canon.assignment.size());
  for (int d : canon.assignment) key.push_back(static_cast<char>('A' + d));
  return key;
}

std::int64_t Multigraph::num_edges() const {
  std::int64_t total = 0;
  for (int i = 0; i < size(); ++i) {
    for (int j = i + 1; j < size(); ++j) total += multiplicity[i][j];
  }
  return total;
}

Multigraph Quotient(const WeightedGraph& graph, const Partition& partition) {
  ValidatePartition(graph, partition);
  Multigraph out;
  out.population = DistrictPopulations(graph, partition);
  out.multiplicity.assign(partition.k,
                          std::vector<std::int64_t>(partition.k, 0));
  for (const Edge& e : graph.edges()) {
    const int a = partition.assignment[e.u];
    const int b = partition.assignment[e.v];
    if (a != b) {
      ++out.multiplicity[a][b];
      ++out.multiplicity[b][a];
    }
  }
  return out;
}

std::int64_t InternalEdgeCount(const WeightedGraph& graph,
                               const Partition& partition) {
  std::int64_t count = 0;
  for (const Edge& e : graph.edges()) {
    if (partition.assignment[e.u] == partition.assignment[e.v]) ++count;
  }
  return count;
}

WeightedGraph MakeGrid(int rows, int cols, std::int64_t pop_per_vertex) {
  if (rows < 1 || cols < 1) {
    throw Error(ErrorKind::kInvalidArgument, "grid dimensions must be >= 1");
  }
  if (pop_per_vertex < 1) {
    throw Error(ErrorKind::kInvalidArgument, "grid population must be >= 1");
  }
  WeightedGraph g;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      g.AddVertex("r" + std::to_string(r) + "c" + std::to_string(c),
                  pop_per_vertex);
    }
  }
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int v = r * cols + c;
      if (c + 1 < cols) g.AddEdge(v, v + 1);
      if (r + 1 < rows) g.AddEdge(v, v + cols);
    }
  }
  return g;
}

namespace {

WeightedGraph GraphFromJson(const json& doc) {
  if (!doc.is_object() || !doc.contains("vertices") || !doc.contains("edges") ||
      !doc["vertices"].is_array() || !doc["edges"].is_array()) {
    throw Error(ErrorKind::kParse,
                "graph document needs 'vertices' and 'edges' arrays");
  }
  WeightedGraph g;
  for (const json& vertex : doc["vertices"]) {
    if (!vertex.is_object() || !vertex.contains("id") ||
        !vertex["id"].is_string()) {
      throw Error(ErrorKind::kParse, "vertex entry needs a string 'id'");
    }
    const std::string id = vertex["id"].get<std::string>();
    if (!vertex.contains("pop") || !vertex["pop"].is_number_integer()) {
      throw Error(ErrorKind::kParse,
                  "vertex '" + id + "' needs an integer 'pop'");
    }
    const auto pop = vertex["pop"].get<std::int64_t>();
    if (pop < 0) {
      throw Error(ErrorKind::kParse, "vertex '" + id + "' has negative pop");
    }
    AttrMap attrs;
    if (vertex.contains("attrs")) {
      if (!vertex["attrs"].is_object()) {
        throw Error(ErrorKind::kParse,
                    "vertex '" + id + "' attrs must be an object");
      }
      for (const auto& [name, value] : vertex["attrs"].items()) {
        if (!value.is_number()) {
          throw Error(ErrorKind::kParse, "attribute '" + name + "' of vertex '" +
                                             id + "' is not a number");
        }
        attrs.emplace(name, value.get<double>());
      }
    }
    if (g.IndexOf(id)) {
      throw Error(ErrorKind::kParse, "duplicate vertex id '" + id + "'");
    }
    g.AddVertex(id, pop, std::move(attrs));
  }
  if (g.num_vertices() == 0) {
    throw Error(ErrorKind::kParse, "graph has no vertices");
  }
  for (const json& edge : doc["edges"]) {
    if (!edge.is_array() || edge.size() != 2 || !edge[0].is_string() ||
        !edge[1].is_string()) {
      throw Error(ErrorKind::kParse, "edge entries must be [id, id] pairs");
    }
    int ends[2];
    for (int i = 0; i < 2; ++i) {
      const std::string id = edge[i].get<std::string>();
      auto index = g.IndexOf(id);
      if (!index) {
        throw Error(ErrorKind::kParse, "edge references unknown id '" + id + "'");
      }
      ends[i] = *index;
    }
    g.AddEdge(ends[0], ends[1]);
  }
  if (!g.IsConnected()) {
    throw Error(ErrorKind::kDisconnected, "graph is not connected");
  }
  return g;
}

}  // namespace

WeightedGraph LoadGraph(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("invalid JSON: ") + e.what());
  }
  return GraphFromJson(doc);
}

WeightedGraph LoadGraphFromString(std::string_view text) {
  std::istringstream in{std::string(text)};
  return LoadGraph(in);
}

WeightedGraph LoadGraphFromFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open graph file '" + path + "'");
  return LoadGraph(in);
}

json GraphToJson(const WeightedGraph& graph) {
  json vertices = json::array();
  for (int v = 0; v < graph.num_vertices(); ++v) {
    json entry = {{"id", graph.id(v)}, {"pop", graph.population(v)}};
    json attrs = json::object();
    for (const auto& [name, value] : graph.attrs(v)) attrs[name] = value;
    entry["attrs"] = std::move(attrs);
    vertices.push_back(std::move(entry));
  }
  json edges = json::array();
  for (const Edge& e : graph.edges()) {
    edges.push_back({graph.id(e.u), graph.id(e.v)});
  }
  return {{"vertices", std::move(vertices)}, {"edges", std::move(edges)}};
}

std::string SerializeGraph(const WeightedGraph& graph) {
  return GraphToJson(graph).dump();
}

json PartitionToJson(const WeightedGraph& graph, const Partition& partition) {
  json assignment = json::object();
  for (int v = 0; v < graph.num_vertices(); ++v) {
    assignment[graph.id(v)] = partition.assignment[v] + 1;
  }
  return {{"assignment", std::move(assignment)}};
}

Partition PartitionFromJson(const WeightedGraph& graph, const json& doc) {
  if (!doc.is_object() || !doc.contains("assignment") ||
      !doc["assignment"].is_object()) {
    throw Error(ErrorKind::kParse, "partition document needs 'assignment'");
  }
  Partition p;
  p.assignment.assign(graph.num_vertices(), -1);
  for (const auto& [id, district] : doc["assignment"].items()) {
    auto v = graph.IndexOf(id);
    if (!v) throw Error(ErrorKind::kParse, "unknown vertex id '" + id + "'");
    if (!district.is_number_integer() || district.get<int>() < 1) {
      throw Error(ErrorKind::kParse, "district for '" + id + "' must be >= 1");
    }
    p.assignment[*v] = district.get<int>() - 1;
    p.k = std::max(p.k, district.get<int>());
  }
  for (int v = 0; v < graph.num_vertices(); ++v) {
    if (p.assignment[v] < 0) {
      throw Error(ErrorKind::kParse, "vertex '" + graph.id(v) + "' unassigned");
    }
  }
  return p;
}

}  // namespace bud
