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

#ifndef BUD_TRACE_H_
#define BUD_TRACE_H_

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bud/graph.h"
#include "bud/spanning_tree.h"

namespace bud {

// A share observable: per-district sum(numerator) / sum(denominator).
struct ShareSpec {
  std::string numerator;
  std::string denominator;

  std::string name() const { return numerator + ":" + denominator; }
};

// Parses "NUM:DEN".
ShareSpec ParseShareSpec(const std::string& text);

struct Observables {
  std::optional<std::int64_t> cut_edges;
  int tree_diameter = 0;
  std::vector<double> iso;
  std::map<std::string, std::vector<double>> shares;
};

// `partition` may be null when the state carries no partition.
Observables ComputeObservables(const SpanningTree& tree,
                               const Partition* partition,
                               const std::vector<ShareSpec>& shares);

struct TraceRecord {
  std::int64_t step = 0;
  std::string kind;
  bool accepted = false;
  bool internal = false;
  Observables obs;
  std::optional<Partition> assignment;
};

nlohmann::json TraceRecordToJson(const WeightedGraph& graph,
                                 const TraceRecord& record);

// Reads everything but the assignment.
TraceRecord TraceRecordFromJson(const nlohmann::json& doc);

class TraceSink {
 public:
  virtual ~TraceSink() = default;
  virtual void Write(const TraceRecord& record) = 0;
};

class NullSink : public TraceSink {
 public:
  void Write(const TraceRecord&) override {}
};

class VectorSink : public TraceSink {
 public:
  void Write(const TraceRecord& record) override { records_.push_back(record); }
  const std::vector<TraceRecord>& records() const { return records_; }

 private:
  std::vector<TraceRecord> records_;
};

// One JSON object per line. An optional first line {"header": {...}} carries
// run metadata; readers skip it.
class JsonlSink : public TraceSink {
 public:
  JsonlSink(std::ostream& out, const WeightedGraph& graph)
      : out_(out), graph_(graph) {}

  void WriteHeader(const nlohmann::json& header);
  void Write(const TraceRecord& record) override;

 private:
  std::ostream& out_;
  const WeightedGraph& graph_;
};

// Parses a JSONL trace, skipping header lines.
std::vector<TraceRecord> ReadTrace(std::istream& in);

}  // namespace bud

#endif  // BUD_TRACE_H_
