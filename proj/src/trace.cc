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

#include "bud/trace.h"

#include <istream>

#include "bud/diagnostics.h"
#include "bud/error.h"

namespace bud {

using nlohmann::json;

ShareSpec ParseShareSpec(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == text.size()) {
    throw Error(ErrorKind::kInvalidArgument,
                "share spec must look like NUM:DEN, got '" + text + "'");
  }
  return {text.substr(0, colon), text.substr(colon + 1)};
}

Observables ComputeObservables(const SpanningTree& tree,
                               const Partition* partition,
                               const std::vector<ShareSpec>& shares) {
  Observables obs;
  obs.tree_diameter = TreeDiameter(tree);
  if (partition == nullptr) return obs;
  const WeightedGraph& graph = tree.graph();
  obs.cut_edges = CutEdges(graph, *partition);
  for (const Rational& r : IsoperimetricRatios(graph, *partition)) {
    obs.iso.push_back(ToDouble(r));
  }
  for (const ShareSpec& s : shares) {
    obs.shares[s.name()] =
        RankedShares(graph, *partition, s.numerator, s.denominator);
  }
  return obs;
}

json TraceRecordToJson(const WeightedGraph& graph, const TraceRecord& record) {
  json obs = {{"cut_edges", nullptr},
              {"tree_diameter", record.obs.tree_diameter},
              {"iso", record.obs.iso},
              {"shares", json::object()}};
  if (record.obs.cut_edges) obs["cut_edges"] = *record.obs.cut_edges;
  for (const auto& [name, values] : record.obs.shares) {
    obs["shares"][name] = values;
  }
  json doc = {{"step", record.step},
              {"kind", record.kind},
              {"accepted", record.accepted},
              {"internal", record.internal},
              {"obs", std::move(obs)}};
  if (record.assignment) {
    doc["assignment"] = PartitionToJson(graph, *record.assignment)["assignment"];
  }
  return doc;
}

TraceRecord TraceRecordFromJson(const json& doc) {
  TraceRecord r;
  try {
    r.step = doc.at("step").get<std::int64_t>();
    r.kind = doc.at("kind").get<std::string>();
    r.accepted = doc.at("accepted").get<bool>();
    r.internal = doc.at("internal").get<bool>();
    const json& obs = doc.at("obs");
    if (!obs.at("cut_edges").is_null()) {
      r.obs.cut_edges = obs.at("cut_edges").get<std::int64_t>();
    }
    r.obs.tree_diameter = obs.at("tree_diameter").get<int>();
    r.obs.iso = obs.at("iso").get<std::vector<double>>();
    for (const auto& [name, values] : obs.at("shares").items()) {
      r.obs.shares[name] = values.get<std::vector<double>>();
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("malformed trace record: ") + e.what());
  }
  return r;
}

void JsonlSink::WriteHeader(const json& header) {
  out_ << json{{"header", header}}.dump() << '\n';
  if (!out_) throw Error(ErrorKind::kIo, "failed writing trace header");
}

void JsonlSink::Write(const TraceRecord& record) {
  out_ << TraceRecordToJson(graph_, record).dump() << '\n';
  if (!out_) throw Error(ErrorKind::kIo, "failed writing trace record");
}

std::vector<TraceRecord> ReadTrace(std::istream& in) {
  std::vector<TraceRecord> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::kParse,
                  "trace line " + std::to_string(line_no) + ": " + e.what());
    }
    if (doc.contains("header")) continue;
    out.push_back(TraceRecordFromJson(doc));
  }
  if (in.bad()) throw Error(ErrorKind::kIo, "failed reading trace");
  return out;
}

}  // namespace bud
