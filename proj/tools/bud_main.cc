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

#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "bud/acceptance.h"
#include "bud/chains.h"
#include "bud/diagnostics.h"
#include "bud/error.h"
#include "bud/graph.h"
#include "bud/matrix_tree.h"
#include "bud/oracle.h"
#include "bud/rational.h"
#include "bud/rng.h"
#include "bud/trace.h"
#include "bud/weighted_tree.h"

namespace bud {
namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GraphArgs {
  std::string path;
  int rows = 0;
  int cols = 0;
  std::int64_t pop = 1;
};

struct SpecArgs {
  int k = 0;
  std::string epsilon;
  std::string lower;
  std::string upper;
};

void AddGraphOptions(CLI::App* cmd, GraphArgs& g) {
  cmd->add_option("--graph", g.path, "Graph JSON file");
  cmd->add_option("--rows", g.rows, "Grid rows when no --graph is given");
  cmd->add_option("--cols", g.cols, "Grid columns when no --graph is given");
  cmd->add_option("--pop", g.pop, "Population per grid vertex");
}

void AddSpecOptions(CLI::App* cmd, SpecArgs& s) {
  cmd->add_option("--k", s.k, "Number of districts")->required();
  cmd->add_option("--epsilon", s.epsilon, "Relative tolerance, e.g. 0 or 1/10");
  cmd->add_option("--lower", s.lower, "Lower district population bound");
  cmd->add_option("--upper", s.upper, "Upper district population bound");
}

WeightedGraph MakeGraph(const GraphArgs& g) {
  if (!g.path.empty()) {
    if (g.rows != 0 || g.cols != 0) {
      throw UsageError("use either --graph or --rows/--cols");
    }
    return LoadGraphFromFile(g.path);
  }
  if (g.rows <= 0 || g.cols <= 0 || g.pop <= 0) {
    throw UsageError("need --graph, or positive --rows, --cols and --pop");
  }
  return MakeGrid(g.rows, g.cols, g.pop);
}

std::string GraphLabel(const GraphArgs& g) {
  if (!g.path.empty()) return g.path;
  return "grid:" + std::to_string(g.rows) + "x" + std::to_string(g.cols) + "x" +
         std::to_string(g.pop);
}

BalanceSpec MakeSpec(const SpecArgs& s, const WeightedGraph& graph) {
  const bool has_eps = !s.epsilon.empty();
  const bool has_bounds = !s.lower.empty() || !s.upper.empty();
  if (has_eps == has_bounds) {
    throw UsageError("give exactly one of --epsilon or --lower/--upper");
  }
  if (has_bounds && (s.lower.empty() || s.upper.empty())) {
    throw UsageError("--lower and --upper go together");
  }
  const BalanceSpec spec =
      has_eps ? BalanceSpec::FromEpsilon(s.k, graph.total_population(),
                                         ParseRational(s.epsilon))
              : BalanceSpec::FromBounds(s.k, ParseRational(s.lower),
                                        ParseRational(s.upper));
  spec.CheckAgainst(graph.total_population());
  return spec;
}

void WriteText(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  out << text;
  if (!out) throw Error(ErrorKind::kIo, "cannot write '" + path + "'");
}

// grid

struct GridArgs {
  int rows = 0;
  int cols = 0;
  std::int64_t pop = 1;
  std::string out;
};

int CmdGrid(const GridArgs& a) {
  if (a.rows <= 0 || a.cols <= 0 || a.pop <= 0) {
    throw UsageError("--rows, --cols and --pop must be positive");
  }
  WriteText(a.out, GraphToJson(MakeGrid(a.rows, a.cols, a.pop)).dump(2) + "\n");
  return kExitOk;
}

// run

struct RunArgs {
  GraphArgs graph;
  SpecArgs spec;
  std::string chain = "bud-marked";
  std::string measure = "uniform-splittable";
  std::optional<double> beta;
  std::int64_t steps = 0;
  std::int64_t record_every = 1;
  int d = 0;
  double p = 0.25;
  std::uint64_t seed = 1;
  std::string init = "bisection";
  std::int64_t init_attempts = 100000;
  std::string out;
  int chains = 1;
  std::vector<std::string> shares;
  bool emit_assignment = false;
  bool track_partitions = false;
};

std::string TracePath(const RunArgs& a, int chain) {
  if (a.chains == 1) return a.out + ".jsonl";
  return a.out + "." + std::to_string(chain) + ".jsonl";
}

int CmdRun(const RunArgs& a) {
  if (a.steps < 0 || a.record_every < 1 || a.d < 0 || a.chains < 1) {
    throw UsageError("need --steps >= 0, --record-every >= 1, --d >= 0, --chains >= 1");
  }
  const WeightedGraph graph = MakeGraph(a.graph);
  const BalanceSpec spec = MakeSpec(a.spec, graph);
  ChainOptions options;
  const auto kind = ParseChainKind(a.chain);
  if (!kind) throw UsageError("unknown chain '" + a.chain + "'");
  options.kind = *kind;
  const auto measure = ParseMeasureKind(a.measure);
  if (!measure) throw UsageError("unknown measure '" + a.measure + "'");
  if (*measure == MeasureKind::kCustom) {
    if (!a.beta) throw UsageError("--measure custom needs --beta");
    options.measure = CutEdgeMeasure(*a.beta);
  } else {
    if (a.beta) throw UsageError("--beta only applies to --measure custom");
    options.measure.kind = *measure;
  }
  if (a.init == "rejection") {
    options.init.strategy = InitStrategy::kRejection;
  } else if (a.init == "bisection") {
    options.init.strategy = InitStrategy::kBisection;
  } else {
    throw UsageError("unknown init strategy '" + a.init + "'");
  }
  options.init.max_attempts = a.init_attempts;
  options.steps = a.steps;
  options.record_every = a.record_every;
  options.d = a.d;
  options.sampler.p = a.p;
  options.sampler.Validate();
  options.emit_assignment = a.emit_assignment;
  options.track_partitions = a.track_partitions;
  for (const std::string& s : a.shares) options.shares.push_back(ParseShareSpec(s));
  for (const ShareSpec& s : options.shares) {
    for (int v = 0; v < graph.num_vertices(); ++v) {
      if (!graph.attrs(v).count(s.numerator) || !graph.attrs(v).count(s.denominator)) {
        throw UsageError("share '" + s.name() + "' refers to attributes missing on '" +
                         graph.id(v) + "'");
      }
    }
  }

  struct Slot {
    std::unique_ptr<std::ofstream> file;
    std::unique_ptr<TraceSink> sink;
    ChainSummary summary;
    double seconds = 0;
    std::exception_ptr error;
  };
  std::vector<Slot> slots(a.chains);
  for (int i = 0; i < a.chains; ++i) {
    Slot& slot = slots[i];
    if (a.out.empty()) {
      slot.sink = std::make_unique<NullSink>();
      continue;
    }
    const std::string path = TracePath(a, i);
    slot.file = std::make_unique<std::ofstream>(path);
    if (!*slot.file) throw Error(ErrorKind::kIo, "cannot write '" + path + "'");
    auto sink = std::make_unique<JsonlSink>(*slot.file, graph);
    sink->WriteHeader({{"graph", GraphLabel(a.graph)},
                       {"k", spec.k()},
                       {"lower", RationalToString(spec.lower())},
                       {"upper", RationalToString(spec.upper())},
                       {"chain", a.chain},
                       {"measure", a.measure},
                       {"steps", a.steps},
                       {"record_every", a.record_every},
                       {"d", a.d},
                       {"p", a.p},
                       {"seed", a.seed},
                       {"chain_index", i},
                       {"init", a.init}});
    slot.sink = std::move(sink);
  }
  auto work = [&](int i) {
    Slot& slot = slots[i];
    try {
      Rng rng(a.seed, static_cast<std::uint64_t>(i));
      const auto start = std::chrono::steady_clock::now();
      slot.summary = RunChain(graph, spec, options, rng, *slot.sink);
      slot.seconds = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - start)
                         .count();
      if (slot.file) {
        slot.file->flush();
        if (!*slot.file) throw Error(ErrorKind::kIo, "failed writing trace");
      }
    } catch (...) {
      slot.error = std::current_exception();
    }
  };
  if (a.chains == 1) {
    work(0);
  } else {
    std::vector<std::thread> threads;
    for (int i = 0; i < a.chains; ++i) threads.emplace_back(work, i);
    for (std::thread& t : threads) t.join();
  }
  for (Slot& slot : slots) {
    if (slot.error) std::rethrow_exception(slot.error);
  }

  std::optional<std::set<std::string>> oracle;
  if (a.track_partitions && graph.num_vertices() <= kMaxPartitionVertices) {
    oracle.emplace();
    for (const Partition& p : EnumeratePartitions(graph, spec)) {
      oracle->insert(CanonicalKey(p));
    }
  }
  json report = json::array();
  for (int i = 0; i < a.chains; ++i) {
    const ChainSummary& s = slots[i].summary;
    json entry = {{"chain_index", i},
                  {"steps", s.steps},
                  {"accepted", s.accepted},
                  {"acceptance_rate", s.acceptance_rate()},
                  {"self_loops", s.self_loops},
                  {"internal_proposals", s.internal_proposals},
                  {"spanning_proposals", s.spanning_proposals},
                  {"internal_fraction", s.internal_fraction()},
                  {"records", s.records},
                  {"wall_seconds", slots[i].seconds}};
    if (!a.out.empty()) entry["trace"] = TracePath(a, i);
    if (a.track_partitions) {
      entry["partitions_visited"] = s.visited_partitions.size();
      if (oracle) {
        std::size_t hit = 0;
        for (const std::string& key : *oracle) hit += s.visited_partitions.count(key);
        entry["oracle_partitions"] = oracle->size();
        entry["all_oracle_partitions_visited"] = hit == oracle->size();
      }
    }
    report.push_back(std::move(entry));
  }
  const std::string text = json{{"chains", report}}.dump(2) + "\n";
  std::cout << text;
  if (!a.out.empty()) WriteText(a.out + ".summary.json", text);
  return kExitOk;
}

// enumerate

struct EnumerateArgs {
  GraphArgs graph;
  SpecArgs spec;
  std::string what = "partitions";
  bool list = false;
  std::string out;
};

int CmdEnumerate(const EnumerateArgs& a) {
  const WeightedGraph graph = MakeGraph(a.graph);
  const BalanceSpec spec = MakeSpec(a.spec, graph);
  json doc;
  if (a.what == "partitions") {
    const std::vector<Partition> parts = EnumeratePartitions(graph, spec);
    doc["partitions"] = parts.size();
    if (a.list) {
      json states = json::array();
      for (const Partition& p : parts) {
        states.push_back(PartitionToJson(graph, p)["assignment"]);
      }
      doc["states"] = std::move(states);
    }
  } else if (a.what == "splittable-count") {
    std::vector<int> all(graph.num_vertices());
    for (int v = 0; v < graph.num_vertices(); ++v) all[v] = v;
    doc["splittable_trees"] = CountSplittableTrees(graph, spec).str();
    doc["spanning_trees"] = CountSpanningTrees(graph, all).str();
  } else if (a.what == "marked-sets") {
    if (graph.num_edges() != graph.num_vertices() - 1) {
      throw UsageError("marked-sets needs a tree graph (|E| = |V| - 1)");
    }
    std::vector<int> edges(graph.num_edges());
    for (int e = 0; e < graph.num_edges(); ++e) edges[e] = e;
    const WeightedTree tree = FromHostEdges(graph, edges);
    const auto sets = EnumerateMarkedSets(tree, spec, spec.k());
    doc["marked_sets"] = sets.size();
    if (a.list) {
      json states = json::array();
      for (const auto& set : sets) {
        json s = json::array();
        for (int e : set) {
          s.push_back({graph.id(graph.edge(e).u), graph.id(graph.edge(e).v)});
        }
        states.push_back(std::move(s));
      }
      doc["states"] = std::move(states);
    }
  } else {
    throw UsageError("unknown --what '" + a.what + "'");
  }
  WriteText(a.out, doc.dump(2) + "\n");
  return kExitOk;
}

// validate

struct ValidateArgs {
  std::string level = "fast";
  std::uint64_t seed = AcceptanceOptions{}.seed;
  std::string mutate;
};

int CmdValidate(const ValidateArgs& a) {
  AcceptanceLevel level;
  if (a.level == "fast") {
    level = AcceptanceLevel::kFast;
  } else if (a.level == "full") {
    level = AcceptanceLevel::kFull;
  } else {
    throw UsageError("--level must be fast or full");
  }
  AcceptanceOptions options;
  options.seed = a.seed;
  if (a.mutate == "tapp") {
    options.decider = CorruptedDecider();
  } else if (!a.mutate.empty()) {
    throw UsageError("unknown mutation '" + a.mutate + "'");
  }
  int failures = 0;
  RunAcceptance(level, options, [&](const CriterionResult& r) {
    std::cout << FormatResult(r) << std::endl;
    failures += !r.passed;
  });
  std::cout << failures << " criteria failed" << std::endl;
  return failures == 0 ? kExitOk : kExitFailure;
}

// analyze

struct AnalyzeArgs {
  std::vector<std::string> traces;
  int max_lag = 100;
  double share_width = Histogram::kDefaultShareWidth;
  double iso_width = 0.5;
  std::string out;
};

struct Series {
  double width = 1.0;
  std::vector<double> values;
};

std::map<std::string, Series> ExtractSeries(const std::vector<TraceRecord>& records,
                                            const AnalyzeArgs& a) {
  std::map<std::string, Series> out;
  auto push = [&](const std::string& name, double width, double value) {
    Series& s = out[name];
    s.width = width;
    s.values.push_back(value);
  };
  for (const TraceRecord& r : records) {
    push("tree_diameter", 1.0, r.obs.tree_diameter);
    if (r.obs.cut_edges) push("cut_edges", 1.0, static_cast<double>(*r.obs.cut_edges));
    for (std::size_t i = 0; i < r.obs.iso.size(); ++i) {
      push("iso[" + std::to_string(i) + "]", a.iso_width, r.obs.iso[i]);
    }
    for (const auto& [name, values] : r.obs.shares) {
      for (std::size_t i = 0; i < values.size(); ++i) {
        push(name + "[" + std::to_string(i) + "]", a.share_width, values[i]);
      }
    }
  }
  return out;
}

int CmdAnalyze(const AnalyzeArgs& a) {
  if (a.max_lag < 0 || a.share_width <= 0 || a.iso_width <= 0) {
    throw UsageError("--max-lag must be >= 0 and widths positive");
  }
  std::vector<std::map<std::string, Series>> runs;
  json traces = json::array();
  for (const std::string& path : a.traces) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::kIo, "cannot open trace '" + path + "'");
    const std::vector<TraceRecord> records = ReadTrace(in);
    runs.push_back(ExtractSeries(records, a));
    json observables = json::object();
    for (const auto& [name, series] : runs.back()) {
      const int n = static_cast<int>(series.values.size());
      json entry;
      entry["autocorrelation"] = Autocorrelation(series.values, std::min(a.max_lag, n - 1));
      try {
        entry["ess"] = EffectiveSampleSize(series.values);
      } catch (const Error& e) {
        entry["ess"] = nullptr;
        entry["ess_error"] = e.what();
      }
      observables[name] = std::move(entry);
    }
    traces.push_back({{"path", path},
                      {"records", records.size()},
                      {"observables", std::move(observables)}});
  }
  json tv = json::object();
  if (runs.size() > 1) {
    for (const auto& [name, first] : runs[0]) {
      std::vector<Histogram> hists;
      for (const auto& run : runs) {
        const auto it = run.find(name);
        if (it == run.end() || it->second.values.empty()) break;
        Histogram h(first.width);
        for (double x : it->second.values) h.Add(x);
        hists.push_back(std::move(h));
      }
      if (hists.size() != runs.size()) continue;
      json pairs = json::array();
      double worst = 0;
      for (std::size_t i = 0; i < hists.size(); ++i) {
        for (std::size_t j = i + 1; j < hists.size(); ++j) {
          const double d = TvDistance(hists[i], hists[j]);
          worst = std::max(worst, d);
          pairs.push_back({{"a", i}, {"b", j}, {"tv", d}});
        }
      }
      tv[name] = {{"width", first.width}, {"max", worst}, {"pairs", std::move(pairs)}};
    }
  }
  WriteText(a.out, json{{"traces", traces}, {"tv", tv}}.dump(2) + "\n");
  return kExitOk;
}

int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kIo:
      return kExitIo;
    case ErrorKind::kInvalidArgument:
    case ErrorKind::kParse:
    case ErrorKind::kDisconnected:
    case ErrorKind::kNotSimple:
    case ErrorKind::kGapHypothesis:
      return kExitUsage;
    case ErrorKind::kNotSplittable:
    case ErrorKind::kGuard:
    case ErrorKind::kGiveUp:
      return kExitFailure;
  }
  return kExitFailure;
}

int Main(int argc, char** argv) {
  CLI::App app{"Balanced up-down walks on graph partitions"};
  app.require_subcommand(1);

  GridArgs grid;
  CLI::App* grid_cmd = app.add_subcommand("grid", "Write a grid graph as JSON");
  grid_cmd->add_option("--rows", grid.rows)->required();
  grid_cmd->add_option("--cols", grid.cols)->required();
  grid_cmd->add_option("--pop", grid.pop, "Population per vertex");
  grid_cmd->add_option("--out", grid.out, "Output file (default stdout)");

  RunArgs run;
  CLI::App* run_cmd = app.add_subcommand("run", "Run one or more chains");
  AddGraphOptions(run_cmd, run.graph);
  AddSpecOptions(run_cmd, run.spec);
  run_cmd->add_option("--chain", run.chain, "bud-tree | bud-marked | up-down");
  run_cmd->add_option("--measure", run.measure,
                      "uniform-splittable | uniform-forest | uniform-partition | custom");
  run_cmd->add_option("--beta", run.beta, "Cut-edge penalty for --measure custom");
  run_cmd->add_option("--steps", run.steps);
  run_cmd->add_option("--record-every", run.record_every);
  run_cmd->add_option("--d", run.d, "Re-marking distance");
  run_cmd->add_option("--p", run.p, "Leaf contraction probability");
  run_cmd->add_option("--seed", run.seed);
  run_cmd->add_option("--init", run.init, "rejection | bisection");
  run_cmd->add_option("--init-attempts", run.init_attempts);
  run_cmd->add_option("--out", run.out, "Output prefix for traces and summary");
  run_cmd->add_option("--chains", run.chains, "Independent chains, one thread each");
  run_cmd->add_option("--share", run.shares, "Ranked share observable NUM:DEN");
  run_cmd->add_flag("--emit-assignment", run.emit_assignment);
  run_cmd->add_flag("--track-partitions", run.track_partitions);

  EnumerateArgs enumerate;
  CLI::App* enum_cmd = app.add_subcommand("enumerate", "Exact enumeration on small inputs");
  AddGraphOptions(enum_cmd, enumerate.graph);
  AddSpecOptions(enum_cmd, enumerate.spec);
  enum_cmd->add_option("--what", enumerate.what,
                       "partitions | splittable-count | marked-sets");
  enum_cmd->add_flag("--list", enumerate.list, "Include the full state lists");
  enum_cmd->add_option("--out", enumerate.out);

  ValidateArgs validate;
  CLI::App* validate_cmd = app.add_subcommand("validate", "Run the acceptance checks");
  validate_cmd->add_option("--level", validate.level, "fast | full");
  validate_cmd->add_option("--seed", validate.seed);
  validate_cmd->add_option("--mutate", validate.mutate)->group("");

  AnalyzeArgs analyze;
  CLI::App* analyze_cmd = app.add_subcommand("analyze", "Diagnostics over JSONL traces");
  analyze_cmd->add_option("traces", analyze.traces)->required();
  analyze_cmd->add_option("--max-lag", analyze.max_lag);
  analyze_cmd->add_option("--share-width", analyze.share_width);
  analyze_cmd->add_option("--iso-width", analyze.iso_width);
  analyze_cmd->add_option("--out", analyze.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*grid_cmd) return CmdGrid(grid);
    if (*run_cmd) return CmdRun(run);
    if (*enum_cmd) return CmdEnumerate(enumerate);
    if (*validate_cmd) return CmdValidate(validate);
    if (*analyze_cmd) return CmdAnalyze(analyze);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ExitCodeFor(e.kind());
  }
  return kExitUsage;
}

}  // namespace
}  // namespace bud

int main(int argc, char** argv) { return bud::Main(argc, argv); }
