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

#include "bud/acceptance.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "bud/chains.h"
#include "bud/diagnostics.h"
#include "bud/error.h"
#include "bud/marked_sampler.h"
#include "bud/matrix_tree.h"
#include "bud/oracle.h"
#include "bud/rational.h"
#include "bud/rng.h"
#include "bud/splittability.h"
#include "bud/trace.h"

namespace bud {
namespace {

struct Check {
  bool passed = true;
  std::ostringstream detail;

  void Fail(const std::string& why) {
    if (passed) detail.str("");
    passed = false;
    detail << why;
  }
};

class CallbackSink : public TraceSink {
 public:
  explicit CallbackSink(std::function<void(const TraceRecord&)> fn)
      : fn_(std::move(fn)) {}
  void Write(const TraceRecord& record) override { fn_(record); }

 private:
  std::function<void(const TraceRecord&)> fn_;
};

BalanceSpec Exact(int k, std::int64_t size) {
  return BalanceSpec::FromBounds(k, Rational(size), Rational(size));
}

// Random labelled tree: each node attaches to a uniformly chosen earlier one.
WeightedTree RandomTree(int n, std::int64_t max_weight, Rng& rng) {
  WeightedTree t;
  for (int v = 0; v < n; ++v) {
    t.AddNode(1 + static_cast<std::int64_t>(rng.Index(max_weight)));
  }
  for (int v = 1; v < n; ++v) {
    t.AddEdge(static_cast<int>(rng.Index(v)), v, v - 1);
  }
  return t;
}

// A point near total/parts, offset by a random multiple of 1/den.
Rational Around(std::int64_t total, int parts, std::int64_t spread, int sign,
                Rng& rng) {
  const auto den = static_cast<std::int64_t>(1 + rng.Index(3));
  const auto steps = static_cast<std::int64_t>(rng.Index(spread * den + 1));
  return Rational(total, parts) + Rational(sign * steps, den);
}

void ExactCounts(Check& c) {
  const WeightedGraph g = MakeGrid(4, 4, 1);
  std::vector<int> all(16);
  for (int v = 0; v < 16; ++v) all[v] = v;
  const BigInt spanning = CountSpanningTrees(g, all);
  const BigInt splittable = CountSplittableTrees(g, Exact(4, 4));
  c.detail << "spanning=" << spanning << " splittable=" << splittable;
  if (spanning != 100352 || splittable != 35624) c.Fail(c.detail.str());
}

void OracleEquivalence(Check& c, const AcceptanceOptions& options) {
  Rng rng(options.seed, 2);
  const SplitDecider decide =
      options.decider ? options.decider
                      : [](const WeightedTree& t, const BalanceSpec& s, int parts) {
                          return TappDecide(t, s, parts).splittable;
                        };
  int instances = 0;
  int splittable = 0;
  int gated = 0;
  int disagreements = 0;
  int path_mismatches = 0;
  std::string first;
  while (instances < kOracleTrees) {
    const int n = 1 + static_cast<int>(rng.Index(12));
    const WeightedTree t = RandomTree(n, 20, rng);
    const int parts = 1 + static_cast<int>(rng.Index(5));
    const std::int64_t total = t.total_weight();
    const std::int64_t spread = 1 + total / (2 * parts);
    const Rational lo = Around(total, parts, spread, -1, rng);
    const Rational hi = Around(total, parts, spread, 1, rng);
    if (lo <= 0) continue;
    const BalanceSpec spec = BalanceSpec::FromBounds(parts, lo, hi);
    ++instances;
    const bool truth = TappOracle(t, spec, parts);
    splittable += truth;
    if (decide(t, spec, parts) != truth || IsSplittable(t, spec, parts) != truth) {
      if (disagreements++ == 0) {
        first = "n=" + std::to_string(n) + " parts=" + std::to_string(parts) +
                " L=" + RationalToString(lo) + " U=" + RationalToString(hi);
      }
    }
    if (SingleCountFeasible(total, spec, parts)) {
      ++gated;
      if (TappDecide(t, spec, parts, TappPath::kFast).splittable !=
          TappDecide(t, spec, parts, TappPath::kGeneral).splittable) {
        ++path_mismatches;
      }
    }
  }
  c.detail << instances << " trees (" << splittable << " splittable), "
           << disagreements << " disagreements; " << gated
           << " gated, " << path_mismatches << " fast/general mismatches";
  if (disagreements > 0 || path_mismatches > 0) {
    c.Fail(c.detail.str() + (first.empty() ? "" : "; first: " + first));
  }
}

void TreeChainStationarity(Check& c) {
  for (auto [rows, cols] : {std::pair{2, 3}, std::pair{2, 4}}) {
    const WeightedGraph g = MakeGrid(rows, cols, 1);
    const BalanceSpec spec = Exact(2, rows * cols / 2);
    const TransitionMatrix m = BuildTransitionMatrix(g, spec, OracleChain{});
    const double asym = (m.p - m.p.transpose()).cwiseAbs().maxCoeff();
    const auto classes = CommunicatingClasses(m.p);
    const auto expected = static_cast<std::size_t>(CountSplittableTrees(g, spec));
    c.detail << rows << "x" << cols << ": " << m.states.size() << " states, "
             << classes.size() << " class(es), asym=" << asym;
    if (asym > 1e-14 || classes.size() != 1 || classes[0].size() != expected) {
      c.Fail(c.detail.str());
      return;
    }
    const Stationary st = StationaryOnClass(m.p, classes[0]);
    const double dev =
        (st.pi.array() - 1.0 / static_cast<double>(expected)).abs().maxCoeff();
    c.detail << " residual=" << st.residual << " dev=" << dev << "; ";
    if (st.residual >= kTreeChainResidual || dev >= kTreeChainResidual) {
      c.Fail(c.detail.str());
      return;
    }
  }
}

void MarkedSamplerCorrectness(Check& c, std::uint64_t seed) {
  Rng rng(seed, 4);
  const SamplerConfig config;
  struct Kept {
    WeightedTree tree;
    BalanceSpec spec;
    int parts;
    std::vector<std::vector<int>> sets;
  };
  std::vector<Kept> corpus;
  double worst_sum = 0;
  while (static_cast<int>(corpus.size()) < kSamplerCorpus) {
    const int n = 2 + static_cast<int>(rng.Index(9));
    const WeightedTree t = RandomTree(n, 5, rng);
    const int parts = 2 + static_cast<int>(rng.Index(3));
    const std::int64_t total = t.total_weight();
    const Rational lo = Around(total, parts, 1 + total / (4 * parts), -1, rng);
    const Rational hi = Around(total, parts, 1 + total / (4 * parts), 1, rng);
    if (lo <= 0 || !(lo * 2 > hi)) continue;
    const BalanceSpec spec = BalanceSpec::FromBounds(parts, lo, hi);
    if (!IsSplittable(t, spec, parts)) continue;
    const std::vector<std::vector<int>> sets = EnumerateMarkedSets(t, spec, parts);
    double sum = 0;
    for (const auto& s : sets) {
      const auto lp = MarkedSetLogProb(t, spec, parts, config, s);
      if (!lp) {
        c.Fail("enumerated set with zero replay probability");
        return;
      }
      sum += std::exp(*lp);
    }
    worst_sum = std::max(worst_sum, std::abs(sum - 1));
    if (std::abs(sum - 1) > kReplaySumTolerance) {
      c.Fail("replayed probabilities sum to " + std::to_string(sum));
      return;
    }
    for (int i = 0; i < 20; ++i) {
      MarkedSelection draw = SelectMarkedTree(t, spec, parts, config, rng);
      std::sort(draw.labels.begin(), draw.labels.end());
      if (!std::binary_search(sets.begin(), sets.end(), draw.labels)) {
        c.Fail("draw outside the enumerated support");
        return;
      }
    }
    corpus.push_back({t, spec, parts, sets});
  }
  std::stable_sort(corpus.begin(), corpus.end(), [](const Kept& a, const Kept& b) {
    return a.sets.size() > b.sets.size();
  });
  double worst_z = 0;
  int cells = 0;
  for (int i = 0; i < kSamplerDrawTrees; ++i) {
    const Kept& k = corpus[i];
    std::map<std::vector<int>, int> counts;
    for (int r = 0; r < kSamplerDraws; ++r) {
      MarkedSelection draw = SelectMarkedTree(k.tree, k.spec, k.parts, config, rng);
      std::sort(draw.labels.begin(), draw.labels.end());
      ++counts[draw.labels];
    }
    for (const auto& s : k.sets) {
      const double p = std::exp(*MarkedSetLogProb(k.tree, k.spec, k.parts, config, s));
      const double sigma = std::sqrt(kSamplerDraws * p * (1 - p));
      const double z = std::abs(counts[s] - kSamplerDraws * p) / sigma;
      worst_z = std::max(worst_z, z);
      ++cells;
    }
  }
  c.detail << corpus.size() << " trees, max |sum-1|=" << worst_sum << "; "
           << cells << " cells over " << kSamplerDrawTrees << "x" << kSamplerDraws
           << " draws, max z=" << worst_z;
  if (worst_z > kSamplerSigmas) c.Fail(c.detail.str());
}

void MarkedChainTargeting(Check& c) {
  const WeightedGraph g = MakeGrid(2, 4, 1);
  const BalanceSpec spec = BalanceSpec::FromBounds(2, Rational(3), Rational(5));
  for (MeasureKind kind : {MeasureKind::kUniformSplittableTrees,
                           MeasureKind::kUniformForests,
                           MeasureKind::kUniformPartitions}) {
    OracleChain chain;
    chain.kind = ChainKind::kBudMarked;
    chain.measure = MeasureSpec{kind, {}};
    const TransitionMatrix m = BuildTransitionMatrix(g, spec, chain);
    const auto classes = CommunicatingClasses(m.p);
    if (classes.size() != 1) {
      c.Fail(MeasureName(kind) + ": " + std::to_string(classes.size()) + " classes");
      return;
    }
    const Stationary st = StationaryOnClass(m.p, classes[0]);
    LogTarget target(g, chain.measure);
    std::vector<double> w;
    double z = 0;
    for (const ChainState& s : m.states) {
      const MarkedTree state(SpanningTree(g, s.edges), s.marked, spec);
      w.push_back(std::exp(target(state)));
      z += w.back();
    }
    double dev = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      dev = std::max(dev, std::abs(st.pi(static_cast<int>(i)) - w[i] / z));
    }
    c.detail << MeasureName(kind) << ": " << m.states.size()
             << " states residual=" << st.residual << " dev=" << dev << "; ";
    if (st.residual >= kMarkedChainTolerance || dev >= kMarkedChainTolerance) {
      c.Fail(c.detail.str());
      return;
    }
  }
}

void GridValidation(Check& c, std::uint64_t seed) {
  const WeightedGraph g = MakeGrid(4, 4, 1);
  const BalanceSpec spec = Exact(4, 4);
  Histogram exact(1.0);
  std::set<std::string> keys;
  for (const Partition& p : EnumeratePartitions(g, spec)) {
    BigInt forest = 1;
    for (int d = 0; d < p.k; ++d) {
      std::vector<int> members;
      for (int v = 0; v < g.num_vertices(); ++v) {
        if (p.assignment[v] == d) members.push_back(v);
      }
      forest *= CountSpanningTrees(g, members);
    }
    const BigInt weight = forest * CountSpanningTrees(Quotient(g, p));
    exact.Add(static_cast<double>(CutEdges(g, p)), static_cast<std::int64_t>(weight));
    keys.insert(CanonicalKey(p));
  }
  Histogram empirical(1.0);
  CallbackSink sink([&](const TraceRecord& r) {
    empirical.Add(static_cast<double>(*r.obs.cut_edges));
  });
  Rng rng(seed, 6);
  ChainOptions o;
  o.kind = ChainKind::kBudMarked;
  o.steps = kGridSteps;
  o.track_partitions = true;
  const ChainSummary s = RunChain(g, spec, o, rng, sink);
  std::size_t visited = 0;
  for (const std::string& k : keys) visited += s.visited_partitions.count(k);
  const double tv = TvDistance(empirical, exact);
  c.detail << "exact weight " << exact.total() << ", visited " << visited << "/"
           << keys.size() << " partitions, cut-edge TV=" << tv
           << ", acceptance " << s.acceptance_rate();
  if (exact.total() != 35624 || visited != keys.size() || tv > kGridTvBudget) {
    c.Fail(c.detail.str());
  }
}

void MultiStartMixing(Check& c, std::uint64_t seed) {
  const WeightedGraph g = MakeGrid(4, 4, 1);
  const BalanceSpec spec = BalanceSpec::FromBounds(5, Rational(3), Rational(4));
  std::vector<std::vector<double>> series(kMixingChains);
  for (int i = 0; i < kMixingChains; ++i) {
    CallbackSink sink([&](const TraceRecord& r) {
      series[i].push_back(static_cast<double>(*r.obs.cut_edges));
    });
    Rng rng(seed, 700 + i);
    ChainOptions o;
    o.kind = ChainKind::kBudMarked;
    o.steps = kMixingSamples;
    RunChain(g, spec, o, rng, sink);
  }
  const std::vector<std::int64_t> checkpoints{1000, 2000, 5000, 10000, 20000, 50000,
                                              kMixingSamples};
  std::vector<double> worst;
  for (std::int64_t n : checkpoints) {
    std::vector<Histogram> h(kMixingChains, Histogram(1.0));
    for (int i = 0; i < kMixingChains; ++i) {
      for (std::int64_t t = 0; t < n; ++t) h[i].Add(series[i][t]);
    }
    double w = 0;
    for (int i = 0; i < kMixingChains; ++i) {
      for (int j = i + 1; j < kMixingChains; ++j) w = std::max(w, TvDistance(h[i], h[j]));
    }
    worst.push_back(w);
  }
  // Least-squares slope of the worst pairwise TV against log(samples).
  double mx = 0;
  double my = 0;
  for (std::size_t i = 0; i < worst.size(); ++i) {
    mx += std::log(static_cast<double>(checkpoints[i]));
    my += worst[i];
  }
  mx /= static_cast<double>(worst.size());
  my /= static_cast<double>(worst.size());
  double sxy = 0;
  double sxx = 0;
  for (std::size_t i = 0; i < worst.size(); ++i) {
    const double dx = std::log(static_cast<double>(checkpoints[i])) - mx;
    sxy += dx * (worst[i] - my);
    sxx += dx * dx;
  }
  const double slope = sxy / sxx;
  c.detail << "max pairwise TV";
  for (std::size_t i = 0; i < worst.size(); ++i) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), " %lld:%.4f",
                  static_cast<long long>(checkpoints[i]), worst[i]);
    c.detail << buf;
  }
  c.detail << ", slope " << slope;
  if (!(worst.back() < worst.front()) || !(slope < 0) ||
      !(worst.back() < kMixingTvBudget)) {
    c.Fail(c.detail.str());
  }
}

void BaselineParity(Check& c, std::uint64_t seed) {
  const WeightedGraph g = MakeGrid(8, 8, 1);
  const BalanceSpec spec = Exact(4, 16);
  for (ChainKind kind : {ChainKind::kBudTree, ChainKind::kUpDown}) {
    std::vector<double> diameter;
    diameter.reserve(kBaselineSteps);
    CallbackSink sink([&](const TraceRecord& r) {
      diameter.push_back(r.obs.tree_diameter);
    });
    Rng rng(seed, 800 + static_cast<int>(kind));
    ChainOptions o;
    o.kind = kind;
    o.steps = kBaselineSteps;
    const ChainSummary s = RunChain(g, spec, o, rng, sink);
    const std::vector<double> rho = Autocorrelation(diameter, kBaselineMaxLag);
    bool finite = true;
    for (double r : rho) finite = finite && std::isfinite(r);
    const double ess = EffectiveSampleSize(diameter);
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "%s: %lld steps, rho1=%.4f rho%d=%.4f ESS=%.1f; ",
                  ChainName(kind).c_str(), static_cast<long long>(s.steps), rho[1],
                  kBaselineMaxLag, rho[kBaselineMaxLag], ess);
    c.detail << buf;
    if (s.steps != kBaselineSteps || !finite || !std::isfinite(ess) || ess <= 0) {
      c.Fail(c.detail.str());
      return;
    }
  }
}

const char* CriterionName(int id) {
  switch (id) {
    case 1: return "exact-counts";
    case 2: return "oracle-equivalence";
    case 3: return "tree-chain-stationarity";
    case 4: return "marked-sampler";
    case 5: return "mh-targeting";
    case 6: return "grid-validation";
    case 7: return "multi-start-mixing";
    case 8: return "baseline-parity";
  }
  return "unknown";
}

}  // namespace

std::vector<int> CriteriaFor(AcceptanceLevel level) {
  if (level == AcceptanceLevel::kFast) return {1, 2, 3, 4, 5};
  return {1, 2, 3, 4, 5, 6, 7, 8};
}

CriterionResult RunCriterion(int id, const AcceptanceOptions& options) {
  CriterionResult result;
  result.id = id;
  result.name = CriterionName(id);
  const auto start = std::chrono::steady_clock::now();
  Check c;
  try {
    switch (id) {
      case 1: ExactCounts(c); break;
      case 2: OracleEquivalence(c, options); break;
      case 3: TreeChainStationarity(c); break;
      case 4: MarkedSamplerCorrectness(c, options.seed); break;
      case 5: MarkedChainTargeting(c); break;
      case 6: GridValidation(c, options.seed); break;
      case 7: MultiStartMixing(c, options.seed); break;
      case 8: BaselineParity(c, options.seed); break;
      default:
        throw Error(ErrorKind::kInvalidArgument,
                    "no acceptance criterion " + std::to_string(id));
    }
  } catch (const Error& e) {
    c.Fail(std::string("error: ") + e.what());
  }
  result.passed = c.passed;
  result.detail = c.detail.str();
  result.seconds = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - start)
                       .count();
  return result;
}

std::vector<CriterionResult> RunAcceptance(
    AcceptanceLevel level, const AcceptanceOptions& options,
    const std::function<void(const CriterionResult&)>& report) {
  std::vector<CriterionResult> out;
  for (int id : CriteriaFor(level)) {
    out.push_back(RunCriterion(id, options));
    if (report) report(out.back());
  }
  return out;
}

std::string FormatResult(const CriterionResult& result) {
  char head[96];
  std::snprintf(head, sizeof(head), "%s [%d] %-24s %7.2fs  ",
                result.passed ? "PASS" : "FAIL", result.id, result.name.c_str(),
                result.seconds);
  return head + result.detail;
}

SplitDecider CorruptedDecider() {
  return [](const WeightedTree& tree, const BalanceSpec& spec, int parts) {
    const Rational total(tree.total_weight());
    return spec.lower() * parts <= total && total <= spec.upper() * parts;
  };
}

}  // namespace bud
