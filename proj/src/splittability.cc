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

#include <numeric>
#include <string>
#include <utility>

#include "bud/error.h"
#include "bud/rational.h"

namespace bud {
namespace {

struct Scaled {
  std::int64_t scale;
  std::int64_t lower;
  std::int64_t upper;
  std::int64_t gap;
  std::vector<std::int64_t> weight;
  std::int64_t total;
};

Scaled ScaleProblem(const WeightedTree& tree, const BalanceSpec& spec) {
  const BalanceSpec::Scaled s = spec.scaled();
  Scaled out{s.scale, s.lower, s.upper, s.upper - s.lower, {}, 0};
  out.weight.reserve(tree.size());
  for (int v = 0; v < tree.size(); ++v) {
    if (tree.weight(v) < 0) {
      throw Error(ErrorKind::kInvalidArgument, "negative node weight");
    }
    out.weight.push_back(CheckedMul(tree.weight(v), s.scale));
    out.total = CheckedAdd(out.total, out.weight.back());
  }
  return out;
}

// Parent-before-child order from node 0 plus the parent array.
void RootedOrder(const WeightedTree& tree, std::vector<int>* order,
                 std::vector<int>* parent) {
  const int n = tree.size();
  order->clear();
  order->reserve(n);
  parent->assign(n, -2);
  (*parent)[0] = -1;
  order->push_back(0);
  for (int i = 0; i < static_cast<int>(order->size()); ++i) {
    const int v = (*order)[i];
    for (const TreeArc& arc : tree.arcs(v)) {
      if ((*parent)[arc.to] != -2) continue;
      (*parent)[arc.to] = v;
      order->push_back(arc.to);
    }
  }
  if (static_cast<int>(order->size()) != n) {
    throw Error(ErrorKind::kInvalidArgument, "weighted tree is disconnected");
  }
}

bool ScaledSingleCount(std::int64_t total, std::int64_t lower,
                       std::int64_t upper, int parts) {
  auto fits = [&](std::int64_t m) {
    if (m < 1) return false;
    const __int128 t = total;
    return static_cast<__int128>(m) * lower <= t &&
           t <= static_cast<__int128>(m) * upper;
  };
  return fits(parts) && !fits(parts - 1) && !fits(parts + 1);
}

void CheckTreeArgs(const WeightedTree& tree, int parts) {
  if (parts < 1) {
    throw Error(ErrorKind::kInvalidArgument,
                "district count must be positive, got " +
                    std::to_string(parts));
  }
  if (tree.size() == 0) {
    throw Error(ErrorKind::kInvalidArgument, "empty tree");
  }
  if (tree.num_edges() != tree.size() - 1) {
    throw Error(ErrorKind::kInvalidArgument, "not a tree");
  }
}

TappResult RunGeneral(const WeightedTree& tree, const Scaled& p, int parts,
                      bool keep) {
  const int n = tree.size();
  std::vector<int> order;
  std::vector<int> parent;
  RootedOrder(tree, &order, &parent);

  std::vector<std::vector<SurplusSet>> table(n);
  std::vector<SurplusSet> folded(parts + 1);
  std::vector<SurplusSet> next(parts + 1);
  for (int i = n - 1; i >= 0; --i) {
    const int v = order[i];
    for (SurplusSet& s : folded) s = SurplusSet();
    folded[0] = Crop(SurplusSet::Point(p.weight[v]), p.upper);
    for (const TreeArc& arc : tree.arcs(v)) {
      const int u = arc.to;
      if (u == parent[v]) continue;
      const std::vector<SurplusSet>& child = table[u];
      for (SurplusSet& s : next) s = SurplusSet();
      for (int a = 0; a <= parts; ++a) {
        if (folded[a].empty()) continue;
        for (int b = 0; a + b <= parts; ++b) {
          if (child[b].empty()) continue;
          SurplusSet sum = MinkowskiSum(folded[a], child[b]);
          next[a + b] = next[a + b].empty() ? std::move(sum)
                                            : Union(next[a + b], sum);
        }
      }
      for (int j = 0; j <= parts; ++j) {
        folded[j] = CropThenClose(next[j], p.upper, p.gap);
      }
      if (!keep) std::vector<SurplusSet>().swap(table[u]);
    }
    std::vector<SurplusSet>& out = table[v];
    out.assign(parts + 1, SurplusSet());
    for (int l = 0; l <= parts; ++l) {
      SurplusSet s = folded[l];
      if (l >= 1 && folded[l - 1].Intersects(p.lower, p.upper)) {
        s = Union(s, SurplusSet::Point(0));
      }
      out[l] = CropThenClose(s, p.upper, p.gap);
    }
  }

  TappResult result;
  result.table.scale = p.scale;
  result.table.fast_path = false;
  result.table.root = 0;
  result.table.root_result = table[0][parts];
  result.splittable = table[0][parts].Contains(0);
  if (keep) result.table.levels = std::move(table);
  return result;
}

TappResult RunFast(const WeightedTree& tree, const Scaled& p, bool keep) {
  const int n = tree.size();
  std::vector<int> order;
  std::vector<int> parent;
  RootedOrder(tree, &order, &parent);

  std::vector<SurplusSet> table(n);
  for (int i = n - 1; i >= 0; --i) {
    const int v = order[i];
    SurplusSet s = Crop(SurplusSet::Point(p.weight[v]), p.upper);
    for (const TreeArc& arc : tree.arcs(v)) {
      if (arc.to == parent[v]) continue;
      s = CropThenClose(MinkowskiSum(s, table[arc.to]), p.upper, p.gap);
      if (!keep) table[arc.to] = SurplusSet();
    }
    if (s.Intersects(p.lower, p.upper)) s = Union(s, SurplusSet::Point(0));
    table[v] = CropThenClose(s, p.upper, p.gap);
  }

  TappResult result;
  result.table.scale = p.scale;
  result.table.fast_path = true;
  result.table.root = 0;
  result.table.root_result = table[0];
  result.splittable = table[0].Contains(0);
  if (keep) {
    result.table.levels.resize(n);
    for (int v = 0; v < n; ++v) result.table.levels[v] = {std::move(table[v])};
  }
  return result;
}

// Rejections that need no DP. Returns true when the answer is decided.
bool TrivialAnswer(const WeightedTree& tree, const Scaled& p, int parts,
                   bool* answer) {
  const __int128 total = p.total;
  if (parts > tree.size() ||
      static_cast<__int128>(parts) * p.lower > total ||
      total > static_cast<__int128>(parts) * p.upper) {
    *answer = false;
    return true;
  }
  if (parts == 1) {
    *answer = true;
    return true;
  }
  return false;
}

TappResult Decide(const WeightedTree& tree, const BalanceSpec& spec,
                  int parts, TappPath path, bool keep) {
  CheckTreeArgs(tree, parts);
  const Scaled p = ScaleProblem(tree, spec);
  const bool single = ScaledSingleCount(p.total, p.lower, p.upper, parts);
  if (path == TappPath::kFast && !single) {
    throw Error(ErrorKind::kInvalidArgument,
                "single-table path requires a unique feasible district count");
  }
  bool answer = false;
  if (path == TappPath::kAuto && TrivialAnswer(tree, p, parts, &answer) &&
      !keep) {
    TappResult result;
    result.splittable = answer;
    result.table.scale = p.scale;
    return result;
  }
  if (path == TappPath::kFast || (path == TappPath::kAuto && single)) {
    return RunFast(tree, p, keep);
  }
  return RunGeneral(tree, p, parts, keep);
}

}  // namespace

bool SingleCountFeasible(std::int64_t total_weight, const BalanceSpec& spec,
                         int parts) {
  const BalanceSpec::Scaled s = spec.scaled();
  return ScaledSingleCount(CheckedMul(total_weight, s.scale), s.lower,
                           s.upper, parts);
}

TappResult TappDecide(const WeightedTree& tree, const BalanceSpec& spec,
                      int parts, TappPath path) {
  return Decide(tree, spec, parts, path, true);
}

bool IsSplittable(const WeightedTree& tree, const BalanceSpec& spec,
                  int parts) {
  CheckTreeArgs(tree, parts);
  if (spec.lower() == spec.upper()) {
    bool positive = true;
    for (int v = 0; v < tree.size() && positive; ++v) {
      positive = tree.weight(v) > 0;
    }
    const std::int64_t total = tree.total_weight();
    if (positive) {
      if (Rational(total, parts) != spec.lower()) return false;
      return UniqueExactSplit(tree, parts).has_value();
    }
  }
  return Decide(tree, spec, parts, TappPath::kAuto, false).splittable;
}

std::optional<std::vector<int>> UniqueExactSplit(const WeightedTree& tree,
                                                 int k) {
  CheckTreeArgs(tree, k);
  const std::int64_t total = tree.total_weight();
  if (total % k != 0) return std::nullopt;
  const std::int64_t target = total / k;
  std::vector<int> order;
  std::vector<int> parent;
  RootedOrder(tree, &order, &parent);
  std::vector<int> parent_label(tree.size(), -1);
  for (int v = 0; v < tree.size(); ++v) {
    for (const TreeArc& arc : tree.arcs(v)) {
      if (arc.to == parent[v]) parent_label[v] = arc.label;
    }
  }
  std::vector<std::int64_t> residual(tree.size());
  for (int v = 0; v < tree.size(); ++v) residual[v] = tree.weight(v);
  std::vector<int> cuts;
  for (int i = tree.size() - 1; i >= 1; --i) {
    const int v = order[i];
    if (residual[v] == target) {
      cuts.push_back(parent_label[v]);
      if (static_cast<int>(cuts.size()) > k - 1) return std::nullopt;
    } else if (residual[v] > target) {
      return std::nullopt;
    } else {
      residual[parent[v]] += residual[v];
    }
  }
  if (static_cast<int>(cuts.size()) != k - 1 || residual[0] != target) {
    return std::nullopt;
  }
  return cuts;
}

bool TappOracle(const WeightedTree& tree, const BalanceSpec& spec, int parts) {
  CheckTreeArgs(tree, parts);
  const int m = tree.num_edges();
  if (m > 25) {
    throw Error(ErrorKind::kGuard, "oracle limited to trees with at most 25 "
                                   "edges, got " + std::to_string(m));
  }
  if (parts - 1 > m) return false;
  const auto& edges = tree.edge_list();
  const int n = tree.size();
  std::vector<int> chosen;
  std::vector<int> root(n);
  std::vector<std::int64_t> sum(n);

  auto check = [&]() {
    std::vector<char> cut(m, 0);
    for (int e : chosen) cut[e] = 1;
    std::iota(root.begin(), root.end(), 0);
    auto find = [&](int x) {
      while (root[x] != x) x = root[x] = root[root[x]];
      return x;
    };
    for (int e = 0; e < m; ++e) {
      if (!cut[e]) root[find(edges[e].a)] = find(edges[e].b);
    }
    std::fill(sum.begin(), sum.end(), 0);
    for (int v = 0; v < n; ++v) sum[find(v)] += tree.weight(v);
    for (int v = 0; v < n; ++v) {
      if (find(v) == v && !spec.Contains(sum[v])) return false;
    }
    return true;
  };

  auto rec = [&](auto&& self, int next) -> bool {
    if (static_cast<int>(chosen.size()) == parts - 1) return check();
    for (int e = next; e < m; ++e) {
      chosen.push_back(e);
      if (self(self, e + 1)) return true;
      chosen.pop_back();
    }
    return false;
  };
  return rec(rec, 0);
}

}  // namespace bud
