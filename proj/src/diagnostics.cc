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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bud/error.h"

namespace bud {

std::int64_t CutEdges(const WeightedGraph& graph, const Partition& partition) {
  std::int64_t cut = 0;
  for (const Edge& e : graph.edges()) {
    cut += partition.assignment[e.u] != partition.assignment[e.v];
  }
  return cut;
}

std::vector<Rational> IsoperimetricRatios(const WeightedGraph& graph,
                                          const Partition& partition) {
  std::vector<std::int64_t> leaving(partition.k, 0);
  std::vector<std::int64_t> size(partition.k, 0);
  for (int v = 0; v < graph.num_vertices(); ++v) {
    ++size[partition.assignment[v]];
  }
  for (const Edge& e : graph.edges()) {
    const int a = partition.assignment[e.u];
    const int b = partition.assignment[e.v];
    if (a == b) continue;
    ++leaving[a];
    ++leaving[b];
  }
  std::vector<Rational> out;
  for (int d = 0; d < partition.k; ++d) {
    if (size[d] == 0) {
      throw Error(ErrorKind::kInvalidArgument, "empty district");
    }
    out.emplace_back(leaving[d] * leaving[d], size[d]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> RankedShares(const WeightedGraph& graph,
                                 const Partition& partition,
                                 const std::string& numerator,
                                 const std::string& denominator) {
  std::vector<double> num(partition.k, 0.0);
  std::vector<double> den(partition.k, 0.0);
  for (int v = 0; v < graph.num_vertices(); ++v) {
    const AttrMap& attrs = graph.attrs(v);
    const auto n = attrs.find(numerator);
    const auto d = attrs.find(denominator);
    if (n == attrs.end() || d == attrs.end()) {
      throw Error(ErrorKind::kInvalidArgument,
                  "vertex '" + graph.id(v) + "' lacks attribute '" +
                      (n == attrs.end() ? numerator : denominator) + "'");
    }
    num[partition.assignment[v]] += n->second;
    den[partition.assignment[v]] += d->second;
  }
  std::vector<double> out;
  for (int i = 0; i < partition.k; ++i) {
    if (den[i] <= 0) {
      throw Error(ErrorKind::kInvalidArgument,
                  "district " + std::to_string(i + 1) +
                      " has a non-positive '" + denominator + "' total");
    }
    out.push_back(num[i] / den[i]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> Autocorrelation(std::span<const double> series,
                                    int max_lag) {
  const int n = static_cast<int>(series.size());
  if (max_lag < 0 || n <= max_lag) {
    throw Error(ErrorKind::kInvalidArgument,
                "series of length " + std::to_string(n) +
                    " too short for lag " + std::to_string(max_lag));
  }
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / n;
  std::vector<double> centered(n);
  for (int i = 0; i < n; ++i) centered[i] = series[i] - mean;
  double var = 0.0;
  for (double x : centered) var += x * x;
  std::vector<double> rho(max_lag + 1, 0.0);
  rho[0] = 1.0;
  if (var <= 0.0) return rho;
  for (int t = 1; t <= max_lag; ++t) {
    double s = 0.0;
    for (int i = 0; i + t < n; ++i) s += centered[i] * centered[i + t];
    rho[t] = std::clamp(s / var, -1.0, 1.0);
  }
  return rho;
}

double EffectiveSampleSize(std::span<const double> series) {
  const int n = static_cast<int>(series.size());
  if (n < 4) {
    throw Error(ErrorKind::kInvalidArgument, "series too short for ESS");
  }
  const auto [lo, hi] = std::minmax_element(series.begin(), series.end());
  if (*lo == *hi) {
    throw Error(ErrorKind::kInvalidArgument, "degenerate (constant) series");
  }
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / n;
  std::vector<double> centered(n);
  for (int i = 0; i < n; ++i) centered[i] = series[i] - mean;
  double var = 0.0;
  for (double x : centered) var += x * x;
  auto rho = [&](int t) {
    double s = 0.0;
    for (int i = 0; i + t < n; ++i) s += centered[i] * centered[i + t];
    return s / var;
  };
  double sum = 0.0;
  for (int m = 0; 2 * m + 1 < n; ++m) {
    const double pair = (m == 0 ? 1.0 : rho(2 * m)) + rho(2 * m + 1);
    if (m > 0 && pair < 0.05) break;
    sum += pair;
  }
  const double tau = std::max(-1.0 + 2.0 * sum, 1.0 / std::log10(n));
  return n / tau;
}

Histogram::Histogram(double width) : width_(width) {
  if (!(width > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "histogram bin width must be positive");
  }
}

void Histogram::Add(double value) { Add(value, 1); }

void Histogram::Add(double value, std::int64_t count) {
  const double scaled = value / width_;
  const auto bin = static_cast<std::int64_t>(std::floor(scaled + 1e-9));
  bins_[bin] += count;
  total_ += count;
}

double TvDistance(const Histogram& a, const Histogram& b) {
  if (a.width() != b.width()) {
    throw Error(ErrorKind::kInvalidArgument, "histograms use different bin widths");
  }
  if (a.total() == 0 || b.total() == 0) {
    throw Error(ErrorKind::kInvalidArgument, "empty histogram");
  }
  double sum = 0.0;
  auto ia = a.bins().begin();
  auto ib = b.bins().begin();
  const double ta = static_cast<double>(a.total());
  const double tb = static_cast<double>(b.total());
  while (ia != a.bins().end() || ib != b.bins().end()) {
    if (ib == b.bins().end() || (ia != a.bins().end() && ia->first < ib->first)) {
      sum += ia->second / ta;
      ++ia;
    } else if (ia == a.bins().end() || ib->first < ia->first) {
      sum += ib->second / tb;
      ++ib;
    } else {
      sum += std::abs(ia->second / ta - ib->second / tb);
      ++ia;
      ++ib;
    }
  }
  return 0.5 * sum;
}

}  // namespace bud
