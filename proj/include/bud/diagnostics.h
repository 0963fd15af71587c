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

#ifndef BUD_DIAGNOSTICS_H_
#define BUD_DIAGNOSTICS_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "bud/graph.h"
#include "bud/rational.h"

namespace bud {

std::int64_t CutEdges(const WeightedGraph& graph, const Partition& partition);

// Per district (edges leaving the district)^2 / (vertex count), ascending.
std::vector<Rational> IsoperimetricRatios(const WeightedGraph& graph,
                                          const Partition& partition);

// Per district sum(numerator attr) / sum(denominator attr), ascending.
std::vector<double> RankedShares(const WeightedGraph& graph,
                                 const Partition& partition,
                                 const std::string& numerator,
                                 const std::string& denominator);

// rho_0..rho_max_lag with the biased (1/n) estimator; all zero past lag 0
// for a constant series.
std::vector<double> Autocorrelation(std::span<const double> series,
                                    int max_lag);

// n / tau with tau = -1 + 2 * sum of consecutive-pair sums
// rho_{2m} + rho_{2m+1}, accumulated while the pair sum stays >= 0.05 (the
// first pair always counts), and tau floored at 1 / log10(n).
double EffectiveSampleSize(std::span<const double> series);

class Histogram {
 public:
  static constexpr double kDefaultShareWidth = 0.002;

  explicit Histogram(double width);

  void Add(double value);
  void Add(double value, std::int64_t count);

  double width() const { return width_; }
  std::int64_t total() const { return total_; }
  const std::map<std::int64_t, std::int64_t>& bins() const { return bins_; }

 private:
  double width_;
  std::int64_t total_ = 0;
  std::map<std::int64_t, std::int64_t> bins_;
};

double TvDistance(const Histogram& a, const Histogram& b);

}  // namespace bud

#endif  // BUD_DIAGNOSTICS_H_
