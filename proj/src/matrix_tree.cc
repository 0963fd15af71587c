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

#include "bud/matrix_tree.h"

#include <cmath>
#include <limits>
#include <unordered_map>
#include <utility>

#include <Eigen/Dense>

namespace bud {

BigInt CountSpanningTrees(
    const std::vector<std::vector<std::int64_t>>& multiplicity) {
  const int n = static_cast<int>(multiplicity.size());
  if (n <= 1) return BigInt(1);
  const int m = n - 1;
  std::vector<std::vector<BigInt>> a(m, std::vector<BigInt>(m));
  for (int i = 0; i < m; ++i) {
    std::int64_t degree = 0;
    for (int j = 0; j < n; ++j) {
      if (j != i) degree += multiplicity[i][j];
    }
    for (int j = 0; j < m; ++j) {
      a[i][j] = (i == j) ? BigInt(degree) : BigInt(-multiplicity[i][j]);
    }
  }
  // Bareiss: after step k every entry below/right of the pivot is an exact
  // k+1 order minor, so the division is exact.
  BigInt previous = 1;
  int sign = 1;
  for (int k = 0; k < m; ++k) {
    if (a[k][k] == 0) {
      int swap_row = -1;
      for (int r = k + 1; r < m; ++r) {
        if (a[r][k] != 0) {
          swap_row = r;
          break;
        }
      }
      if (swap_row < 0) return BigInt(0);
      std::swap(a[k], a[swap_row]);
      sign = -sign;
    }
    for (int i = k + 1; i < m; ++i) {
      for (int j = k + 1; j < m; ++j) {
        a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / previous;
      }
      a[i][k] = 0;
    }
    previous = a[k][k];
  }
  BigInt det = a[m - 1][m - 1];
  return sign > 0 ? det : BigInt(-det);
}

BigInt CountSpanningTrees(const Multigraph& graph) {
  return CountSpanningTrees(graph.multiplicity);
}

std::vector<std::vector<std::int64_t>> InducedMultiplicity(
    const WeightedGraph& graph, std::span<const int> members) {
  const int n = static_cast<int>(members.size());
  std::unordered_map<int, int> local;
  local.reserve(n);
  for (int i = 0; i < n; ++i) local.emplace(members[i], i);
  std::vector<std::vector<std::int64_t>> m(n, std::vector<std::int64_t>(n, 0));
  for (int i = 0; i < n; ++i) {
    for (const Arc& arc : graph.neighbors(members[i])) {
      auto it = local.find(arc.to);
      if (it != local.end()) m[i][it->second] = 1;
    }
  }
  return m;
}

BigInt CountSpanningTrees(const WeightedGraph& graph,
                          std::span<const int> members) {
  return CountSpanningTrees(InducedMultiplicity(graph, members));
}

double Log(const BigInt& value) {
  if (value <= 0) return -std::numeric_limits<double>::infinity();
  const unsigned bits = boost::multiprecision::msb(value);
  if (bits < 1000) return std::log(value.convert_to<double>());
  const unsigned shift = bits - 60;
  const BigInt top = value >> shift;
  return std::log(top.convert_to<double>()) + shift * std::log(2.0);
}

double LogSpanningTreeCount(
    const std::vector<std::vector<std::int64_t>>& multiplicity,
    LogDetMethod method) {
  if (method == LogDetMethod::kExact) {
    return Log(CountSpanningTrees(multiplicity));
  }
  const int n = static_cast<int>(multiplicity.size());
  if (n <= 1) return 0.0;
  const int m = n - 1;
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    double degree = 0;
    for (int j = 0; j < n; ++j) {
      if (j != i) degree += static_cast<double>(multiplicity[i][j]);
    }
    for (int j = 0; j < m; ++j) {
      lap(i, j) = (i == j) ? degree : -static_cast<double>(multiplicity[i][j]);
    }
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(lap);
  const Eigen::MatrixXd& packed = lu.matrixLU();
  double log_det = 0;
  for (int i = 0; i < m; ++i) {
    const double pivot = std::abs(packed(i, i));
    if (pivot < 1e-9) return -std::numeric_limits<double>::infinity();
    log_det += std::log(pivot);
  }
  return log_det;
}

}  // namespace bud
