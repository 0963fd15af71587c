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

#ifndef BUD_MATRIX_TREE_H_
#define BUD_MATRIX_TREE_H_

#include <cstdint>
#include <span>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "bud/graph.h"

namespace bud {

using BigInt = boost::multiprecision::cpp_int;

// Number of spanning trees of the multigraph with the given symmetric
// multiplicity matrix (diagonal ignored), by the matrix-tree theorem: the
// determinant of the Laplacian with its last row and column removed,
// evaluated exactly with fraction-free (Bareiss) elimination. Returns 0 for
// disconnected inputs and 1 for a single node.
BigInt CountSpanningTrees(
    const std::vector<std::vector<std::int64_t>>& multiplicity);
BigInt CountSpanningTrees(const Multigraph& graph);

// Spanning trees of the subgraph induced by `members`.
BigInt CountSpanningTrees(const WeightedGraph& graph,
                          std::span<const int> members);

// Natural log of a positive big integer without overflow.
double Log(const BigInt& value);

enum class LogDetMethod { kExact, kFloat };

// log tau; kFloat uses a pivoted LU log-determinant for districts too large
// for exact elimination to be cheap. Returns -infinity when disconnected.
double LogSpanningTreeCount(
    const std::vector<std::vector<std::int64_t>>& multiplicity,
    LogDetMethod method = LogDetMethod::kExact);

// Multiplicity matrix of the subgraph induced by `members` (indexed in the
// order given).
std::vector<std::vector<std::int64_t>> InducedMultiplicity(
    const WeightedGraph& graph, std::span<const int> members);

}  // namespace bud

#endif  // BUD_MATRIX_TREE_H_
