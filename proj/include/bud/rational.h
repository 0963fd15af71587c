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

#ifndef BUD_RATIONAL_H_
#define BUD_RATIONAL_H_

#include <cstdint>
#include <string>
#include <string_view>

#include <boost/rational.hpp>

namespace bud {

using Rational = boost::rational<std::int64_t>;

// Parses "3", "-2", "7/2" or a decimal literal such as "0.025" exactly.
Rational ParseRational(std::string_view text);

// "7/2" or "3" for integral values.
std::string RationalToString(const Rational& value);

double ToDouble(const Rational& value);

// Multiplies with an overflow check; throws Error(kInvalidArgument).
std::int64_t CheckedMul(std::int64_t a, std::int64_t b);
std::int64_t CheckedAdd(std::int64_t a, std::int64_t b);

}  // namespace bud

#endif  // BUD_RATIONAL_H_
