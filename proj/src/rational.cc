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

#include "bud/rational.h"

#include <cctype>
#include <string>

#include "bud/error.h"

namespace bud {
namespace {

std::int64_t ParseDigits(std::string_view digits, std::string_view whole) {
  if (digits.empty()) {
    throw Error(ErrorKind::kParse, "malformed number '" + std::string(whole) + "'");
  }
  std::int64_t value = 0;
  for (char c : digits) {
    if (!std::isdigit(static_cast<unsigned char>(c))) {
      throw Error(ErrorKind::kParse,
                  "malformed number '" + std::string(whole) + "'");
    }
    value = CheckedAdd(CheckedMul(value, 10), c - '0');
  }
  return value;
}

}  // namespace

std::int64_t CheckedMul(std::int64_t a, std::int64_t b) {
  std::int64_t out;
  if (__builtin_mul_overflow(a, b, &out)) {
    throw Error(ErrorKind::kInvalidArgument, "integer overflow in scaling");
  }
  return out;
}

std::int64_t CheckedAdd(std::int64_t a, std::int64_t b) {
  std::int64_t out;
  if (__builtin_add_overflow(a, b, &out)) {
    throw Error(ErrorKind::kInvalidArgument, "integer overflow in scaling");
  }
  return out;
}

Rational ParseRational(std::string_view text) {
  std::string_view body = text;
  bool negative = false;
  if (!body.empty() && (body.front() == '-' || body.front() == '+')) {
    negative = body.front() == '-';
    body.remove_prefix(1);
  }
  Rational value;
  if (auto slash = body.find('/'); slash != std::string_view::npos) {
    std::int64_t num = ParseDigits(body.substr(0, slash), text);
    std::int64_t den = ParseDigits(body.substr(slash + 1), text);
    if (den == 0) {
      throw Error(ErrorKind::kParse, "zero denominator in '" + std::string(text) + "'");
    }
    value = Rational(num, den);
  } else if (auto dot = body.find('.'); dot != std::string_view::npos) {
    std::string_view whole = body.substr(0, dot);
    std::string_view frac = body.substr(dot + 1);
    std::int64_t int_part = whole.empty() ? 0 : ParseDigits(whole, text);
    std::int64_t frac_part = frac.empty() ? 0 : ParseDigits(frac, text);
    std::int64_t den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) den = CheckedMul(den, 10);
    value = Rational(CheckedAdd(CheckedMul(int_part, den), frac_part), den);
  } else {
    value = Rational(ParseDigits(body, text));
  }
  return negative ? -value : value;
}

std::string RationalToString(const Rational& value) {
  if (value.denominator() == 1) return std::to_string(value.numerator());
  return std::to_string(value.numerator()) + "/" +
         std::to_string(value.denominator());
}

double ToDouble(const Rational& value) {
  return static_cast<double>(value.numerator()) /
         static_cast<double>(value.denominator());
}

}  // namespace bud
