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

#ifndef BUD_INTERVAL_SET_H_
#define BUD_INTERVAL_SET_H_

#include <algorithm>
#include <initializer_list>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

namespace bud {

template <typename T>
struct Interval {
  T lo;
  T hi;

  friend bool operator==(const Interval&, const Interval&) = default;
};

// Finite union of closed intervals kept as a sorted list of pairwise
// disjoint components (previous.hi < next.lo). T is an exact ordered ring:
// the DP instantiates it with integers in a common scaled unit, tests also
// use boost::rational.
template <typename T>
class IntervalSet {
 public:
  IntervalSet() = default;

  static IntervalSet Point(T x) {
    IntervalSet s;
    s.parts_.push_back({x, x});
    return s;
  }

  static IntervalSet Of(T lo, T hi) {
    IntervalSet s;
    if (!(hi < lo)) s.parts_.push_back({lo, hi});
    return s;
  }

  static IntervalSet FromPoints(std::initializer_list<T> points) {
    std::vector<Interval<T>> parts;
    for (const T& p : points) parts.push_back({p, p});
    return FromIntervals(std::move(parts));
  }

  // Accepts intervals in any order; drops empty ones and merges overlaps.
  static IntervalSet FromIntervals(std::vector<Interval<T>> parts) {
    IntervalSet s;
    std::erase_if(parts, [](const Interval<T>& i) { return i.hi < i.lo; });
    std::sort(parts.begin(), parts.end(),
              [](const Interval<T>& a, const Interval<T>& b) {
                return a.lo < b.lo;
              });
    for (const Interval<T>& part : parts) {
      if (!s.parts_.empty() && !(s.parts_.back().hi < part.lo)) {
        if (s.parts_.back().hi < part.hi) s.parts_.back().hi = part.hi;
      } else {
        s.parts_.push_back(part);
      }
    }
    return s;
  }

  bool empty() const { return parts_.empty(); }
  int size() const { return static_cast<int>(parts_.size()); }
  std::span<const Interval<T>> components() const { return parts_; }

  bool Contains(const T& x) const {
    auto it = std::upper_bound(
        parts_.begin(), parts_.end(), x,
        [](const T& value, const Interval<T>& i) { return value < i.lo; });
    return it != parts_.begin() && !(std::prev(it)->hi < x);
  }

  // Non-empty intersection with [lo, hi].
  bool Intersects(const T& lo, const T& hi) const {
    for (const Interval<T>& i : parts_) {
      if (!(i.hi < lo) && !(hi < i.lo)) return true;
      if (hi < i.lo) break;
    }
    return false;
  }

  // A subset B iff every component of A lies inside one component of B.
  bool IsSubsetOf(const IntervalSet& other) const {
    for (const Interval<T>& i : parts_) {
      bool covered = false;
      for (const Interval<T>& j : other.parts_) {
        if (!(i.lo < j.lo) && !(j.hi < i.hi)) {
          covered = true;
          break;
        }
      }
      if (!covered) return false;
    }
    return true;
  }

  friend bool operator==(const IntervalSet&, const IntervalSet&) = default;

  friend std::ostream& operator<<(std::ostream& os, const IntervalSet& s) {
    os << "{";
    for (std::size_t i = 0; i < s.parts_.size(); ++i) {
      if (i) os << ", ";
      os << "[" << s.parts_[i].lo << "," << s.parts_[i].hi << "]";
    }
    return os << "}";
  }

 private:
  template <typename U>
  friend IntervalSet<U> GapClosure(const IntervalSet<U>&, const U&);
  template <typename U>
  friend IntervalSet<U> Crop(const IntervalSet<U>&, const U&);

  std::vector<Interval<T>> parts_;
};

// Merges consecutive components whose separation is at most `gap`.
template <typename T>
IntervalSet<T> GapClosure(const IntervalSet<T>& a, const T& gap) {
  IntervalSet<T> out;
  for (const Interval<T>& part : a.parts_) {
    if (!out.parts_.empty() && !(gap < part.lo - out.parts_.back().hi)) {
      out.parts_.back().hi = part.hi;
    } else {
      out.parts_.push_back(part);
    }
  }
  return out;
}

// A intersected with (-inf, upper].
template <typename T>
IntervalSet<T> Crop(const IntervalSet<T>& a, const T& upper) {
  IntervalSet<T> out;
  for (const Interval<T>& part : a.parts_) {
    if (upper < part.lo) break;
    out.parts_.push_back({part.lo, upper < part.hi ? upper : part.hi});
  }
  return out;
}

template <typename T>
IntervalSet<T> MinkowskiSum(const IntervalSet<T>& a, const IntervalSet<T>& b) {
  std::vector<Interval<T>> parts;
  parts.reserve(a.components().size() * b.components().size());
  for (const Interval<T>& x : a.components()) {
    for (const Interval<T>& y : b.components()) {
      parts.push_back({x.lo + y.lo, x.hi + y.hi});
    }
  }
  return IntervalSet<T>::FromIntervals(std::move(parts));
}

template <typename T>
IntervalSet<T> Union(const IntervalSet<T>& a, const IntervalSet<T>& b) {
  std::vector<Interval<T>> parts(a.components().begin(), a.components().end());
  parts.insert(parts.end(), b.components().begin(), b.components().end());
  return IntervalSet<T>::FromIntervals(std::move(parts));
}

// Crop at `upper`, then close with `gap`: the normal form every DP table
// entry is kept in.
template <typename T>
IntervalSet<T> CropThenClose(const IntervalSet<T>& a, const T& upper,
                             const T& gap) {
  return GapClosure(Crop(a, upper), gap);
}

}  // namespace bud

#endif  // BUD_INTERVAL_SET_H_
