#pragma once

// Exact order predicates on the circle S^1 = [0, 1), counterclockwise.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "circlerds/error.hpp"
#include "circlerds/rational.hpp"

namespace circlerds {

/// A point of S^1 stored as an exact rational in [0, 1).
class CirclePoint {
 public:
  CirclePoint() = default;
  /// Reduces mod 1.
  explicit CirclePoint(const Rational& v) : value_(frac(v)) {}
  CirclePoint(long num, long den) : value_(frac(make_rational(num, den))) {}

  const Rational& value() const noexcept { return value_; }
  double to_double() const { return value_.get_d(); }
  std::string str() const { return to_string(value_); }

  friend bool operator==(const CirclePoint& a, const CirclePoint& b) { return a.value_ == b.value_; }
  /// Order of the representatives in [0, 1); only meaningful for sorting.
  friend bool operator<(const CirclePoint& a, const CirclePoint& b) { return a.value_ < b.value_; }

 private:
  Rational value_{0};
};

/// Counterclockwise displacement from `from` to `to`, in [0, 1).
inline Rational ccw_offset(const CirclePoint& from, const CirclePoint& to) {
  return frac(to.value() - from.value());
}

/// True iff <a, b, c> is circularly ordered (counterclockwise a -> b -> c).
inline bool co3(const CirclePoint& a, const CirclePoint& b, const CirclePoint& c) {
  if (a == b || b == c || a == c)
    throw Error(ErrorCode::DuplicatePoint, "co3 needs pairwise distinct points");
  return ccw_offset(a, b) < ccw_offset(a, c);
}

inline bool is_circularly_ordered(std::span<const CirclePoint> pts) {
  const std::size_t n = pts.size();
  if (n < 3) throw Error(ErrorCode::InvalidPartition, "circular order needs at least 3 points");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (pts[i] == pts[j]) throw Error(ErrorCode::DuplicatePoint, "point " + pts[i].str() + " repeated");
  // Lifting pts[0] to 0, the offsets must increase strictly; this is the same
  // as every cyclic triple being in CO.
  Rational prev(0);
  for (std::size_t i = 1; i < n; ++i) {
    Rational off = ccw_offset(pts[0], pts[i]);
    if (off <= prev) return false;
    prev = off;
  }
  return true;
}

inline bool is_circularly_ordered(const std::vector<CirclePoint>& pts) {
  return is_circularly_ordered(std::span<const CirclePoint>(pts));
}

/// Closed or open arc traversed counterclockwise from lo to hi, or the whole circle.
class Arc {
 public:
  static Arc closed(const CirclePoint& lo, const CirclePoint& hi) { return Arc(lo, hi, true, false); }
  static Arc open(const CirclePoint& lo, const CirclePoint& hi) {
    if (lo == hi) throw Error(ErrorCode::InvalidArc, "open arc (a,a) is not allowed; use Arc::full_circle()");
    return Arc(lo, hi, false, false);
  }
  static Arc full_circle() { return Arc(CirclePoint(), CirclePoint(), true, true); }
  static Arc closed(const Rational& lo, const Rational& hi) { return closed(CirclePoint(lo), CirclePoint(hi)); }

  const CirclePoint& lo() const noexcept { return lo_; }
  const CirclePoint& hi() const noexcept { return hi_; }
  bool is_closed() const noexcept { return closed_; }
  bool is_full() const noexcept { return full_; }
  bool is_point() const noexcept { return !full_ && lo_ == hi_; }

  /// Arc length in turns; 1 for the full circle.
  Rational length() const { return full_ ? Rational(1) : ccw_offset(lo_, hi_); }

  bool contains(const CirclePoint& x) const {
    if (full_) return true;
    if (x == lo_ || x == hi_) return closed_;
    if (lo_ == hi_) return false;
    return co3(lo_, x, hi_);
  }

  /// Position of x along the arc measured from lo (only meaningful for x in the arc).
  Rational position(const CirclePoint& x) const { return ccw_offset(lo_, x); }

  bool subset_of(const Arc& other) const {
    if (other.full_) return true;
    if (full_) return false;
    if (is_point()) return other.contains(lo_);
    Rational off = ccw_offset(other.lo_, lo_);
    Rational end = off + length();
    Rational cap = other.length();
    if (closed_ && !other.closed_) return off > 0 && end < cap;
    return end <= cap;
  }

  /// Intersection test for closed arcs (the grid and all interval families are closed).
  bool intersects(const Arc& other) const {
    if (!closed_ || !other.closed_) throw Error(ErrorCode::InvalidArc, "intersects() is defined for closed arcs");
    if (full_ || other.full_) return true;
    return contains(other.lo_) || other.contains(lo_);
  }

  std::string str() const {
    if (full_) return "S1";
    return std::string(closed_ ? "[" : "(") + lo_.str() + ", " + hi_.str() + (closed_ ? "]" : ")");
  }

  friend bool operator==(const Arc& a, const Arc& b) {
    if (a.full_ || b.full_) return a.full_ == b.full_;
    return a.lo_ == b.lo_ && a.hi_ == b.hi_ && a.closed_ == b.closed_;
  }

 private:
  Arc(CirclePoint lo, CirclePoint hi, bool closed, bool full)
      : lo_(std::move(lo)), hi_(std::move(hi)), closed_(closed), full_(full) {}

  CirclePoint lo_;
  CirclePoint hi_;
  bool closed_ = true;
  bool full_ = false;
};

/// True iff x lies in the union of the arcs.
inline bool union_contains(std::span<const Arc> arcs, const CirclePoint& x) {
  for (const auto& a : arcs)
    if (a.contains(x)) return true;
  return false;
}

/// True iff A is contained in a single arc of the family (arcs are disjoint,
/// so a connected set inside the union is inside one member).
inline bool arc_in_union(const Arc& a, std::span<const Arc> arcs) {
  for (const auto& b : arcs)
    if (a.subset_of(b)) return true;
  return false;
}

/// Shortest distance on the circle, in [0, 1/2].
inline Rational circle_dist(const CirclePoint& x, const CirclePoint& y) {
  Rational d = ccw_offset(x, y);
  Rational other = Rational(1) - d;
  return d <= other ? (d == 0 ? Rational(0) : d) : other;
}

inline double circle_dist(double x, double y) {
  double d = std::fabs(x - y);
  d -= std::floor(d);
  return d <= 0.5 ? d : 1.0 - d;
}

/// A cyclically closed list of distinct points, counterclockwise.
class Partition {
 public:
  explicit Partition(std::vector<CirclePoint> points) : points_(std::move(points)) {
    if (points_.size() < 2) throw Error(ErrorCode::InvalidPartition, "partition needs at least 2 points");
    for (std::size_t i = 0; i < points_.size(); ++i)
      if (points_[i] == points_[(i + 1) % points_.size()])
        throw Error(ErrorCode::InvalidPartition, "consecutive partition points coincide");
    if (points_.size() >= 3 && !is_circularly_ordered(points_))
      throw Error(ErrorCode::InvalidPartition, "partition points are not circularly ordered");
  }

  std::size_t size() const noexcept { return points_.size(); }
  const std::vector<CirclePoint>& points() const noexcept { return points_; }

 private:
  std::vector<CirclePoint> points_;
};

/// Sum of |phi(x_i) - phi(x_{i+1})| around the partition (a lower bound of V(phi)).
inline double total_variation(std::span<const double> values, const Partition& partition) {
  if (values.size() != partition.size())
    throw Error(ErrorCode::LengthMismatch, std::to_string(values.size()) + " values for " +
                                               std::to_string(partition.size()) + " partition points");
  double tv = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) tv += std::fabs(values[i] - values[(i + 1) % values.size()]);
  return tv;
}

}  // namespace circlerds
