#pragma once

// Circle homeomorphisms with exact evaluation: piecewise-linear maps with
// rational breakpoints, rotations and reflections.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "circlerds/circle.hpp"

namespace circlerds {

struct Breakpoint {
  CirclePoint x;
  CirclePoint y;
};

enum class Stability { Attracting, Repelling, Neutral, OneSided };

inline const char* to_string(Stability s) {
  switch (s) {
    case Stability::Attracting: return "attracting";
    case Stability::Repelling: return "repelling";
    case Stability::Neutral: return "neutral";
    case Stability::OneSided: return "one-sided";
  }
  return "?";
}

struct FixedPoint {
  CirclePoint point;
  Stability stability;
};

/// Indices into a system's map list, consumed left to right: the word
/// (i_1, ..., i_n) acts as f_{i_n} o ... o f_{i_1}.
using Word = std::vector<std::size_t>;

class Homeo {
 public:
  enum class Kind { PiecewiseLinear, Rotation, Reflection };

  /// Piecewise-linear map through the given breakpoints (cyclically closed).
  /// Preserving maps need the y's in the same cyclic order as the x's;
  /// reversing maps need them in the opposite cyclic order.
  static Homeo piecewise_linear(std::vector<Breakpoint> bps, bool preserving) {
    Homeo h;
    h.kind_ = Kind::PiecewiseLinear;
    h.preserving_ = preserving;
    if (bps.size() < 2) throw Error(ErrorCode::InvalidHomeo, "PL map needs at least 2 breakpoints");
    std::sort(bps.begin(), bps.end(), [](const Breakpoint& a, const Breakpoint& b) { return a.x < b.x; });
    for (std::size_t i = 0; i + 1 < bps.size(); ++i)
      if (bps[i].x == bps[i + 1].x) throw Error(ErrorCode::InvalidHomeo, "repeated breakpoint x = " + bps[i].x.str());
    for (std::size_t i = 0; i < bps.size(); ++i)
      for (std::size_t j = i + 1; j < bps.size(); ++j)
        if (bps[i].y == bps[j].y) throw Error(ErrorCode::InvalidHomeo, "repeated breakpoint y = " + bps[i].y.str());
    if (bps.size() >= 3) {
      std::vector<CirclePoint> ys;
      for (const auto& b : bps) ys.push_back(b.y);
      if (!preserving) std::reverse(ys.begin(), ys.end());
      if (!is_circularly_ordered(ys))
        throw Error(ErrorCode::InvalidHomeo, std::string("breakpoint images are not in ") +
                                                 (preserving ? "the same" : "reversed") + " cyclic order");
    }
    h.bps_ = std::move(bps);
    return h;
  }

  static Homeo piecewise_linear(const std::vector<std::pair<Rational, Rational>>& pts, bool preserving) {
    std::vector<Breakpoint> bps;
    for (const auto& [x, y] : pts) bps.push_back({CirclePoint(x), CirclePoint(y)});
    return piecewise_linear(std::move(bps), preserving);
  }

  static Homeo rotation(const Rational& angle) {
    Homeo h;
    h.kind_ = Kind::Rotation;
    h.param_ = frac(angle);
    return h;
  }

  /// x -> (c - x) mod 1.
  static Homeo reflection(const Rational& c) {
    Homeo h;
    h.kind_ = Kind::Reflection;
    h.preserving_ = false;
    h.param_ = frac(c);
    return h;
  }

  static Homeo identity() { return rotation(Rational(0)); }

  Kind kind() const noexcept { return kind_; }
  bool preserves_orientation() const noexcept { return preserving_; }
  /// Rotation angle or reflection intercept.
  const Rational& parameter() const noexcept { return param_; }
  const std::vector<Breakpoint>& breakpoints() const noexcept { return bps_; }

  bool is_identity() const {
    if (kind_ == Kind::Rotation) return param_ == 0;
    if (kind_ == Kind::Reflection) return false;
    if (!preserving_) return false;
    return std::all_of(bps_.begin(), bps_.end(), [](const Breakpoint& b) { return b.x == b.y; });
  }

  bool is_isometry() const {
    if (kind_ != Kind::PiecewiseLinear) return true;
    for (std::size_t k = 0; k < bps_.size(); ++k)
      if (abs_of(slope(k)) != 1) return false;
    return true;
  }

  CirclePoint eval(const CirclePoint& x) const {
    switch (kind_) {
      case Kind::Rotation: return CirclePoint(x.value() + param_);
      case Kind::Reflection: return CirclePoint(param_ - x.value());
      case Kind::PiecewiseLinear: break;
    }
    std::size_t k = piece_of(x);
    Rational t = ccw_offset(bps_[k].x, x);
    return CirclePoint(bps_[k].y.value() + t * slope(k));
  }

  /// Number of linear pieces (PL maps only).
  std::size_t piece_count() const { return bps_.size(); }

  /// Lifted horizontal length of piece k.
  Rational piece_width(std::size_t k) const { return width_of(k); }

  /// Signed slope of piece k on lifts.
  Rational slope(std::size_t k) const { return rise_of(k) / width_of(k); }

  /// Index of the piece [x_k, x_{k+1}) containing x.
  std::size_t piece_of(const CirclePoint& x) const {
    auto it = std::upper_bound(bps_.begin(), bps_.end(), x,
                               [](const CirclePoint& v, const Breakpoint& b) { return v < b.x; });
    if (it == bps_.begin()) return bps_.size() - 1;
    return static_cast<std::size_t>(it - bps_.begin()) - 1;
  }

  /// Exact representation as a PL map (rotations and reflections included).
  Homeo as_piecewise_linear() const {
    if (kind_ == Kind::PiecewiseLinear) return *this;
    const Rational half = make_rational(1, 2);
    using Pts = std::vector<std::pair<Rational, Rational>>;
    if (kind_ == Kind::Rotation)
      return piecewise_linear(Pts{{Rational(0), param_}, {half, Rational(param_ + half)}}, true);
    return piecewise_linear(Pts{{Rational(0), param_}, {half, Rational(param_ - half)}}, false);
  }

  std::string describe() const {
    switch (kind_) {
      case Kind::Rotation: return "rotation(" + to_string(param_) + ")";
      case Kind::Reflection: return "reflection(" + to_string(param_) + ")";
      case Kind::PiecewiseLinear: break;
    }
    std::string s = std::string("pl[") + (preserving_ ? "+" : "-") + "]{";
    for (std::size_t i = 0; i < bps_.size(); ++i) {
      if (i) s += ", ";
      s += "(" + bps_[i].x.str() + "," + bps_[i].y.str() + ")";
    }
    return s + "}";
  }

  /// Extensional equality on all breakpoints of both maps (exact for PL maps).
  friend bool operator==(const Homeo& f, const Homeo& g) {
    if (f.preserving_ != g.preserving_) return false;
    if (f.kind_ != Kind::PiecewiseLinear && f.kind_ == g.kind_) return f.param_ == g.param_;
    Homeo pf = f.as_piecewise_linear(), pg = g.as_piecewise_linear();
    for (const auto* h : {&pf, &pg})
      for (const auto& b : h->bps_) {
        if (!(pf.eval(b.x) == pg.eval(b.x))) return false;
      }
    return true;
  }

 private:
  Rational width_of(std::size_t k) const {
    std::size_t next = (k + 1) % bps_.size();
    Rational w = ccw_offset(bps_[k].x, bps_[next].x);
    return w;
  }
  Rational rise_of(std::size_t k) const {
    std::size_t next = (k + 1) % bps_.size();
    if (preserving_) return ccw_offset(bps_[k].y, bps_[next].y);
    return -ccw_offset(bps_[next].y, bps_[k].y);
  }

  Kind kind_ = Kind::Rotation;
  bool preserving_ = true;
  Rational param_{0};
  std::vector<Breakpoint> bps_;
};

inline CirclePoint eval(const Homeo& f, const CirclePoint& x) { return f.eval(x); }

inline Homeo invert(const Homeo& f) {
  switch (f.kind()) {
    case Homeo::Kind::Rotation: return Homeo::rotation(-f.parameter());
    case Homeo::Kind::Reflection: return f;
    case Homeo::Kind::PiecewiseLinear: break;
  }
  std::vector<Breakpoint> swapped;
  for (const auto& b : f.breakpoints()) swapped.push_back({b.y, b.x});
  return Homeo::piecewise_linear(std::move(swapped), f.preserves_orientation());
}

namespace detail {

/// Drops breakpoints where the slope does not change (keeps at least two).
inline std::vector<Breakpoint> merge_collinear(std::vector<Breakpoint> bps, bool preserving) {
  bool changed = true;
  while (changed && bps.size() > 2) {
    changed = false;
    Homeo h = Homeo::piecewise_linear(bps, preserving);
    for (std::size_t k = 0; k < bps.size(); ++k) {
      std::size_t prev = (k + bps.size() - 1) % bps.size();
      if (h.slope(prev) == h.slope(k)) {
        bps.erase(bps.begin() + static_cast<std::ptrdiff_t>(k));
        changed = true;
        break;
      }
    }
  }
  return bps;
}

}  // namespace detail

/// f o g as a single map.
inline Homeo compose(const Homeo& f, const Homeo& g) {
  using K = Homeo::Kind;
  if (f.kind() == K::Rotation && g.kind() == K::Rotation) return Homeo::rotation(f.parameter() + g.parameter());
  if (f.kind() == K::Rotation && g.kind() == K::Reflection) return Homeo::reflection(g.parameter() + f.parameter());
  if (f.kind() == K::Reflection && g.kind() == K::Rotation) return Homeo::reflection(f.parameter() - g.parameter());
  if (f.kind() == K::Reflection && g.kind() == K::Reflection) return Homeo::rotation(f.parameter() - g.parameter());

  Homeo pf = f.as_piecewise_linear();
  Homeo pg = g.as_piecewise_linear();
  Homeo g_inv = invert(pg);
  std::vector<CirclePoint> ts;
  for (const auto& b : pg.breakpoints()) ts.push_back(b.x);
  for (const auto& b : pf.breakpoints()) ts.push_back(g_inv.eval(b.x));
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  std::vector<Breakpoint> bps;
  bps.reserve(ts.size());
  for (const auto& t : ts) bps.push_back({t, pf.eval(pg.eval(t))});
  bool preserving = pf.preserves_orientation() == pg.preserves_orientation();
  return Homeo::piecewise_linear(detail::merge_collinear(std::move(bps), preserving), preserving);
}

/// Image of an arc; endpoints swap under orientation-reversing maps.
inline Arc image_arc(const Homeo& f, const Arc& a) {
  if (a.is_full()) return a;
  CirclePoint lo = f.eval(a.lo());
  CirclePoint hi = f.eval(a.hi());
  if (!f.preserves_orientation()) std::swap(lo, hi);
  return a.is_closed() ? Arc::closed(lo, hi) : Arc::open(lo, hi);
}

namespace detail {

inline Stability classify(const Rational& left, const Rational& right) {
  Rational l = abs_of(left), r = abs_of(right);
  bool l1 = l == 1, r1 = r == 1;
  if (l1 && r1) return Stability::Neutral;
  if (l1 || r1) return Stability::OneSided;
  if (l < 1 && r < 1) return Stability::Attracting;
  if (l > 1 && r > 1) return Stability::Repelling;
  return Stability::Neutral;
}

}  // namespace detail

/// Exact fixed points, sorted by position in [0, 1).
inline std::vector<FixedPoint> fixed_points(const Homeo& f) {
  using K = Homeo::Kind;
  if (f.is_identity()) throw Error(ErrorCode::EverywhereFixed, "identity map fixes every point");
  if (f.kind() == K::Rotation) return {};
  if (f.kind() == K::Reflection) {
    Rational half_c = f.parameter() / 2;
    std::vector<FixedPoint> out{{CirclePoint(half_c), Stability::Neutral},
                                {CirclePoint(half_c + make_rational(1, 2)), Stability::Neutral}};
    std::sort(out.begin(), out.end(), [](const FixedPoint& a, const FixedPoint& b) { return a.point < b.point; });
    return out;
  }
  const auto& bps = f.breakpoints();
  const std::size_t m = bps.size();
  std::map<Rational, Stability> found;
  for (std::size_t k = 0; k < m; ++k) {
    Rational s = f.slope(k);
    Rational dx = f.piece_width(k);
    Rational r = bps[k].x.value() - bps[k].y.value();
    if (s == 1) {
      if (frac(r) == 0)
        throw Error(ErrorCode::IntervalOfFixedPoints, "piece starting at " + bps[k].x.str() + " is fixed pointwise");
      continue;
    }
    Rational sm1 = s - 1;
    Rational end = sm1 * dx;
    Rational lo = end < 0 ? end : Rational(0);
    Rational hi = end < 0 ? Rational(0) : end;
    Integer j_lo = ceil_of(Rational(lo - r));
    Integer j_hi = floor_of(Rational(hi - r));
    for (Integer j = j_lo; j <= j_hi; ++j) {
      Rational t = (Rational(j) + r) / sm1;
      CirclePoint p(bps[k].x.value() + t);
      Rational left = s, right = s;
      if (t == 0) left = f.slope((k + m - 1) % m);
      if (t == dx) right = f.slope((k + 1) % m);
      found.emplace(p.value(), detail::classify(left, right));
    }
  }
  std::vector<FixedPoint> out;
  for (const auto& [v, st] : found) out.push_back({CirclePoint(v), st});
  return out;
}

/// Double-precision copy of a map for long Monte Carlo orbits.
class FastMap {
 public:
  FastMap() = default;
  explicit FastMap(const Homeo& f) {
    Homeo pl = f.as_piecewise_linear();
    const auto& bps = pl.breakpoints();
    for (std::size_t k = 0; k < bps.size(); ++k) {
      xs_.push_back(bps[k].x.to_double());
      ys_.push_back(bps[k].y.to_double());
      slopes_.push_back(pl.slope(k).get_d());
    }
  }

  double operator()(double x) const {
    std::size_t k;
    double t;
    if (x < xs_.front()) {
      k = xs_.size() - 1;
      t = x + 1.0 - xs_[k];
    } else {
      k = static_cast<std::size_t>(std::upper_bound(xs_.begin(), xs_.end(), x) - xs_.begin()) - 1;
      t = x - xs_[k];
    }
    double y = ys_[k] + slopes_[k] * t;
    y -= std::floor(y);
    return y >= 1.0 ? 0.0 : y;
  }

 private:
  std::vector<double> xs_, ys_, slopes_;
};

}  // namespace circlerds
