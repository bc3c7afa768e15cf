#pragma once

// Built-in systems shared by tests, the CLI demo and the shipped JSON files.

#include <utility>
#include <vector>

#include "circlerds/rds.hpp"

namespace circlerds::fixtures {

/// Orientation-preserving PL map fixing exactly the given points, which must
/// alternate attracting / repelling around the circle. On each gap the
/// midpoint is pushed a quarter of the gap toward the attracting end.
inline Homeo north_south(std::vector<std::pair<Rational, bool>> fixed) {
  std::sort(fixed.begin(), fixed.end());
  const std::size_t k = fixed.size();
  if (k < 2 || k % 2 != 0) throw Error(ErrorCode::InvalidHomeo, "north_south needs an even number >= 2 of fixed points");
  std::vector<Breakpoint> bps;
  for (std::size_t i = 0; i < k; ++i) {
    const auto& [p, attracting] = fixed[i];
    const auto& [q, next_attracting] = fixed[(i + 1) % k];
    if (attracting == next_attracting)
      throw Error(ErrorCode::InvalidHomeo, "north_south fixed points must alternate attracting/repelling");
    Rational gap = frac(q - p);
    if (gap == 0) gap = 1;
    Rational mid = p + gap / 2;
    Rational shift = gap / 4;
    bps.push_back({CirclePoint(p), CirclePoint(p)});
    bps.push_back({CirclePoint(mid), CirclePoint(attracting ? Rational(mid - shift) : Rational(mid + shift))});
  }
  return Homeo::piecewise_linear(std::move(bps), true);
}

inline Rational q(long n, long d) { return make_rational(n, d); }

/// f1 of the worked example: fixes 0, 1/4, 1/2, 3/4 (0 and 1/2 attracting).
inline Homeo example_f1() {
  return north_south({{q(0, 1), true}, {q(1, 4), false}, {q(1, 2), true}, {q(3, 4), false}});
}

/// f2 of the worked example: fixes 1/8, 3/8, 5/8, 7/8 (3/8 and 7/8 attracting).
inline Homeo example_f2() {
  return north_south({{q(1, 8), false}, {q(3, 8), true}, {q(5, 8), false}, {q(7, 8), true}});
}

inline Homeo example_f3() { return Homeo::reflection(q(7, 8)); }

inline SystemSpec example71() {
  return SystemSpec::uniform({example_f1(), example_f2(), example_f3()}, "example71");
}

/// The two orientation-preserving maps of the worked example.
inline SystemSpec op_pair() { return SystemSpec::uniform({example_f1(), example_f2()}, "op_pair"); }

/// Golden-mean surrogate F30 / F31 (denominator above 10^6).
inline Rational golden_angle() { return q(832040, 1346269); }

inline SystemSpec rotation() { return SystemSpec::uniform({Homeo::rotation(golden_angle())}, "rotation"); }

/// Two attracting arcs for index 1 swapped by a reflection, one for index 2.
inline SystemSpec split_case() {
  Homeo g1 = north_south({{q(1, 16), true}, {q(5, 32), false}, {q(5, 16), true},
                          {q(7, 16), false}, {q(5, 8), true}, {q(7, 8), false}});
  Homeo g2 = north_south({{q(1, 8), true}, {q(7, 32), false}, {q(1, 4), true},
                          {q(1, 2), false}, {q(3, 4), true}, {q(15, 16), false}});
  return SystemSpec::uniform({g1, g2, Homeo::reflection(q(3, 8))}, "split_case");
}

inline SystemSpec single_reflection() { return SystemSpec::uniform({example_f3()}, "single_reflection"); }

/// Two minimal arcs [1/4, 1/4 + 1/64] and [q, q + 1/64] only 1/256 apart.
/// Closed cells of width 1/64 bridge the gap; width 1/1024 does not.
inline SystemSpec under_resolved() {
  Rational p = q(1, 4), w = q(1, 64);
  Rational r1 = p + w + q(3, 2048), r2 = p + w + q(5, 2048), b = p + w + q(8, 2048);
  Homeo g1 = north_south({{p, true}, {r1, false}, {b, true}, {q(3, 4), false}});
  Homeo g2 = north_south({{Rational(p + w), true}, {r2, false}, {Rational(b + w), true}, {q(7, 8), false}});
  return SystemSpec::uniform({g1, g2}, "under_resolved");
}

}  // namespace circlerds::fixtures
