#pragma once

// Random generators shared by the property tests. Seeds are fixed so
// failures reproduce.

#include <algorithm>
#include <ostream>
#include <random>
#include <vector>

#include "circlerds/homeo.hpp"

namespace circlerds {

inline void PrintTo(const CirclePoint& p, std::ostream* os) { *os << p.str(); }
inline void PrintTo(const Arc& a, std::ostream* os) { *os << a.str(); }

}  // namespace circlerds

namespace testutil {

using namespace circlerds;

/// Random point k / den.
inline CirclePoint random_point(std::mt19937_64& rng, long den = 1L << 12) {
  return CirclePoint(make_rational(static_cast<long>(rng() % static_cast<std::uint64_t>(den)), den));
}

/// m distinct random points on the 1/den grid, sorted.
inline std::vector<long> distinct_ticks(std::mt19937_64& rng, std::size_t m, long den) {
  std::vector<long> v;
  while (v.size() < m) {
    long t = static_cast<long>(rng() % static_cast<std::uint64_t>(den));
    if (std::find(v.begin(), v.end(), t) == v.end()) v.push_back(t);
  }
  std::sort(v.begin(), v.end());
  return v;
}

/// Random PL homeomorphism with 2..max_pieces breakpoints on a dyadic grid.
inline Homeo random_pl(std::mt19937_64& rng, bool preserving, std::size_t max_pieces = 6, long den = 256) {
  const std::size_t m = 2 + rng() % (max_pieces - 1);
  auto xs = distinct_ticks(rng, m, den);
  auto ys = distinct_ticks(rng, m, den);
  const std::size_t shift = rng() % m;
  std::vector<Breakpoint> bps;
  for (std::size_t i = 0; i < m; ++i) {
    std::size_t j = preserving ? (i + shift) % m : (shift + m - i) % m;
    bps.push_back({CirclePoint(make_rational(xs[i], den)), CirclePoint(make_rational(ys[j], den))});
  }
  return Homeo::piecewise_linear(std::move(bps), preserving);
}

/// Any of the three kinds, either orientation.
inline Homeo random_homeo(std::mt19937_64& rng) {
  switch (rng() % 4) {
    case 0: return Homeo::rotation(make_rational(static_cast<long>(rng() % 1024), 1024));
    case 1: return Homeo::reflection(make_rational(static_cast<long>(rng() % 1024), 1024));
    default: return random_pl(rng, rng() % 2 == 0);
  }
}

inline Arc random_closed_arc(std::mt19937_64& rng, long den = 1L << 12) {
  CirclePoint a = random_point(rng, den), b = random_point(rng, den);
  return Arc::closed(a, b);
}

}  // namespace testutil
