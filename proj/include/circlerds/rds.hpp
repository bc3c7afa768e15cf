#pragma once

// The random dynamical system (F, nu): a finite family of circle
// homeomorphisms with positive rational weights.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "circlerds/homeo.hpp"
#include "circlerds/rng.hpp"

namespace circlerds {

class SystemSpec {
 public:
  SystemSpec(std::vector<Homeo> maps, std::vector<Rational> weights, std::string label = "")
      : maps_(std::move(maps)), weights_(std::move(weights)), label_(std::move(label)) {
    if (maps_.empty()) throw Error(ErrorCode::InvalidWeights, "system needs at least one map");
    if (maps_.size() != weights_.size())
      throw Error(ErrorCode::InvalidWeights, std::to_string(maps_.size()) + " maps but " +
                                                 std::to_string(weights_.size()) + " weights");
    Rational total(0);
    for (const auto& w : weights_) {
      if (w <= 0) throw Error(ErrorCode::InvalidWeights, "weight " + to_string(w) + " is not positive");
      total += w;
    }
    if (total != 1) throw Error(ErrorCode::InvalidWeights, "weights sum to " + to_string(total) + ", not 1");
  }

  /// Equal weights 1/m.
  static SystemSpec uniform(std::vector<Homeo> maps, std::string label = "") {
    std::vector<Rational> w(maps.size(), make_rational(1, static_cast<long>(maps.size())));
    return SystemSpec(std::move(maps), std::move(w), std::move(label));
  }

  std::size_t size() const noexcept { return maps_.size(); }
  const std::vector<Homeo>& maps() const noexcept { return maps_; }
  const Homeo& map(std::size_t i) const { return maps_.at(i); }
  const std::vector<Rational>& weights() const noexcept { return weights_; }
  const std::string& label() const noexcept { return label_; }

  bool all_preserving() const {
    return std::all_of(maps_.begin(), maps_.end(), [](const Homeo& f) { return f.preserves_orientation(); });
  }

 private:
  std::vector<Homeo> maps_;
  std::vector<Rational> weights_;
  std::string label_;
};

struct Trajectory {
  CirclePoint start;
  Word word;
  std::vector<CirclePoint> points;
};

/// Exact trajectory: points[k+1] = f_{word[k]}(points[k]).
inline Trajectory walk(const SystemSpec& s, const CirclePoint& x, const Word& w) {
  Trajectory t{x, w, {x}};
  t.points.reserve(w.size() + 1);
  for (std::size_t idx : w) {
    if (idx >= s.size()) throw Error(ErrorCode::InvalidWord, "letter " + std::to_string(idx) + " out of range");
    t.points.push_back(s.map(idx).eval(t.points.back()));
  }
  return t;
}

/// Composite f_{i_n} o ... o f_{i_1} as a single map.
inline Homeo word_map(const SystemSpec& s, const Word& w) {
  Homeo g = Homeo::identity();
  for (std::size_t idx : w) {
    if (idx >= s.size()) throw Error(ErrorCode::InvalidWord, "letter " + std::to_string(idx) + " out of range");
    g = compose(s.map(idx), g);
  }
  return g;
}

inline Arc image_arc(const SystemSpec& s, const Word& w, Arc a) {
  for (std::size_t idx : w) a = image_arc(s.map(idx), a);
  return a;
}

inline SystemSpec invert_system(const SystemSpec& s) {
  std::vector<Homeo> inv;
  for (const auto& f : s.maps()) inv.push_back(invert(f));
  return SystemSpec(std::move(inv), s.weights(), s.label() + "^-1");
}

/// Double-precision view of a system for Monte Carlo: compiled maps plus the
/// cumulative weight table used to turn a uniform draw into a letter.
class FastSystem {
 public:
  explicit FastSystem(const SystemSpec& s) {
    double acc = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      maps_.emplace_back(s.map(i));
      acc += s.weights()[i].get_d();
      cumulative_.push_back(acc);
    }
    cumulative_.back() = 1.0;
  }

  std::size_t size() const noexcept { return maps_.size(); }

  std::size_t letter(double u) const {
    std::size_t i = 0;
    while (i + 1 < cumulative_.size() && u >= cumulative_[i]) ++i;
    return i;
  }

  double apply(std::size_t i, double x) const { return maps_[i](x); }

 private:
  std::vector<FastMap> maps_;
  std::vector<double> cumulative_;
};

/// i.i.d. letters with marginals nu, keyed on (seed, sample_index, position).
inline Word sample_word(const SystemSpec& s, std::uint64_t seed, std::uint64_t sample_index, std::size_t length) {
  FastSystem fs(s);
  CounterRng rng(seed, sample_index);
  Word w(length);
  for (std::size_t k = 0; k < length; ++k) w[k] = fs.letter(rng.uniform(k));
  return w;
}

struct ValidationReport {
  bool passed = false;
  int max_period = 0;
  /// Finite invariant set found (FAIL only), sorted.
  std::vector<CirclePoint> witness;
  /// True when the seed points came from an element whose periodic set is
  /// finite, so absence of a witness is conclusive up to max_period.
  bool exhaustive = false;
  std::size_t nodes = 0;
  std::string note;
  /// Maps with a fixed point of slope exactly 1 on one side.
  std::vector<std::string> flags;
};

namespace detail {

/// Periodic points of g with period <= p, or nullopt when that set is infinite.
inline std::optional<std::set<Rational>> periodic_points(const Homeo& g, int p, std::size_t& nodes) {
  std::set<Rational> pts;
  Homeo power = g;
  for (int k = 1; k <= p; ++k) {
    if (k > 1) power = compose(g, power);
    ++nodes;
    if (power.is_identity()) return std::nullopt;
    try {
      for (const auto& fp : fixed_points(power)) pts.insert(fp.point.value());
    } catch (const Error& e) {
      if (e.code() == ErrorCode::IntervalOfFixedPoints || e.code() == ErrorCode::EverywhereFixed) return std::nullopt;
      throw;
    }
  }
  return pts;
}

/// Forward orbit of x under the maps, abandoned once it exceeds `cap` points.
inline std::optional<std::set<Rational>> bounded_orbit(const SystemSpec& s, const CirclePoint& x, std::size_t cap) {
  std::set<Rational> seen{x.value()};
  std::deque<CirclePoint> todo{x};
  while (!todo.empty()) {
    CirclePoint y = todo.front();
    todo.pop_front();
    for (const auto& f : s.maps()) {
      CirclePoint z = f.eval(y);
      if (seen.insert(z.value()).second) {
        if (seen.size() > cap) return std::nullopt;
        todo.push_back(z);
      }
    }
  }
  return seen;
}

}  // namespace detail

/// Searches for a finite set E, |E| <= max_period, with f(E) = E for every map.
/// Any such E consists of points of period <= |E| for every element g of the
/// semigroup, so the candidates are the periodic points of one element whose
/// periodic set is finite; each candidate's orbit is then closed under F.
/// PASS means "no finite orbit of size <= max_period", not a certificate.
inline ValidationReport validate_no_finite_orbit(const SystemSpec& s, int max_period = 6,
                                                 std::size_t node_budget = 1'000'000) {
  if (max_period < 1) throw Error(ErrorCode::InvalidConfig, "max_period must be >= 1");
  ValidationReport rep;
  rep.max_period = max_period;
  std::optional<std::set<Rational>> seeds;
  std::set<Rational> fallback{Rational(0)};

  auto consider = [&](const Homeo& g) {
    if (!g.is_identity()) {
      try {
        for (const auto& fp : fixed_points(g)) fallback.insert(fp.point.value());
      } catch (const Error&) {
      }
    }
    seeds = detail::periodic_points(g, max_period, rep.nodes);
    if (rep.nodes > node_budget) throw Error(ErrorCode::BudgetExceeded, "word tree exceeded node budget");
    return seeds.has_value();
  };

  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.map(i).is_identity()) continue;
    try {
      for (const auto& fp : fixed_points(s.map(i)))
        if (fp.stability == Stability::OneSided)
          rep.flags.push_back("map " + std::to_string(i + 1) + " has a one-sided fixed point at " + fp.point.str());
    } catch (const Error&) {
      rep.flags.push_back("map " + std::to_string(i + 1) + " fixes an interval pointwise");
    }
  }

  bool found = false;
  for (const auto& f : s.maps()) {
    Homeo pl = f.as_piecewise_linear();
    for (const auto& b : pl.breakpoints()) fallback.insert(b.x.value());
    if (consider(f)) {
      found = true;
      break;
    }
  }
  // Longer words, breadth first, until one has a finite periodic set.
  std::vector<Word> layer;
  for (std::size_t i = 0; i < s.size(); ++i) layer.push_back({i});
  for (int len = 2; !found && len <= max_period; ++len) {
    std::vector<Word> next;
    for (const auto& w : layer)
      for (std::size_t i = 0; i < s.size() && !found; ++i) {
        Word v = w;
        v.push_back(i);
        ++rep.nodes;
        if (rep.nodes > node_budget) throw Error(ErrorCode::BudgetExceeded, "word tree exceeded node budget");
        if (consider(word_map(s, v))) found = true;
        next.push_back(std::move(v));
      }
    layer = std::move(next);
  }

  std::set<Rational> candidates = found ? *seeds : fallback;
  rep.exhaustive = found;
  // Report the smallest finite orbit; ties go to the smallest seed.
  std::optional<std::set<Rational>> best;
  for (const auto& c : candidates) {
    auto orbit = detail::bounded_orbit(s, CirclePoint(c), static_cast<std::size_t>(max_period));
    if (orbit && (!best || orbit->size() < best->size())) best = std::move(orbit);
  }
  if (best) {
    rep.passed = false;
    for (const auto& v : *best) rep.witness.emplace_back(v);
    rep.note = "finite invariant set of size " + std::to_string(rep.witness.size());
    return rep;
  }
  rep.passed = true;
  rep.note = rep.exhaustive
                 ? "no finite orbit of size <= " + std::to_string(max_period) + " (bounded search, not a certificate)"
                 : "no finite orbit found among heuristic candidates; every element up to length " +
                       std::to_string(max_period) + " has infinitely many periodic points, search is inconclusive";
  return rep;
}

}  // namespace circlerds
