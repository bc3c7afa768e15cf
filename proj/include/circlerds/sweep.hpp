#pragma once

// Randomized falsification sweep for the d+ / d- comparison over random
// north-south systems on a dyadic grid.

#include <string>
#include <vector>

#include "circlerds/fixtures.hpp"
#include "circlerds/structure.hpp"

namespace circlerds {

enum class SweepFamily { Mixed, Preserving };

struct SweepConfig {
  std::size_t count = 50;
  SweepFamily family = SweepFamily::Mixed;
  std::uint64_t seed = 1;
  std::uint32_t resolution = 4096;
  long grid_denominator = 32;
  std::size_t max_attempts = 1000;
  unsigned workers = 1;
};

struct SweepEntry {
  SystemSpec system;
  InverseComparison comparison;
  std::size_t attempt = 0;
  /// The counting statement fails (|d+ - d-| > 1, or d+ != d- for
  /// orientation-preserving systems).
  bool violation = false;
};

struct SweepResult {
  std::vector<SweepEntry> entries;
  std::size_t rejected = 0;  // candidates failing validation
  std::size_t violations = 0;
  std::size_t other_failures = 0;  // gap location or gap invariance failed
};

namespace detail {

/// Draws one candidate. Positions on the 1/den grid come from the counter
/// stream `rng`, consumed from position `pos` on.
inline Homeo random_north_south(const CounterRng& rng, std::uint64_t& pos, long den) {
  std::size_t pairs = 1 + rng.bits(pos++) % 2;
  std::vector<long> pts;
  while (pts.size() < 2 * pairs) {
    long v = static_cast<long>(rng.bits(pos++) % static_cast<std::uint64_t>(den));
    if (std::find(pts.begin(), pts.end(), v) == pts.end()) pts.push_back(v);
  }
  std::sort(pts.begin(), pts.end());
  bool attracting = rng.bits(pos++) & 1;
  std::vector<std::pair<Rational, bool>> fixed;
  for (long v : pts) {
    fixed.push_back({make_rational(v, den), attracting});
    attracting = !attracting;
  }
  return fixtures::north_south(std::move(fixed));
}

/// North-south map with one attractor in each trap and one repeller in each
/// gap between consecutive traps (traps sorted, as grid index pairs).
inline Homeo trapping_map(const CounterRng& rng, std::uint64_t& pos, long den,
                          const std::vector<std::pair<long, long>>& traps) {
  std::vector<std::pair<Rational, bool>> fixed;
  const std::size_t k = traps.size();
  auto pick = [&](long lo, long hi) {  // uniform in [lo, hi]
    return lo + static_cast<long>(rng.bits(pos++) % static_cast<std::uint64_t>(hi - lo + 1));
  };
  for (std::size_t t = 0; t < k; ++t) {
    auto [a, b] = traps[t];
    long next = traps[(t + 1) % k].first + (t + 1 == k ? den : 0);
    fixed.push_back({make_rational(((pick(a, b) % den) + den) % den, den), true});
    fixed.push_back({make_rational(((pick(b + 1, next - 1) % den) + den) % den, den), false});
  }
  return fixtures::north_south(std::move(fixed));
}

}  // namespace detail

/// Candidate `attempt` for sweep slot `index`. Three in four candidates are
/// built around trap arcs that a reflection x -> c - x permutes, so several
/// minimal sets are common; the rest are unconstrained north-south maps.
inline SystemSpec random_system(SweepFamily family, std::uint64_t seed, std::uint64_t index, std::uint64_t attempt,
                                long den) {
  CounterRng rng(hash_combine(seed, index), attempt);
  std::uint64_t pos = 0;
  const std::size_t m = 2 + rng.bits(pos++) % 2;
  const bool structured = rng.bits(pos++) % 4 != 0;
  const long half = den / 2;
  const long j = static_cast<long>(rng.bits(pos++) % static_cast<std::uint64_t>(half));
  const Rational c = make_rational(2 * j, den);
  // Traps in (j, j + half) as offsets, mirrored through x -> 2j - x.
  std::vector<std::pair<long, long>> traps;
  if (structured) {
    const std::size_t h = 1 + rng.bits(pos++) % 2;
    std::vector<long> cuts;
    for (std::size_t tries = 0; cuts.size() < 2 * h && tries < 64; ++tries) {
      long o = 1 + static_cast<long>(rng.bits(pos++) % static_cast<std::uint64_t>(half - 1));
      if (std::find(cuts.begin(), cuts.end(), o) == cuts.end()) cuts.push_back(o);
      std::sort(cuts.begin(), cuts.end());
      for (std::size_t q = 2; q < cuts.size(); q += 2)
        if (cuts[q] < cuts[q - 1] + 2) {
          cuts.erase(cuts.begin() + static_cast<long>(q));
          break;
        }
    }
    if (cuts.size() < 2 * h) cuts.resize(2 * (cuts.size() / 2));
    for (std::size_t q = 0; q + 1 < cuts.size(); q += 2) {
      traps.push_back({j + cuts[q], j + cuts[q + 1]});
      traps.push_back({j - cuts[q + 1], j - cuts[q]});
    }
    for (auto& [a, b] : traps) {
      long shift = ((a % den) + den) % den - a;
      a += shift;
      b += shift;
    }
    std::sort(traps.begin(), traps.end());
  }
  std::vector<Homeo> maps;
  for (std::size_t i = 0; i < m; ++i) {
    Homeo g = traps.empty() ? detail::random_north_south(rng, pos, den) : detail::trapping_map(rng, pos, den, traps);
    // Mixed systems always carry a reversing map and may carry more.
    bool reverse = family == SweepFamily::Mixed && (i == 0 || (rng.bits(pos++) & 1));
    if (reverse) {
      Rational cc = structured ? c : make_rational(static_cast<long>(rng.bits(pos++) % static_cast<std::uint64_t>(den)), den);
      g = compose(Homeo::reflection(cc), g);
    }
    maps.push_back(std::move(g));
  }
  std::string label = std::string(family == SweepFamily::Mixed ? "mixed" : "preserving") + "_" +
                      std::to_string(seed) + "_" + std::to_string(index) + "_" + std::to_string(attempt);
  return SystemSpec::uniform(std::move(maps), label);
}

inline SweepResult run_sweep(const SweepConfig& cfg) {
  if (cfg.count < 1) throw Error(ErrorCode::InvalidConfig, "sweep count must be >= 1");
  SweepResult r;
  GridApprox grid(cfg.resolution);
  for (std::size_t k = 0; k < cfg.count; ++k) {
    bool done = false;
    for (std::size_t attempt = 0; attempt < cfg.max_attempts && !done; ++attempt) {
      SystemSpec s = random_system(cfg.family, cfg.seed, k, attempt, cfg.grid_denominator);
      if (!validate_no_finite_orbit(s).passed || !validate_no_finite_orbit(invert_system(s)).passed) {
        ++r.rejected;
        continue;
      }
      SweepEntry e{s, inverse_comparison(s, grid, cfg.workers), attempt, false};
      e.violation = !e.comparison.bound_ok || !e.comparison.equality_ok;
      r.violations += e.violation ? 1 : 0;
      if (!e.violation && !e.comparison.verdict) ++r.other_failures;
      r.entries.push_back(std::move(e));
      done = true;
    }
    if (!done)
      throw Error(ErrorCode::BudgetExceeded, "no validation-passing system after " + std::to_string(cfg.max_attempts) +
                                                 " attempts for sweep index " + std::to_string(k));
  }
  return r;
}

}  // namespace circlerds
