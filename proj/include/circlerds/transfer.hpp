#pragma once

// Grid transfer operator acting on measures, Cesaro averages, the ergodic
// stationary measures and the decomposition of m_x over them.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "circlerds/minimal.hpp"

namespace circlerds {

struct GridMeasure {
  std::uint32_t resolution = 0;
  std::vector<double> mass;
  /// Largest |total - 1| seen before renormalizing, over every step taken.
  double drift = 0.0;

  double total() const {
    double t = 0.0;
    for (double m : mass) t += m;
    return t;
  }

  static GridMeasure uniform(std::uint32_t n) { return {n, std::vector<double>(n, 1.0 / n), 0.0}; }
  static GridMeasure point(std::uint32_t n, Cell c) {
    GridMeasure m{n, std::vector<double>(n, 0.0), 0.0};
    m.mass.at(c) = 1.0;
    return m;
  }
};

inline void renormalize(GridMeasure& m) {
  double t = m.total();
  if (!(t > 0.0)) throw Error(ErrorCode::InvalidConfig, "measure has no mass");
  m.drift = std::max(m.drift, std::abs(t - 1.0));
  for (double& v : m.mass) v /= t;
}

/// Sup of |F - G| over the CDFs accumulated from cell 0.
inline double sup_cdf_distance(const GridMeasure& a, const GridMeasure& b) {
  if (a.resolution != b.resolution) throw Error(ErrorCode::LengthMismatch, "measures on different grids");
  double fa = 0.0, fb = 0.0, best = 0.0;
  for (std::size_t k = 0; k < a.mass.size(); ++k) {
    fa += a.mass[k];
    fb += b.mass[k];
    best = std::max(best, std::abs(fa - fb));
  }
  return best;
}

inline double tv_distance(const GridMeasure& a, const GridMeasure& b) {
  if (a.resolution != b.resolution) throw Error(ErrorCode::LengthMismatch, "measures on different grids");
  double s = 0.0;
  for (std::size_t k = 0; k < a.mass.size(); ++k) s += std::abs(a.mass[k] - b.mass[k]);
  return s / 2.0;
}

/// Ulam matrix of sum_f nu_f f_*: a cell's mass goes to the cells meeting its
/// exact image arc in proportion to overlap length. Stored by target so each
/// output cell is summed in a fixed source order whatever the thread count.
class TransferOperator {
 public:
  TransferOperator(const SystemSpec& s, std::uint32_t n, unsigned workers = 1) : n_(n), workers_(workers) {
    GridApprox grid(n);  // validates n
    (void)grid;
    std::vector<std::vector<std::pair<Cell, double>>> rows(n);  // by source
    parallel_for(n, workers, [&](std::size_t k) {
      std::vector<std::pair<Cell, double>> row;
      CirclePoint x0(make_rational(static_cast<long>(k), n)), x1(make_rational(static_cast<long>(k + 1), n));
      for (std::size_t i = 0; i < s.size(); ++i) {
        const Homeo& f = s.map(i);
        CirclePoint a = f.eval(x0), b = f.eval(x1);
        if (!f.preserves_orientation()) std::swap(a, b);
        Rational lo = a.value() * n;
        Rational hi = lo + ccw_offset(a, b) * n;
        Rational len = hi - lo;
        const double w = s.weights()[i].get_d();
        for (Integer m = floor_of(lo); m < hi; ++m) {
          Rational left = std::max(lo, Rational(m)), right = std::min(hi, Rational(m + 1));
          if (right <= left) continue;
          long c = Integer(m % n).get_si();
          if (c < 0) c += n;
          row.push_back({static_cast<Cell>(c), w * Rational((right - left) / len).get_d()});
        }
      }
      std::sort(row.begin(), row.end(), [](const auto& p, const auto& q) { return p.first < q.first; });
      // Merge duplicates in sorted order so sums are reproducible.
      std::vector<std::pair<Cell, double>> merged;
      for (const auto& e : row) {
        if (!merged.empty() && merged.back().first == e.first)
          merged.back().second += e.second;
        else
          merged.push_back(e);
      }
      rows[k] = std::move(merged);
    });
    offset_.assign(n + 1, 0);
    for (const auto& row : rows)
      for (const auto& e : row) ++offset_[e.first + 1];
    for (std::uint32_t k = 0; k < n; ++k) offset_[k + 1] += offset_[k];
    source_.resize(offset_[n]);
    weight_.resize(offset_[n]);
    std::vector<std::size_t> fill(offset_.begin(), offset_.end() - 1);
    for (Cell src = 0; src < n; ++src)
      for (const auto& [dst, w] : rows[src]) {
        source_[fill[dst]] = src;
        weight_[fill[dst]++] = w;
      }
  }

  std::uint32_t resolution() const noexcept { return n_; }
  std::size_t nonzeros() const noexcept { return source_.size(); }

  GridMeasure push(const GridMeasure& mu) const {
    if (mu.resolution != n_) throw Error(ErrorCode::LengthMismatch, "measure resolution differs from operator");
    GridMeasure out{n_, std::vector<double>(n_, 0.0), mu.drift};
    auto body = [&](std::size_t dst) {
      double acc = 0.0;
      for (std::size_t e = offset_[dst]; e < offset_[dst + 1]; ++e) acc += weight_[e] * mu.mass[source_[e]];
      out.mass[dst] = acc;
    };
    // Small grids are not worth the thread start-up.
    parallel_for(n_, n_ >= 8192 ? workers_ : 1u, body);
    renormalize(out);
    return out;
  }

  /// (1/N) sum_{k<N} P^k applied to the point mass on x's cell.
  GridMeasure cesaro(const CirclePoint& x, std::size_t N) const {
    if (N < 1) throw Error(ErrorCode::InvalidConfig, "N must be >= 1");
    GridMeasure cur = GridMeasure::point(n_, GridApprox(n_).cell_of(x));
    GridMeasure sum{n_, std::vector<double>(n_, 0.0), 0.0};
    for (std::size_t k = 0; k < N; ++k) {
      if (k > 0) cur = push(cur);
      for (std::uint32_t c = 0; c < n_; ++c) sum.mass[c] += cur.mass[c];
    }
    for (double& v : sum.mass) v /= static_cast<double>(N);
    sum.drift = cur.drift;
    return sum;
  }

 private:
  std::uint32_t n_;
  unsigned workers_;
  std::vector<std::size_t> offset_;
  std::vector<Cell> source_;
  std::vector<double> weight_;
};

inline GridMeasure push_measure(const SystemSpec& s, const GridMeasure& mu, unsigned workers = 1) {
  return TransferOperator(s, mu.resolution, workers).push(mu);
}

inline GridMeasure cesaro_average(const SystemSpec& s, const CirclePoint& x, std::size_t N, std::uint32_t n = 4096,
                                  unsigned workers = 1) {
  return TransferOperator(s, n, workers).cesaro(x, N);
}

/// Mass of m inside the closed union of arcs, counted per cell by the
/// fraction of the cell the arcs cover.
inline double mass_in_arcs(const GridMeasure& m, const std::vector<Arc>& arcs) {
  const std::uint32_t n = m.resolution;
  double total = 0.0;
  for (const auto& a : arcs) {
    if (a.length() == 1) return m.total();
    Rational lo = a.lo().value() * n, hi = lo + a.length() * n;
    for (Integer j = floor_of(lo); j < hi; ++j) {
      Rational left = std::max(lo, Rational(j)), right = std::min(hi, Rational(j + 1));
      if (right <= left) continue;
      long c = Integer(j % n).get_si();
      if (c < 0) c += n;
      total += m.mass[static_cast<std::size_t>(c)] * Rational(right - left).get_d();
    }
  }
  return total;
}

/// mu_i started from the midpoint of K_i's first arc.
inline std::vector<GridMeasure> stationary_measures(const TransferOperator& op, const std::vector<MinimalSetApprox>& K,
                                                    std::size_t N, double leak_tol = 1e-3) {
  std::vector<GridMeasure> mus;
  for (const auto& k : K) {
    const Arc& a = k.arcs.front();
    CirclePoint mid(a.lo().value() + a.length() / 2);
    GridMeasure mu = op.cesaro(mid, N);
    double inside = mass_in_arcs(mu, k.arcs);
    if (inside < 1.0 - leak_tol)
      throw Error(ErrorCode::SupportLeak, "mu_" + std::to_string(k.index) + " has only " + std::to_string(inside) +
                                              " of its mass inside K_" + std::to_string(k.index));
    mus.push_back(std::move(mu));
  }
  return mus;
}

inline std::vector<GridMeasure> stationary_measures(const SystemSpec& s, const std::vector<MinimalSetApprox>& K,
                                                    std::size_t N, std::uint32_t n = 4096, unsigned workers = 1) {
  return stationary_measures(TransferOperator(s, n, workers), K, N);
}

inline CellSet support_cells(const GridMeasure& m, double threshold = 0.0) {
  CellSet out;
  for (std::uint32_t c = 0; c < m.resolution; ++c)
    if (m.mass[c] > threshold) out.push_back(c);
  return out;
}

/// Support cells with a neighbour outside the support.
inline std::size_t boundary_cell_count(const GridMeasure& m, double threshold = 0.0) {
  const std::uint32_t n = m.resolution;
  std::size_t count = 0;
  for (std::uint32_t c = 0; c < n; ++c)
    if (m.mass[c] > threshold && (!(m.mass[(c + 1) % n] > threshold) || !(m.mass[(c + n - 1) % n] > threshold)))
      ++count;
  return count;
}

struct Decomposition {
  std::vector<double> t;
  double residual = 0.0;
};

inline Decomposition decompose(const GridMeasure& m, const std::vector<GridMeasure>& mus, double threshold = 0.0) {
  if (mus.empty()) throw Error(ErrorCode::InvalidConfig, "decompose needs at least one measure");
  std::vector<int> owner(m.resolution, -1);
  for (std::size_t i = 0; i < mus.size(); ++i) {
    if (mus[i].resolution != m.resolution) throw Error(ErrorCode::LengthMismatch, "measures on different grids");
    for (Cell c : support_cells(mus[i], threshold)) {
      if (owner[c] >= 0)
        throw Error(ErrorCode::NondisjointSupports, "supports of mu_" + std::to_string(owner[c] + 1) + " and mu_" +
                                                        std::to_string(i + 1) + " share cell " + std::to_string(c));
      owner[c] = static_cast<int>(i);
    }
  }
  Decomposition d{std::vector<double>(mus.size(), 0.0), 0.0};
  for (std::uint32_t c = 0; c < m.resolution; ++c) {
    if (owner[c] >= 0)
      d.t[static_cast<std::size_t>(owner[c])] += m.mass[c];
    else
      d.residual += m.mass[c];
  }
  return d;
}

// CSV: cell_index,lo,hi,mass.

inline void write_measure_csv(const GridMeasure& m, std::ostream& out) {
  out << "cell_index,lo,hi,mass\n";
  char buf[96];
  for (std::uint32_t c = 0; c < m.resolution; ++c) {
    std::snprintf(buf, sizeof buf, "%u,%.17g,%.17g,%.17g\n", c, static_cast<double>(c) / m.resolution,
                  static_cast<double>(c + 1) / m.resolution, m.mass[c]);
    out << buf;
  }
}

inline GridMeasure read_measure_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("cell_index", 0) != 0)
    throw Error(ErrorCode::ParseError, "measure CSV needs a cell_index,lo,hi,mass header");
  std::vector<double> mass;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string idx, lo, hi, val;
    if (!std::getline(ss, idx, ',') || !std::getline(ss, lo, ',') || !std::getline(ss, hi, ',') ||
        !std::getline(ss, val))
      throw Error(ErrorCode::ParseError, "bad measure row: " + line);
    try {
      if (std::stoul(idx) != mass.size()) throw Error(ErrorCode::ParseError, "cell indices must run 0..n-1");
      double v = std::stod(val);
      if (v < 0 || !std::isfinite(v)) throw Error(ErrorCode::ParseError, "negative or non-finite mass: " + line);
      mass.push_back(v);
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::ParseError, "bad measure row: " + line);
    }
  }
  auto n = static_cast<std::uint32_t>(mass.size());
  GridApprox check(n);  // power of two >= 64
  (void)check;
  GridMeasure m{n, std::move(mass), 0.0};
  renormalize(m);
  m.drift = 0.0;
  return m;
}

}  // namespace circlerds
