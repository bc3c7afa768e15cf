#pragma once

// Grid outer approximation of the minimal sets K_1..K_d: bottom strongly
// connected components of the cell transition graph.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "circlerds/parallel.hpp"
#include "circlerds/rds.hpp"

namespace circlerds {

using Cell = std::uint32_t;
using CellSet = std::vector<Cell>;  // sorted, unique

class GridApprox {
 public:
  explicit GridApprox(std::uint32_t resolution) : n_(resolution) {
    if (n_ < 64 || (n_ & (n_ - 1)) != 0)
      throw Error(ErrorCode::InvalidGrid, "resolution " + std::to_string(n_) + " is not a power of two >= 64");
  }
  std::uint32_t resolution() const noexcept { return n_; }
  Rational width() const { return make_rational(1, n_); }
  Arc cell(Cell k) const { return Arc::closed(make_rational(k, n_), make_rational(k + 1, n_)); }
  /// Cell whose half-open span [k/n, (k+1)/n) holds x.
  Cell cell_of(const CirclePoint& x) const {
    return static_cast<Cell>(Integer(floor_of(Rational(x.value() * n_))).get_ui());
  }
  Cell cell_of(double x) const {
    auto k = static_cast<std::int64_t>(std::floor(x * n_));
    return static_cast<Cell>(((k % n_) + n_) % n_);
  }

 private:
  std::uint32_t n_;
};

/// Directed graph on cells, CSR layout with sorted targets per row.
struct TransitionGraph {
  std::uint32_t n = 0;
  std::vector<std::uint32_t> offset;
  std::vector<Cell> target;

  std::span<const Cell> out(Cell c) const {
    return {target.data() + offset[c], target.data() + offset[c + 1]};
  }
  std::size_t out_degree(Cell c) const { return offset[c + 1] - offset[c]; }
};

struct MinimalSetApprox {
  std::size_t index = 0;  // 1-based
  std::uint32_t resolution = 0;
  CellSet cells;
  std::vector<Arc> arcs;

  bool contains(const CirclePoint& x) const { return union_contains(arcs, x); }
};

namespace detail {

/// Cells overlapping the arc [a, a + len] (0 < len < 1) in positive length.
/// Their closed union covers the arc, so edges built from them still give an
/// outer approximation; contact at a single grid point adds no edge, which
/// keeps grid-aligned isometries from leaking one cell per step.
inline void cover_cells(const Rational& a, const Rational& len, std::uint32_t n, std::vector<Cell>& out) {
  Integer lo = floor_of(Rational(a * n));
  Integer hi = ceil_of(Rational((a + len) * n)) - 1;
  long count = Integer(hi - lo + 1).get_si();
  if (count >= static_cast<long>(n)) {
    for (Cell c = 0; c < n; ++c) out.push_back(c);
    return;
  }
  long start = Integer(lo).get_si();
  for (long j = 0; j < count; ++j) out.push_back(static_cast<Cell>(((start + j) % n + n) % n));
}

}  // namespace detail

/// Maximal circular runs of cells as closed dyadic arcs.
inline std::vector<Arc> cells_to_arcs(const CellSet& cells, std::uint32_t n) {
  std::vector<Arc> arcs;
  if (cells.empty()) return arcs;
  if (cells.size() == n) return {Arc::full_circle()};
  std::vector<char> in(n, 0);
  for (Cell c : cells) in[c] = 1;
  // Start just after a gap so runs wrapping through 0 are not split.
  Cell start = 0;
  while (in[start]) ++start;
  for (std::uint32_t step = 0; step < n; ++step) {
    Cell c = (start + step) % n;
    if (!in[c] || in[(c + n - 1) % n]) continue;
    Cell e = c;
    while (in[(e + 1) % n]) e = (e + 1) % n;
    arcs.push_back(Arc::closed(make_rational(c, n), make_rational(e + 1, n)));
  }
  std::sort(arcs.begin(), arcs.end(), [](const Arc& x, const Arc& y) { return x.lo() < y.lo(); });
  return arcs;
}

inline TransitionGraph build_transition_graph(const SystemSpec& s, const GridApprox& g, unsigned workers = 1) {
  const std::uint32_t n = g.resolution();
  // Images of the grid points k/n, one row per map.
  std::vector<std::vector<CirclePoint>> img(s.size(), std::vector<CirclePoint>(n));
  parallel_for(n, workers, [&](std::size_t k) {
    CirclePoint x(make_rational(static_cast<long>(k), n));
    for (std::size_t i = 0; i < s.size(); ++i) img[i][k] = s.map(i).eval(x);
  });
  std::vector<std::vector<Cell>> rows(n);
  parallel_for(n, workers, [&](std::size_t k) {
    auto& row = rows[k];
    for (std::size_t i = 0; i < s.size(); ++i) {
      CirclePoint a = img[i][k], b = img[i][(k + 1) % n];
      if (!s.map(i).preserves_orientation()) std::swap(a, b);
      detail::cover_cells(a.value(), ccw_offset(a, b), n, row);
    }
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
  });
  TransitionGraph tg;
  tg.n = n;
  tg.offset.assign(n + 1, 0);
  for (std::uint32_t k = 0; k < n; ++k) tg.offset[k + 1] = tg.offset[k] + static_cast<std::uint32_t>(rows[k].size());
  tg.target.reserve(tg.offset[n]);
  for (auto& row : rows) tg.target.insert(tg.target.end(), row.begin(), row.end());
  return tg;
}

/// Strongly connected component id per cell (iterative Tarjan).
inline std::vector<std::uint32_t> scc_ids(const TransitionGraph& tg, std::uint32_t& count) {
  const std::uint32_t n = tg.n;
  constexpr std::uint32_t kUnset = UINT32_MAX;
  std::vector<std::uint32_t> index(n, kUnset), low(n, 0), comp(n, kUnset);
  std::vector<char> on_stack(n, 0);
  std::vector<Cell> stack;
  std::vector<std::pair<Cell, std::uint32_t>> call;  // (cell, next edge position)
  std::uint32_t counter = 0;
  count = 0;
  for (Cell root = 0; root < n; ++root) {
    if (index[root] != kUnset) continue;
    call.push_back({root, tg.offset[root]});
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      auto& [v, pos] = call.back();
      if (pos < tg.offset[v + 1]) {
        Cell w = tg.target[pos++];
        if (index[w] == kUnset) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.push_back({w, tg.offset[w]});
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      Cell done = v;
      call.pop_back();
      if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
      if (low[done] == index[done]) {
        Cell w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp[w] = count;
        } while (w != done);
        ++count;
      }
    }
  }
  return comp;
}

/// Bottom SCCs of a transition graph, labelled by smallest cell.
inline std::vector<MinimalSetApprox> bottom_components(const TransitionGraph& tg) {
  std::uint32_t count = 0;
  auto comp = scc_ids(tg, count);
  std::vector<char> terminal(count, 1);
  for (Cell c = 0; c < tg.n; ++c)
    for (Cell t : tg.out(c))
      if (comp[t] != comp[c]) terminal[comp[c]] = 0;
  std::vector<CellSet> groups(count);
  for (Cell c = 0; c < tg.n; ++c)
    if (terminal[comp[c]]) groups[comp[c]].push_back(c);
  std::vector<CellSet> bottoms;
  for (auto& grp : groups)
    if (!grp.empty()) bottoms.push_back(std::move(grp));
  if (bottoms.empty()) throw Error(ErrorCode::NoBottomSCC, "transition graph has no bottom component");
  std::sort(bottoms.begin(), bottoms.end(), [](const CellSet& a, const CellSet& b) { return a.front() < b.front(); });
  std::vector<MinimalSetApprox> out;
  for (std::size_t i = 0; i < bottoms.size(); ++i) {
    MinimalSetApprox m;
    m.index = i + 1;
    m.resolution = tg.n;
    m.arcs = cells_to_arcs(bottoms[i], tg.n);
    m.cells = std::move(bottoms[i]);
    out.push_back(std::move(m));
  }
  return out;
}

inline std::vector<MinimalSetApprox> minimal_sets(const SystemSpec& s, const GridApprox& g, unsigned workers = 1) {
  return bottom_components(build_transition_graph(s, g, workers));
}

struct RefineResult {
  std::vector<MinimalSetApprox> sets;
  std::size_t coarse_count = 0;
  bool stable = false;
  bool nested = false;
  /// Set when d changed between resolutions (UnstableCount, reported not thrown).
  bool unstable_count = false;
  std::string note;
};

/// Recomputes at the target resolution; stable iff d is unchanged and every
/// fine set sits inside a coarse one.
inline RefineResult refine(const SystemSpec& s, const std::vector<MinimalSetApprox>& coarse,
                           std::uint32_t target_resolution, unsigned workers = 1) {
  if (coarse.empty()) throw Error(ErrorCode::InvalidGrid, "refine needs at least one coarse set");
  const std::uint32_t nc = coarse.front().resolution;
  GridApprox fine_grid(target_resolution);
  if (target_resolution < nc || target_resolution % nc != 0)
    throw Error(ErrorCode::InvalidGrid, "target resolution must be a power-of-two multiple of " + std::to_string(nc));
  RefineResult r;
  r.coarse_count = coarse.size();
  r.sets = minimal_sets(s, fine_grid, workers);
  const std::uint32_t ratio = target_resolution / nc;
  r.nested = std::all_of(r.sets.begin(), r.sets.end(), [&](const MinimalSetApprox& f) {
    return std::any_of(coarse.begin(), coarse.end(), [&](const MinimalSetApprox& c) {
      return std::all_of(f.cells.begin(), f.cells.end(),
                         [&](Cell k) { return std::binary_search(c.cells.begin(), c.cells.end(), k / ratio); });
    });
  });
  r.unstable_count = r.sets.size() != coarse.size();
  r.stable = !r.unstable_count && r.nested;
  if (r.unstable_count)
    r.note = "UnstableCount: d = " + std::to_string(coarse.size()) + " at " + std::to_string(nc) + ", d = " +
             std::to_string(r.sets.size()) + " at " + std::to_string(target_resolution);
  else if (!r.nested)
    r.note = "fine sets do not nest inside coarse sets";
  return r;
}

/// Cells from which the graph can reach only the i-th bottom component. Each
/// such set is closed under the graph, so its arc union is exactly invariant.
inline std::vector<CellSet> exclusive_basins(const TransitionGraph& tg, const std::vector<MinimalSetApprox>& sets) {
  const std::uint32_t n = tg.n;
  // Reverse adjacency.
  std::vector<std::uint32_t> roff(n + 1, 0);
  for (Cell t : tg.target) ++roff[t + 1];
  std::partial_sum(roff.begin(), roff.end(), roff.begin());
  std::vector<Cell> rsrc(tg.target.size());
  std::vector<std::uint32_t> fill(roff.begin(), roff.end() - 1);
  for (Cell c = 0; c < n; ++c)
    for (Cell t : tg.out(c)) rsrc[fill[t]++] = c;
  std::vector<std::uint32_t> reach_count(n, 0), reach_last(n, UINT32_MAX);
  for (std::size_t i = 0; i < sets.size(); ++i) {
    std::vector<char> seen(n, 0);
    std::vector<Cell> todo(sets[i].cells.begin(), sets[i].cells.end());
    for (Cell c : todo) seen[c] = 1;
    while (!todo.empty()) {
      Cell c = todo.back();
      todo.pop_back();
      for (std::uint32_t p = roff[c]; p < roff[c + 1]; ++p)
        if (!seen[rsrc[p]]) {
          seen[rsrc[p]] = 1;
          todo.push_back(rsrc[p]);
        }
    }
    for (Cell c = 0; c < n; ++c)
      if (seen[c]) {
        ++reach_count[c];
        reach_last[c] = static_cast<std::uint32_t>(i);
      }
  }
  std::vector<CellSet> out(sets.size());
  for (Cell c = 0; c < n; ++c)
    if (reach_count[c] == 1) out[reach_last[c]].push_back(c);
  return out;
}

/// Largest subset of `cells` closed under the graph.
inline CellSet invariant_kernel(const TransitionGraph& tg, CellSet cells) {
  std::vector<char> in(tg.n, 0);
  for (Cell c : cells) in[c] = 1;
  bool changed = true;
  while (changed) {
    changed = false;
    for (Cell c : cells) {
      if (!in[c]) continue;
      for (Cell t : tg.out(c))
        if (!in[t]) {
          in[c] = 0;
          changed = true;
          break;
        }
    }
  }
  CellSet out;
  for (Cell c : cells)
    if (in[c]) out.push_back(c);
  return out;
}

/// True iff every out-edge of the set stays in the set.
inline bool is_graph_invariant(const TransitionGraph& tg, const CellSet& cells) {
  for (Cell c : cells)
    for (Cell t : tg.out(c))
      if (!std::binary_search(cells.begin(), cells.end(), t)) return false;
  return true;
}

/// Exact check that every map sends each arc of the union into the union.
inline bool union_is_invariant(const SystemSpec& s, const std::vector<Arc>& arcs) {
  for (const auto& f : s.maps())
    for (const auto& a : arcs)
      if (!arc_in_union(image_arc(f, a), arcs)) return false;
  return true;
}

}  // namespace circlerds
