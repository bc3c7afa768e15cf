#pragma once

// Interval families E, A, B, C around the minimal sets, hat points, the
// neighbour graph and the comparison of d+ with d-.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "circlerds/weights.hpp"

namespace circlerds {

enum class FamilyKind { E, A, B, CUnordered, COrdered };

inline const char* to_string(FamilyKind k) {
  switch (k) {
    case FamilyKind::E: return "E";
    case FamilyKind::A: return "A";
    case FamilyKind::B: return "B";
    case FamilyKind::CUnordered: return "C";
    case FamilyKind::COrdered: return "C_ordered";
  }
  return "?";
}

struct IntervalFamily {
  FamilyKind kind = FamilyKind::A;
  std::size_t owner = 0;   // 0-based index; first index of the pair for C kinds
  std::size_t owner2 = 0;  // C kinds only
  std::vector<Arc> arcs;
};

// ---------------------------------------------------------------------------
// A and E families.

/// Arcs of maximal level-one probe runs snapped outward to the grid, without
/// any invariance repair.
inline std::vector<Arc> level_one_arcs(const WeightProfile& p, std::size_t i, double delta_one, std::uint32_t n) {
  return cells_to_arcs(plateau_cells(p, i, delta_one, n), n);
}

/// Level-one family: the probe plateau intersected with its largest
/// graph-closed subset, so the union is exactly invariant.
inline IntervalFamily level_one_family(const WeightProfile& p, std::size_t i, double delta_one,
                                       const TransitionGraph& tg, const std::vector<MinimalSetApprox>& K) {
  if (delta_one <= 0.0 || delta_one > 0.1) throw Error(ErrorCode::InvalidConfig, "delta_one must lie in (0, 0.1]");
  CellSet cells = invariant_kernel(tg, plateau_cells(p, i, delta_one, tg.n));
  for (Cell c : K.at(i).cells)
    if (!std::binary_search(cells.begin(), cells.end(), c))
      throw Error(ErrorCode::MissingMinimalSet, "K_" + std::to_string(i + 1) + " is not inside the level-one plateau");
  return {FamilyKind::A, i, 0, cells_to_arcs(cells, tg.n)};
}

/// Exact inner approximation of A_i from the graph alone: cells that can
/// reach no bottom component other than the i-th.
inline std::vector<IntervalFamily> graph_a_families(const TransitionGraph& tg, const std::vector<MinimalSetApprox>& K) {
  auto basins = exclusive_basins(tg, K);
  std::vector<IntervalFamily> out;
  for (std::size_t i = 0; i < K.size(); ++i) out.push_back({FamilyKind::A, i, 0, cells_to_arcs(basins[i], tg.n)});
  return out;
}

/// Maximal arcs with endpoints in K_i avoiding every other K_j: hulls of
/// consecutive runs of K_i's arcs in circular order.
inline IntervalFamily e_family(const std::vector<MinimalSetApprox>& K, std::size_t i) {
  IntervalFamily fam{FamilyKind::E, i, 0, {}};
  if (K.size() == 1) {
    fam.arcs = {Arc::full_circle()};
    return fam;
  }
  std::vector<std::pair<Arc, std::size_t>> all;
  for (const auto& m : K)
    for (const auto& a : m.arcs) all.push_back({a, m.index - 1});
  std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) { return x.first.lo() < y.first.lo(); });
  const std::size_t n = all.size();
  std::size_t start = 0;
  while (all[start].second == i) ++start;  // some arc belongs to another set
  for (std::size_t step = 1; step <= n; ++step) {
    std::size_t k = (start + step) % n;
    if (all[k].second != i || all[(k + n - 1) % n].second == i) continue;
    std::size_t e = k;
    while (all[(e + 1) % n].second == i) e = (e + 1) % n;
    fam.arcs.push_back(Arc::closed(all[k].first.lo(), all[e].first.hi()));
  }
  std::sort(fam.arcs.begin(), fam.arcs.end(), [](const Arc& x, const Arc& y) { return x.lo() < y.lo(); });
  return fam;
}

/// Between consecutive arcs of one A family some probe must sit on another
/// index's level-one plateau.
inline CheckResult check_gap_property(const WeightProfile& p, const std::vector<IntervalFamily>& A, double delta_one) {
  CheckResult r{"gap_property", true, "", {}};
  std::size_t gaps = 0;
  for (const auto& fam : A) {
    const std::size_t m = fam.arcs.size();
    if (m < 2) continue;
    for (std::size_t k = 0; k < m; ++k) {
      Arc gap = Arc::open(fam.arcs[k].hi(), fam.arcs[(k + 1) % m].lo());
      ++gaps;
      bool found = false;
      for (std::size_t q = 0; q < p.grid.size() && !found; ++q) {
        if (!gap.contains(p.grid[q])) continue;
        for (std::size_t j = 0; j < p.d && !found; ++j)
          found = j != fam.owner && is_level_one(p.estimates[q], j, delta_one);
      }
      if (!found) {
        r.passed = false;
        r.witnesses.push_back("gap " + gap.str() + " of A_" + std::to_string(fam.owner + 1));
      }
    }
  }
  r.detail = std::to_string(gaps) + " gaps examined";
  return r;
}

struct PermutationReport {
  bool passed = true;
  /// targets[f][j] = k with f(I_j) inside I_k, or -1.
  std::vector<std::vector<int>> targets;
  std::vector<std::string> witnesses;
};

inline PermutationReport check_permutation_property(const SystemSpec& s, const IntervalFamily& fam) {
  PermutationReport r;
  for (std::size_t f = 0; f < s.size(); ++f) {
    std::vector<int> t(fam.arcs.size(), -1);
    std::vector<char> hit(fam.arcs.size(), 0);
    for (std::size_t j = 0; j < fam.arcs.size(); ++j) {
      Arc img = image_arc(s.map(f), fam.arcs[j]);
      for (std::size_t k = 0; k < fam.arcs.size(); ++k)
        if (img.subset_of(fam.arcs[k])) {
          t[j] = static_cast<int>(k);
          break;
        }
      if (t[j] < 0) {
        r.passed = false;
        r.witnesses.push_back("map " + std::to_string(f + 1) + " sends " + fam.arcs[j].str() + " outside the family");
      } else if (hit[static_cast<std::size_t>(t[j])]++) {
        r.passed = false;
        r.witnesses.push_back("map " + std::to_string(f + 1) + " is not injective on arcs at " + fam.arcs[j].str());
      }
    }
    r.targets.push_back(std::move(t));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Hat points.

enum class HatCase { ProximalWhole, Split };

inline const char* to_string(HatCase c) { return c == HatCase::Split ? "split" : "proximal_whole"; }

struct HatPoints {
  Arc interval = Arc::full_circle();
  CirclePoint a_hat;  // explored sup of f(a), f preserving with f(I) in I
  CirclePoint b_hat;  // explored inf of f(b)
  /// Bounds snapped to the components of the grid minimal set inside I.
  CirclePoint a_snap;
  CirclePoint b_snap;
  HatCase hat_case = HatCase::ProximalWhole;
  std::size_t word_length_bound = 0;
  std::size_t nodes = 0;
  std::size_t candidates = 0;
  std::size_t reversing_candidates = 0;
  /// Budget ran out: a_hat / b_hat are best-so-far bounds.
  bool lower_bound = false;
};

namespace detail {

/// Depth-first walk over words whose running image of tracked[0] stays inside
/// the family. The other tracked arcs ride along, so visit(word, images,
/// preserving) sees every image without recomposing the word.
template <class Visit>
void explore_words(const SystemSpec& s, const std::vector<Arc>& tracked, const std::vector<Arc>& family,
                   std::size_t L_max, std::size_t budget, std::size_t& nodes, bool& exhausted, Visit&& visit) {
  struct Frame {
    std::vector<Arc> images;
    bool preserving;
    std::size_t depth;
    std::size_t next;
  };
  std::vector<Frame> stack{{tracked, true, 0, 0}};
  Word word;
  nodes = 0;
  exhausted = false;
  visit(word, tracked, true);
  while (!stack.empty()) {
    Frame& top = stack.back();
    if (top.depth == L_max || top.next == s.size()) {
      stack.pop_back();
      if (!word.empty()) word.pop_back();
      continue;
    }
    const std::size_t f = top.next++;
    const Homeo& map = s.map(f);
    Arc img = image_arc(map, top.images.front());
    if (!arc_in_union(img, family)) continue;
    if (++nodes > budget) {
      exhausted = true;
      return;
    }
    std::vector<Arc> images{img};
    for (std::size_t t = 1; t < top.images.size(); ++t) images.push_back(image_arc(map, top.images[t]));
    bool pres = top.preserving == map.preserves_orientation();
    std::size_t depth = top.depth + 1;
    word.push_back(f);
    visit(word, images, pres);
    stack.push_back({std::move(images), pres, depth, 0});
  }
}

/// Component of the arc union containing x, or the first one after x along I.
inline const Arc* component_at_or_after(const Arc& I, const std::vector<Arc>& comps, const CirclePoint& x) {
  const Arc* best = nullptr;
  Rational best_pos;
  Rational px = I.position(x);
  for (const auto& c : comps) {
    if (!c.subset_of(I)) continue;
    if (c.contains(x)) return &c;
    Rational pos = I.position(c.lo());
    if (pos >= px && (!best || pos < best_pos)) {
      best = &c;
      best_pos = pos;
    }
  }
  return best;
}

/// Component containing x, or the last one before x along I.
inline const Arc* component_at_or_before(const Arc& I, const std::vector<Arc>& comps, const CirclePoint& x) {
  const Arc* best = nullptr;
  Rational best_pos;
  Rational px = I.position(x);
  for (const auto& c : comps) {
    if (!c.subset_of(I)) continue;
    if (c.contains(x)) return &c;
    Rational pos = I.position(c.hi());
    if (pos <= px && (!best || pos > best_pos)) {
      best = &c;
      best_pos = pos;
    }
  }
  return best;
}

}  // namespace detail

/// Explores words up to L_max keeping the running image inside `family`
/// (defaults to {I}). `minimal_arcs` are the grid minimal-set arcs used for
/// snapping; when empty the raw bounds are used.
inline HatPoints hat_points(const SystemSpec& s, const Arc& I, std::size_t L_max, std::size_t budget,
                            const std::vector<Arc>& family = {}, const std::vector<Arc>& minimal_arcs = {}) {
  if (!I.is_closed() || I.is_full() || I.is_point())
    throw Error(ErrorCode::InvalidArc, "hat_points needs a proper closed arc");
  const std::vector<Arc> fam = family.empty() ? std::vector<Arc>{I} : family;
  HatPoints h;
  h.interval = I;
  h.word_length_bound = L_max;
  Rational best_a = 0, best_b = I.length();
  bool exhausted = false;
  detail::explore_words(s, {I}, fam, L_max, budget, h.nodes, exhausted,
                        [&](const Word&, const std::vector<Arc>& images, bool pres) {
                          const Arc& img = images.front();
                          if (!img.subset_of(I)) return;
                          ++h.candidates;
                          if (!pres) {
                            ++h.reversing_candidates;
                            return;
                          }
                          Rational pa = I.position(img.lo()), pb = I.position(img.hi());
                          if (pa > best_a) best_a = pa;
                          if (pb < best_b) best_b = pb;
                        });
  h.lower_bound = exhausted;
  h.a_hat = CirclePoint(I.lo().value() + best_a);
  h.b_hat = CirclePoint(I.lo().value() + best_b);
  h.a_snap = h.a_hat;
  h.b_snap = h.b_hat;
  if (!minimal_arcs.empty()) {
    if (const Arc* c = detail::component_at_or_after(I, minimal_arcs, h.a_hat)) h.a_snap = c->hi();
    if (const Arc* c = detail::component_at_or_before(I, minimal_arcs, h.b_hat)) h.b_snap = c->lo();
  }
  h.hat_case = I.position(h.a_snap) < I.position(h.b_snap) ? HatCase::Split : HatCase::ProximalWhole;
  return h;
}

struct RoutingReport {
  std::size_t words = 0;
  std::size_t exceptions = 0;
  std::vector<std::string> witnesses;
};

/// Every explored word w with w(I) inside I must map [a, a_hat] and
/// [b_hat, b] into themselves (preserving) or into each other (reversing).
inline RoutingReport check_routing(const SystemSpec& s, const HatPoints& h, const std::vector<Arc>& family,
                                   std::size_t budget) {
  RoutingReport r;
  const Arc& I = h.interval;
  const Arc left = Arc::closed(I.lo(), h.a_snap), right = Arc::closed(h.b_snap, I.hi());
  const std::vector<Arc> fam = family.empty() ? std::vector<Arc>{I} : family;
  std::size_t nodes = 0;
  bool exhausted = false;
  detail::explore_words(s, {I, left, right}, fam, h.word_length_bound, budget, nodes, exhausted,
                        [&](const Word& w, const std::vector<Arc>& images, bool pres) {
                          if (!images[0].subset_of(I)) return;
                          ++r.words;
                          const Arc& wl = images[1];
                          const Arc& wr = images[2];
                          bool ok = pres ? (wl.subset_of(left) && wr.subset_of(right))
                                         : (wl.subset_of(right) && wr.subset_of(left));
                          if (!ok) {
                            ++r.exceptions;
                            if (r.witnesses.size() < 10) {
                              std::string ws;
                              for (auto x : w) ws += std::to_string(x + 1);
                              r.witnesses.push_back("word " + ws);
                            }
                          }
                        });
  return r;
}

struct ProximalDecomposition {
  IntervalFamily family;  // kind B
  std::vector<HatPoints> hats;
  bool cardinality_ok = true;  // all arcs split or none
  bool containment_ok = true;  // K in union B in union A
  std::string note;
};

inline ProximalDecomposition proximal_decomposition(const SystemSpec& s, const IntervalFamily& A,
                                                    const MinimalSetApprox& K, std::size_t L_max,
                                                    std::size_t budget = 1'000'000) {
  ProximalDecomposition out;
  out.family = {FamilyKind::B, A.owner, 0, {}};
  if (A.arcs.size() == 1 && A.arcs.front().is_full()) {
    out.family.arcs = A.arcs;
    out.note = "A is the whole circle";
    return out;
  }
  std::size_t splits = 0;
  for (const auto& I : A.arcs) {
    HatPoints h = hat_points(s, I, L_max, budget, A.arcs, K.arcs);
    if (h.hat_case == HatCase::Split) {
      ++splits;
      out.family.arcs.push_back(Arc::closed(I.lo(), h.a_snap));
      out.family.arcs.push_back(Arc::closed(h.b_snap, I.hi()));
    } else {
      out.family.arcs.push_back(I);
    }
    out.hats.push_back(std::move(h));
  }
  out.cardinality_ok = splits == 0 || splits == A.arcs.size();
  if (!out.cardinality_ok)
    out.note = "CardinalityViolation at depth " + std::to_string(L_max) + ": " + std::to_string(splits) + " of " +
               std::to_string(A.arcs.size()) + " arcs split";
  for (const auto& k : K.arcs)
    if (!arc_in_union(k, out.family.arcs)) out.containment_ok = false;
  for (const auto& b : out.family.arcs)
    if (!arc_in_union(b, A.arcs)) out.containment_ok = false;
  std::sort(out.family.arcs.begin(), out.family.arcs.end(), [](const Arc& x, const Arc& y) { return x.lo() < y.lo(); });
  return out;
}

struct SyncReport {
  std::size_t pairs = 0;
  std::size_t synchronized = 0;
  double fraction = 0.0;
};

/// Fraction of random pairs in I whose common random orbit comes within eps.
inline SyncReport synchronization_test(const SystemSpec& s, const Arc& I, std::size_t pairs, std::size_t N,
                                       const Rational& eps, std::uint64_t seed, unsigned workers = 1) {
  FastSystem fs(s);
  const double lo = I.lo().to_double(), len = I.length().get_d(), e = eps.get_d();
  std::vector<char> hit(pairs, 0);
  parallel_for(pairs, workers, [&](std::size_t k) {
    CounterRng pos(seed, 2 * k), letters(seed, 2 * k + 1);
    double x = lo + len * pos.uniform(0), y = lo + len * pos.uniform(1);
    x -= std::floor(x);
    y -= std::floor(y);
    for (std::size_t n = 0;; ++n) {
      if (circle_dist(x, y) <= e) {
        hit[k] = 1;
        return;
      }
      if (n == N) return;
      std::size_t f = fs.letter(letters.uniform(n));
      x = fs.apply(f, x);
      y = fs.apply(f, y);
    }
  });
  SyncReport r;
  r.pairs = pairs;
  for (char h : hit) r.synchronized += static_cast<std::size_t>(h);
  r.fraction = pairs ? static_cast<double>(r.synchronized) / static_cast<double>(pairs) : 1.0;
  return r;
}

// ---------------------------------------------------------------------------
// Neighbours and F-paths.

struct NeighborGraph {
  std::size_t d = 0;
  std::set<std::pair<std::size_t, std::size_t>> pairs;  // i < j, 0-based
  std::vector<std::set<std::size_t>> neighbors;
  /// Cyclic sequence of plateau owners in counterclockwise order.
  std::vector<std::size_t> plateau_sequence;
  std::vector<CheckResult> checks;
  bool all_passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
};

inline NeighborGraph neighbor_analysis(const WeightProfile& p, double noise_sigma) {
  NeighborGraph g;
  g.d = p.d;
  g.neighbors.assign(p.d, {});
  for (std::size_t k = 0; k < p.grid.size(); ++k) {
    const auto& e = p.estimates[k];
    std::vector<std::size_t> pos;
    for (std::size_t i = 0; i < p.d; ++i)
      if (e.values[i] > noise_sigma * e.stderr_[i]) pos.push_back(i);
    for (std::size_t a = 0; a < pos.size(); ++a)
      for (std::size_t b = a + 1; b < pos.size(); ++b) {
        g.pairs.insert({pos[a], pos[b]});
        g.neighbors[pos[a]].insert(pos[b]);
        g.neighbors[pos[b]].insert(pos[a]);
      }
  }
  auto lab = plateau_labels(p, p.config.delta_one);
  for (int l : lab) {
    if (l < 0) continue;
    auto li = static_cast<std::size_t>(l);
    if (g.plateau_sequence.empty() || g.plateau_sequence.back() != li) g.plateau_sequence.push_back(li);
  }
  while (g.plateau_sequence.size() > 1 && g.plateau_sequence.front() == g.plateau_sequence.back())
    g.plateau_sequence.pop_back();

  const auto& seq = g.plateau_sequence;
  const std::size_t L = seq.size();
  if (p.d >= 2) {
    CheckResult deg{"neighbor_degree", true, "1 <= #V_i <= 2 for every i", {}};
    std::size_t ones = 0;
    for (std::size_t i = 0; i < p.d; ++i) {
      std::size_t v = g.neighbors[i].size();
      if (v < 1 || v > 2) {
        deg.passed = false;
        deg.witnesses.push_back("#V_" + std::to_string(i + 1) + " = " + std::to_string(v));
      }
      ones += v == 1;
    }
    g.checks.push_back(deg);
    g.checks.push_back({"leaf_count", ones <= 2, "#{i : #V_i = 1} = " + std::to_string(ones), {}});

    // Consecutive plateaus must be neighbours.
    CheckResult adj{"path_neighbors", true, "consecutive plateau owners are neighbours", {}};
    for (std::size_t k = 0; k < L && L > 1; ++k) {
      std::size_t a = seq[k], b = seq[(k + 1) % L];
      if (!g.pairs.count({std::min(a, b), std::max(a, b)})) {
        adj.passed = false;
        adj.witnesses.push_back("[" + std::to_string(a + 1) + "," + std::to_string(b + 1) + "]");
      }
    }
    g.checks.push_back(adj);

    // No three distinct i, j, k each the centre of a path [a, i, a].
    std::set<std::size_t> centres;
    for (std::size_t k = 0; k < L && L > 1; ++k)
      if (seq[(k + L - 1) % L] == seq[(k + 1) % L]) centres.insert(seq[k]);
    g.checks.push_back({"three_triples_excluded", centres.size() <= 2,
                        std::to_string(centres.size()) + " indices are centres of [a,i,a] paths", {}});

    std::set<std::size_t> seen(seq.begin(), seq.end());
    g.checks.push_back({"paths_cover_indices", seen.size() == p.d,
                        "the plateau cycle visits " + std::to_string(seen.size()) + " of " + std::to_string(p.d) +
                            " indices",
                        {}});
  }
  return g;
}

// ---------------------------------------------------------------------------
// Gap families and the inverse system.

/// Gaps between circularly consecutive arcs of different A-families.
/// Unordered families are keyed (min, max); ordered ones (from, to).
inline std::vector<IntervalFamily> c_families(const std::vector<IntervalFamily>& A, bool ordered) {
  std::vector<std::pair<Arc, std::size_t>> all;
  for (const auto& fam : A)
    for (const auto& a : fam.arcs)
      if (!a.is_full()) all.push_back({a, fam.owner});
  std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) { return x.first.lo() < y.first.lo(); });
  std::map<std::pair<std::size_t, std::size_t>, IntervalFamily> out;
  const std::size_t n = all.size();
  for (std::size_t k = 0; k < n && n > 1; ++k) {
    const auto& [a, i] = all[k];
    const auto& [b, j] = all[(k + 1) % n];
    if (i == j) continue;
    auto key = ordered ? std::make_pair(i, j) : std::make_pair(std::min(i, j), std::max(i, j));
    auto& fam = out[key];
    fam.kind = ordered ? FamilyKind::COrdered : FamilyKind::CUnordered;
    fam.owner = key.first;
    fam.owner2 = key.second;
    fam.arcs.push_back(Arc::closed(a.hi(), b.lo()));
  }
  std::vector<IntervalFamily> v;
  for (auto& [key, fam] : out) v.push_back(std::move(fam));
  return v;
}

/// image_arc(f^-1, .) maps the union of the C arcs into itself, for every f.
inline bool c_union_inverse_invariant(const SystemSpec& s, const std::vector<IntervalFamily>& C,
                                      std::vector<std::string>* witnesses = nullptr) {
  std::vector<Arc> all;
  for (const auto& fam : C) all.insert(all.end(), fam.arcs.begin(), fam.arcs.end());
  bool ok = true;
  for (const auto& f : s.maps()) {
    Homeo g = invert(f);
    for (const auto& a : all)
      if (!arc_in_union(image_arc(g, a), all)) {
        ok = false;
        if (witnesses) witnesses->push_back(a.str() + " under " + g.describe());
      }
  }
  return ok;
}

struct InverseComparison {
  std::size_t d_plus = 0;
  std::size_t d_minus = 0;
  std::vector<MinimalSetApprox> K_plus;
  std::vector<MinimalSetApprox> K_minus;
  std::vector<IntervalFamily> A;  // graph-based
  std::vector<IntervalFamily> C;
  std::vector<IntervalFamily> C_ordered;  // orientation-preserving systems only
  bool bound_ok = true;                   // |d+ - d-| <= 1
  bool equality_ok = true;                // d+ = d- when every map preserves orientation
  bool located_ok = true;                 // every C family holds an F^- minimal set
  bool c_invariant = true;
  bool verdict = true;
  std::vector<std::string> notes;
};

inline InverseComparison inverse_comparison(const SystemSpec& s, const GridApprox& g, unsigned workers = 1) {
  InverseComparison r;
  TransitionGraph tg = build_transition_graph(s, g, workers);
  r.K_plus = bottom_components(tg);
  r.K_minus = minimal_sets(invert_system(s), g, workers);
  r.d_plus = r.K_plus.size();
  r.d_minus = r.K_minus.size();
  r.A = graph_a_families(tg, r.K_plus);
  r.bound_ok = (r.d_plus > r.d_minus ? r.d_plus - r.d_minus : r.d_minus - r.d_plus) <= 1;
  if (s.all_preserving()) r.equality_ok = r.d_plus == r.d_minus;
  if (r.d_plus >= 2) {
    r.C = c_families(r.A, false);
    if (s.all_preserving()) r.C_ordered = c_families(r.A, true);
    // Each gap family must hold at least one F^- minimal set.
    auto holds_one = [&](const IntervalFamily& fam) {
      for (const auto& m : r.K_minus) {
        bool inside = true;
        for (const auto& a : m.arcs) inside = inside && arc_in_union(a, fam.arcs);
        if (inside) return true;
      }
      return false;
    };
    for (const auto* fams : {&r.C, &r.C_ordered})
      for (const auto& fam : *fams)
        if (!holds_one(fam)) {
          r.located_ok = false;
          r.notes.push_back(std::string("no F^- minimal set inside ") + to_string(fam.kind) + "_" +
                            std::to_string(fam.owner + 1) + "," + std::to_string(fam.owner2 + 1));
        }
    r.c_invariant = c_union_inverse_invariant(s, r.C, &r.notes);
  }
  if (!r.bound_ok) r.notes.push_back("|d+ - d-| > 1");
  if (!r.equality_ok) r.notes.push_back("orientation-preserving system with d+ != d-");
  r.verdict = r.bound_ok && r.equality_ok && r.located_ok && r.c_invariant;
  return r;
}

}  // namespace circlerds
