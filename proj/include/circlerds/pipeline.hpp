#pragma once

// End-to-end analysis of one system: minimal sets, weights, interval
// families, inverse comparison and the transfer cross-check, serialized as a
// JSON report plus CSV curves.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "circlerds/spec_io.hpp"
#include "circlerds/structure.hpp"
#include "circlerds/transfer.hpp"

namespace circlerds {

struct RunConfig {
  std::uint32_t resolution = 4096;
  std::uint32_t refine_target = 16384;
  std::size_t probe_count = 512;
  std::size_t samples = 4000;
  std::size_t orbit_length = 2000;
  std::size_t burn = 1000;
  Rational eps_cluster = make_rational(1, 1024);
  double delta_one = 0.02;
  double tol_sigma = 4.0;
  std::size_t invariance_probes = 100;
  std::size_t L_max = 12;
  std::size_t hat_budget = 1'000'000;
  std::size_t cesaro_N = 4000;
  std::size_t sync_pairs = 200;
  std::size_t sync_N = 2000;
  Rational sync_eps = make_rational(1, 1024);
  std::size_t crosscheck_probes = 20;
  int max_period = 6;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::string out = "out";

  WeightConfig weight_config() const {
    WeightConfig w;
    w.orbit_length = orbit_length;
    w.burn = burn;
    w.eps = eps_cluster;
    w.samples = samples;
    w.probe_count = probe_count;
    w.delta_one = delta_one;
    w.tol_sigma = tol_sigma;
    w.invariance_probes = invariance_probes;
    w.workers = workers;
    return w;
  }
};

/// Everything except workers and out, which must not change the results.
inline Json config_to_json(const RunConfig& c, bool with_runtime = false) {
  Json j{{"resolution", c.resolution},
         {"refine_target", c.refine_target},
         {"probe_count", c.probe_count},
         {"samples", c.samples},
         {"orbit_length", c.orbit_length},
         {"burn", c.burn},
         {"eps_cluster", to_string(c.eps_cluster)},
         {"delta_one", c.delta_one},
         {"tol_sigma", c.tol_sigma},
         {"invariance_probes", c.invariance_probes},
         {"L_max", c.L_max},
         {"hat_budget", c.hat_budget},
         {"cesaro_N", c.cesaro_N},
         {"sync_pairs", c.sync_pairs},
         {"sync_N", c.sync_N},
         {"sync_eps", to_string(c.sync_eps)},
         {"crosscheck_probes", c.crosscheck_probes},
         {"max_period", c.max_period},
         {"seed", c.seed}};
  if (with_runtime) {
    j["workers"] = c.workers;
    j["out"] = c.out;
  }
  return j;
}

/// Overlays the keys present in j onto c.
inline void apply_config_json(RunConfig& c, const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "config must be a JSON object");
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& k = it.key();
      const Json& v = it.value();
      if (k == "resolution") c.resolution = v.get<std::uint32_t>();
      else if (k == "refine_target") c.refine_target = v.get<std::uint32_t>();
      else if (k == "probe_count") c.probe_count = v.get<std::size_t>();
      else if (k == "samples") c.samples = v.get<std::size_t>();
      else if (k == "orbit_length") c.orbit_length = v.get<std::size_t>();
      else if (k == "burn") c.burn = v.get<std::size_t>();
      else if (k == "eps_cluster") c.eps_cluster = parse_rational(v.get<std::string>());
      else if (k == "delta_one") c.delta_one = v.get<double>();
      else if (k == "tol_sigma") c.tol_sigma = v.get<double>();
      else if (k == "invariance_probes") c.invariance_probes = v.get<std::size_t>();
      else if (k == "L_max") c.L_max = v.get<std::size_t>();
      else if (k == "hat_budget") c.hat_budget = v.get<std::size_t>();
      else if (k == "cesaro_N") c.cesaro_N = v.get<std::size_t>();
      else if (k == "sync_pairs") c.sync_pairs = v.get<std::size_t>();
      else if (k == "sync_N") c.sync_N = v.get<std::size_t>();
      else if (k == "sync_eps") c.sync_eps = parse_rational(v.get<std::string>());
      else if (k == "crosscheck_probes") c.crosscheck_probes = v.get<std::size_t>();
      else if (k == "max_period") c.max_period = v.get<int>();
      else if (k == "seed") c.seed = v.get<std::uint64_t>();
      else if (k == "workers") c.workers = v.get<unsigned>();
      else if (k == "out") c.out = v.get<std::string>();
      else throw Error(ErrorCode::InvalidConfig, "unknown config key '" + k + "'");
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("bad config value: ") + e.what());
  }
  if (c.delta_one <= 0.0 || c.delta_one > 0.1) throw Error(ErrorCode::InvalidConfig, "delta_one must lie in (0, 0.1]");
  if (c.workers == 0) throw Error(ErrorCode::InvalidConfig, "workers must be >= 1");
}

// ---------------------------------------------------------------------------
// JSON fragments.

inline Json arcs_json(const std::vector<Arc>& arcs) {
  Json a = Json::array();
  for (const auto& arc : arcs) a.push_back(Json::array({arc.lo().str(), arc.hi().str()}));
  return a;
}

inline Json minimal_json(const std::vector<MinimalSetApprox>& K, std::uint32_t resolution, bool stable) {
  Json sets = Json::array();
  for (const auto& m : K) sets.push_back({{"index", m.index}, {"arcs", arcs_json(m.arcs)}, {"cells", m.cells.size()}});
  return {{"d", K.size()}, {"minimal_sets", sets}, {"resolution", resolution}, {"stable", stable}};
}

inline Json family_json(const IntervalFamily& f) {
  Json j{{"kind", to_string(f.kind)}, {"owner", f.owner + 1}, {"arcs", arcs_json(f.arcs)}};
  if (f.kind == FamilyKind::CUnordered || f.kind == FamilyKind::COrdered) j["owner2"] = f.owner2 + 1;
  return j;
}

inline Json check_json(const CheckResult& c) {
  return {{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}, {"witnesses", c.witnesses}};
}

inline Json hat_json(const HatPoints& h) {
  return {{"interval", arcs_json({h.interval}).front()},
          {"a_hat", h.a_hat.str()},
          {"b_hat", h.b_hat.str()},
          {"a_snap", h.a_snap.str()},
          {"b_snap", h.b_snap.str()},
          {"case", to_string(h.hat_case)},
          {"word_length_bound", h.word_length_bound},
          {"nodes", h.nodes},
          {"candidates", h.candidates},
          {"reversing_candidates", h.reversing_candidates},
          {"bounds_only", h.lower_bound}};
}

inline Json validation_json(const ValidationReport& v) {
  Json w = Json::array();
  for (const auto& p : v.witness) w.push_back(p.str());
  return {{"passed", v.passed}, {"max_period", v.max_period}, {"witness", w},
          {"exhaustive", v.exhaustive}, {"nodes", v.nodes}, {"note", v.note}, {"flags", v.flags}};
}

inline Json inverse_json(const InverseComparison& r) {
  Json C = Json::array(), Co = Json::array(), A = Json::array();
  for (const auto& f : r.C) C.push_back(family_json(f));
  for (const auto& f : r.C_ordered) Co.push_back(family_json(f));
  for (const auto& f : r.A) A.push_back(family_json(f));
  Json kp = Json::array(), km = Json::array();
  for (const auto& m : r.K_plus) kp.push_back(arcs_json(m.arcs));
  for (const auto& m : r.K_minus) km.push_back(arcs_json(m.arcs));
  return {{"d_plus", r.d_plus},       {"d_minus", r.d_minus},       {"K_plus", kp},
          {"K_minus", km},            {"A_graph", A},               {"C", C},
          {"C_ordered", Co},          {"bound_ok", r.bound_ok},     {"equality_ok", r.equality_ok},
          {"located_ok", r.located_ok}, {"c_inverse_invariant", r.c_invariant}, {"verdict", r.verdict},
          {"notes", r.notes}};
}

// ---------------------------------------------------------------------------
// The analysis.

struct Analysis {
  Json report;
  WeightProfile profile;
  std::vector<GridMeasure> measures;
  std::vector<CheckResult> checks;
  bool all_passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
};

/// Up to `count` transition probes spread evenly over all zones.
inline std::vector<std::size_t> crosscheck_probes(const std::vector<TransitionZone>& zones, std::size_t count) {
  std::vector<std::size_t> all;
  for (const auto& z : zones) all.insert(all.end(), z.probes.begin(), z.probes.end());
  if (all.size() <= count) return all;
  std::vector<std::size_t> pick;
  for (std::size_t k = 0; k < count; ++k) pick.push_back(all[k * all.size() / count]);
  return pick;
}

/// Minimal sets always run; `stages` selects the rest (structure needs
/// weights). Validation is recorded, and the caller decides what a failure
/// means.
enum AnalysisStage : unsigned {
  kStageWeights = 1,
  kStageStructure = 2,
  kStageInverse = 4,
  kStageTransfer = 8,
  kStageAll = 15,
};

inline Analysis analyze(const SystemSpec& s, const RunConfig& cfg, unsigned stages = kStageAll) {
  Analysis out;
  Json& rep = out.report;
  auto add = [&](CheckResult c) { out.checks.push_back(std::move(c)); };
  rep["system"] = system_to_json(s);
  rep["config"] = config_to_json(cfg);
  rep["validation"] = validation_json(validate_no_finite_orbit(s, cfg.max_period));

  // Minimal sets and refinement.
  GridApprox grid(cfg.resolution);
  TransitionGraph tg = build_transition_graph(s, grid, cfg.workers);
  std::vector<MinimalSetApprox> K = bottom_components(tg);
  RefineResult ref = refine(s, K, cfg.refine_target, cfg.workers);
  rep["minimal"] = minimal_json(K, cfg.resolution, ref.stable);
  rep["minimal"]["refinement"] = {{"target", cfg.refine_target}, {"d", ref.sets.size()}, {"nested", ref.nested},
                                  {"unstable_count", ref.unstable_count}, {"note", ref.note}};
  add({"refinement_stable", ref.stable, ref.note, {}});
  const std::size_t d = K.size();

  // Weights.
  std::vector<TransitionZone> zones;
  std::vector<IntervalFamily> A;
  if (stages & kStageWeights) {
    WeightConfig wc = cfg.weight_config();
    out.profile = weight_profile(s, K, wc, cfg.seed);
    {
      auto graph_A = graph_a_families(tg, K);
      for (std::size_t i = 0; i < d; ++i) {
        try {
          A.push_back(level_one_family(out.profile, i, cfg.delta_one, tg, K));
        } catch (const Error& e) {
          if (e.code() != ErrorCode::MissingMinimalSet) throw;
          add({"level_one_family_" + std::to_string(i + 1), false, e.what(), {}});
          A.push_back(graph_A[i]);
        }
      }
    }
    std::vector<std::vector<Arc>> a_arcs;
    for (const auto& f : A) a_arcs.push_back(f.arcs);
    TheoremReport wr = verify_weight_theorems(out.profile, s, K, a_arcs, cfg.seed);
    zones = transition_zones(out.profile, cfg.delta_one);
    Json zj = Json::array();
    for (const auto& z : zones)
      zj.push_back({{"from", z.from + 1},
                    {"to", z.to + 1},
                    {"probes", z.probes.size()},
                    {"first", out.profile.grid[z.probes.front()].str()},
                    {"last", out.profile.grid[z.probes.back()].str()}});
    Json wchecks = Json::array();
    for (const auto& c : wr.checks) {
      wchecks.push_back(check_json(c));
      add(c);
    }
    rep["weights"] = {{"probes", out.profile.grid.size()},
                      {"zones", zj},
                      {"invariance_pass_fraction", wr.invariance_pass_fraction},
                      {"total_variation", wr.total_variation},
                      {"checks", wchecks}};

  }

  // Interval families.
  if ((stages & kStageStructure) && (stages & kStageWeights)) {
    Json st;
    Json fams = Json::array(), hats = Json::array(), sync = Json::array(), routing = Json::array();
    Json schecks = Json::array();
    auto add_struct = [&](CheckResult c) {
      schecks.push_back(check_json(c));
      add(std::move(c));
    };
    add_struct(check_gap_property(out.profile, A, cfg.delta_one));
    for (std::size_t i = 0; i < d; ++i) {
      const std::string tag = "_" + std::to_string(i + 1);
      IntervalFamily E = e_family(K, i);
      ProximalDecomposition B = proximal_decomposition(s, A[i], K[i], cfg.L_max, cfg.hat_budget);
      for (const auto* f : {&E, &A[i], &B.family}) {
        fams.push_back(family_json(*f));
        PermutationReport pr = check_permutation_property(s, *f);
        add_struct({std::string("permutation_") + to_string(f->kind) + tag, pr.passed, "", pr.witnesses});
      }
      add_struct({"proximal_cardinality" + tag, B.cardinality_ok, B.note, {}});
      add_struct({"proximal_containment" + tag, B.containment_ok, "", {}});
      for (const auto& h : B.hats) {
        hats.push_back(hat_json(h));
        hats.back()["owner"] = i + 1;
        RoutingReport rr = check_routing(s, h, A[i].arcs, cfg.hat_budget);
        routing.push_back({{"owner", i + 1}, {"interval", arcs_json({h.interval}).front()}, {"words", rr.words},
                           {"exceptions", rr.exceptions}});
        add_struct({"routing" + tag, rr.exceptions == 0,
                    std::to_string(rr.words) + " words, " + std::to_string(rr.exceptions) + " exceptions", rr.witnesses});
      }
      for (const auto& b : B.family.arcs) {
        SyncReport sr = synchronization_test(s, b, cfg.sync_pairs, cfg.sync_N, cfg.sync_eps, cfg.seed, cfg.workers);
        // On the whole circle an isometric factor is possible, so the rate is
        // only reported.
        const bool applies = !b.is_full();
        sync.push_back({{"owner", i + 1}, {"arc", arcs_json({b}).front()}, {"pairs", sr.pairs},
                        {"synchronized", sr.synchronized}, {"fraction", sr.fraction}, {"checked", applies}});
        if (applies)
          add_struct({"synchronization" + tag, sr.fraction >= 0.99, b.str() + " fraction " + std::to_string(sr.fraction), {}});
      }
    }
    NeighborGraph ng = neighbor_analysis(out.profile, cfg.tol_sigma);
    Json pairs = Json::array();
    for (const auto& [a, b] : ng.pairs) pairs.push_back(Json::array({a + 1, b + 1}));
    Json seq = Json::array();
    for (auto v : ng.plateau_sequence) seq.push_back(v + 1);
    for (const auto& c : ng.checks) add_struct(c);
    st["families"] = fams;
    st["hats"] = hats;
    st["routing"] = routing;
    st["synchronization"] = sync;
    st["neighbors"] = {{"pairs", pairs}, {"plateau_sequence", seq}};
    st["checks"] = schecks;
    rep["structure"] = st;

  }

  // Inverse system.
  if (stages & kStageInverse) {
    InverseComparison ic = inverse_comparison(s, grid, cfg.workers);
    rep["inverse"] = inverse_json(ic);
    add({"inverse_comparison", ic.verdict, "d+ = " + std::to_string(ic.d_plus) + ", d- = " + std::to_string(ic.d_minus),
         ic.notes});
  }

  // Transfer operator and the decomposition cross-check.
  if (stages & kStageTransfer) {
    Json tr{{"resolution", cfg.resolution}, {"N", cfg.cesaro_N}};
    TransferOperator op(s, cfg.resolution, cfg.workers);
    try {
      out.measures = stationary_measures(op, K, cfg.cesaro_N);
      add({"transfer_support", true, "", {}});
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SupportLeak) throw;
      add({"transfer_support", false, e.what(), {}});
    }
    if (!out.measures.empty()) {
      Json mj = Json::array();
      bool stationary = true;
      std::size_t boundary = 0;
      for (std::size_t i = 0; i < out.measures.size(); ++i) {
        const auto& mu = out.measures[i];
        double dist = sup_cdf_distance(op.push(mu), mu);
        stationary = stationary && dist <= 1e-2;
        std::size_t b = boundary_cell_count(mu);
        boundary += b;
        mj.push_back({{"index", i + 1}, {"support_cells", support_cells(mu).size()}, {"boundary_cells", b},
                      {"mass_in_K", mass_in_arcs(mu, K[i].arcs)}, {"push_sup_cdf", dist}, {"drift", mu.drift}});
      }
      tr["measures"] = mj;
      add({"transfer_stationarity", stationary, "sup-CDF distance of push(mu_i) to mu_i <= 0.01", {}});
      const double allowance_disc = 2.0 * static_cast<double>(boundary) / cfg.resolution;
      Json cj = Json::array();
      bool cross_ok = true;
      std::vector<std::string> bad;
      // Needs the profile for the transition probes.
      if (stages & kStageWeights) try {
        for (std::size_t k : crosscheck_probes(zones, cfg.crosscheck_probes)) {
          const WeightEstimate& e = out.profile.estimates[k];
          Decomposition dec = decompose(op.cesaro(e.point, cfg.cesaro_N), out.measures);
          bool ok = true;
          Json coords = Json::array();
          for (std::size_t i = 0; i < d; ++i) {
            double tol = cfg.tol_sigma * e.stderr_[i] + allowance_disc;
            double diff = std::abs(dec.t[i] - e.values[i]);
            ok = ok && diff <= tol;
            coords.push_back({{"t", dec.t[i]}, {"u", e.values[i]}, {"tol", tol}});
          }
          if (!ok) bad.push_back(e.point.str());
          cross_ok = cross_ok && ok;
          cj.push_back({{"x", e.point.str()}, {"coords", coords}, {"residual", dec.residual}, {"passed", ok}});
        }
        add({"decomposition_crosscheck", cross_ok, std::to_string(cj.size()) + " transition probes", bad});
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NondisjointSupports) throw;
        add({"decomposition_crosscheck", false, e.what(), {}});
      }
      tr["crosscheck"] = cj;
    }
    rep["transfer"] = tr;

  }

  Json summary = Json::array();
  for (const auto& c : out.checks) summary.push_back({{"name", c.name}, {"passed", c.passed}});
  rep["checks"] = summary;
  rep["all_passed"] = out.all_passed();
  return out;
}

// ---------------------------------------------------------------------------
// Files.

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error(ErrorCode::ParseError, "cannot write " + p.string());
  f << text;
}

inline std::string profile_csv(const WeightProfile& p) {
  std::string s = "probe_point";
  for (std::size_t i = 1; i <= p.d; ++i) s += ",u_" + std::to_string(i);
  for (std::size_t i = 1; i <= p.d; ++i) s += ",stderr_" + std::to_string(i);
  s += ",unclassified\n";
  char buf[64];
  for (const auto& e : p.estimates) {
    std::snprintf(buf, sizeof buf, "%.12f", e.point.to_double());
    s += buf;
    for (double v : e.values) {
      std::snprintf(buf, sizeof buf, ",%.17g", v);
      s += buf;
    }
    for (double v : e.stderr_) {
      std::snprintf(buf, sizeof buf, ",%.17g", v);
      s += buf;
    }
    std::snprintf(buf, sizeof buf, ",%.17g\n", e.unclassified);
    s += buf;
  }
  return s;
}

inline std::string cdf_csv(const GridMeasure& m) {
  std::string s = "x,cdf\n";
  char buf[64];
  double acc = 0.0;
  for (std::uint32_t c = 0; c < m.resolution; ++c) {
    acc += m.mass[c];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", static_cast<double>(c + 1) / m.resolution, acc);
    s += buf;
  }
  return s;
}

inline void write_analysis(const Analysis& a, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "measures");
  fs::create_directories(dir / "plotdata");
  write_text(dir / "report.json", a.report.dump(2) + "\n");
  const std::string prof = profile_csv(a.profile);
  write_text(dir / "profile.csv", prof);
  write_text(dir / "plotdata" / "u_vs_x.csv", prof);
  for (std::size_t i = 0; i < a.measures.size(); ++i) {
    std::ostringstream m;
    write_measure_csv(a.measures[i], m);
    write_text(dir / "measures" / ("mu_" + std::to_string(i + 1) + ".csv"), m.str());
    write_text(dir / "plotdata" / ("cdf_mu_" + std::to_string(i + 1) + ".csv"), cdf_csv(a.measures[i]));
  }
}

}  // namespace circlerds
