// Acceptance run: drives the CLI over the shipped fixtures, then prints one
// PASS/FAIL line per criterion. Exit status is 0 only if every line passes.

#include <sys/wait.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "circlerds/spec_io.hpp"
#include "circlerds/structure.hpp"
#include "circlerds/sweep.hpp"
#include "circlerds/transfer.hpp"
#include "test_util.hpp"

using namespace circlerds;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool passed = true;
  std::string detail;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json load_json(const fs::path& p) { return Json::parse(slurp(p)); }

class Runner {
 public:
  Runner(std::string cli, fs::path work) : cli_(std::move(cli)), work_(std::move(work)) {}

  /// Runs the CLI; returns exit code and wall seconds.
  std::pair<int, double> run(const std::string& args, const std::string& log) const {
    auto t0 = std::chrono::steady_clock::now();
    std::string cmd = "'" + cli_ + "' " + args + " >'" + (work_ / log).string() + "' 2>&1";
    int status = std::system(cmd.c_str());
    double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, sec};
  }

  const fs::path& work() const { return work_; }

 private:
  std::string cli_;
  fs::path work_;
};

Arc arc_from(const Json& j) {
  CirclePoint lo(parse_rational(j[0].get<std::string>())), hi(parse_rational(j[1].get<std::string>()));
  return lo == hi ? Arc::full_circle() : Arc::closed(lo, hi);
}

std::vector<Arc> arcs_from(const Json& j) {
  std::vector<Arc> out;
  for (const auto& a : j) out.push_back(arc_from(a));
  return out;
}

struct ProfileRow {
  double x = 0;
  std::vector<double> u, se;
  double unclassified = 0;
};

std::vector<ProfileRow> read_profile(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  std::size_t cols = static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
  const std::size_t d = (cols - 1) / 2;
  std::vector<ProfileRow> rows;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
    ProfileRow r;
    r.x = v[0];
    r.u.assign(v.begin() + 1, v.begin() + 1 + static_cast<long>(d));
    r.se.assign(v.begin() + 1 + static_cast<long>(d), v.begin() + 1 + static_cast<long>(2 * d));
    r.unclassified = v.back();
    rows.push_back(std::move(r));
  }
  return rows;
}

bool check_named(const Json& checks, const std::string& name) {
  for (const auto& c : checks)
    if (c["name"] == name) return c["passed"].get<bool>();
  return false;
}

void fail(Outcome& o, const std::string& why) {
  o.passed = false;
  if (!o.detail.empty()) o.detail += "; ";
  o.detail += why;
}

// ---------------------------------------------------------------------------

Outcome criterion1(const Json& rep, double seconds) {
  Outcome o;
  const Json& m = rep["minimal"];
  if (m["resolution"] != 4096 || m["d"] != 2) fail(o, "d+ at 4096 is " + m["d"].dump());
  if (m["refinement"]["target"] != 16384 || m["refinement"]["d"] != 2 || !m["stable"].get<bool>())
    fail(o, "refinement to 16384 not stable");
  if (rep["inverse"]["d_plus"] != 2 || rep["inverse"]["d_minus"] != 1) fail(o, "d+/d- differ from 2/1");
  const std::vector<Arc> trap1{Arc::closed(CirclePoint(3, 4), CirclePoint(1, 8))};
  const std::vector<Arc> trap2{Arc::closed(CirclePoint(1, 4), CirclePoint(5, 8))};
  int in1 = 0, in2 = 0;
  for (const auto& k : m["minimal_sets"]) {
    bool a = true, b = true;
    for (const auto& arc : arcs_from(k["arcs"])) {
      a = a && arc_in_union(arc, trap1);
      b = b && arc_in_union(arc, trap2);
    }
    in1 += a;
    in2 += b;
  }
  if (in1 != 1 || in2 != 1) fail(o, "minimal sets not one per trapping region");
  const std::vector<Arc> inv_region{Arc::closed(CirclePoint(1, 2), CirclePoint(7, 8)),
                                    Arc::closed(CirclePoint(0, 1), CirclePoint(3, 8))};
  for (const auto& k : rep["inverse"]["K_minus"])
    for (const auto& arc : arcs_from(k))
      if (!arc_in_union(arc, inv_region)) fail(o, "K- arc " + arc.str() + " outside [1/2,7/8]u[0,3/8]");
  if (seconds > 300) fail(o, "runtime " + std::to_string(seconds) + " s");
  if (o.passed) o.detail = "d+=2 d-=1 stable at 2^14, containments exact, " + std::to_string(static_cast<int>(seconds)) + " s single-threaded";
  return o;
}

Outcome criterion2(const std::map<std::string, fs::path>& dirs, const std::map<std::string, Json>& reps) {
  Outcome o;
  std::size_t probes = 0;
  for (const auto& [name, dir] : dirs) {
    if (reps.at(name)["minimal"]["d"].get<int>() < 2) continue;
    for (const auto& r : read_profile(dir / "profile.csv")) {
      ++probes;
      int positive = 0;
      for (std::size_t i = 0; i < r.u.size(); ++i) positive += r.u[i] > 4 * r.se[i];
      if (positive > 2) fail(o, name + " x=" + std::to_string(r.x) + " has " + std::to_string(positive) + " positive weights");
      if (r.unclassified > 0.01) fail(o, name + " x=" + std::to_string(r.x) + " unclassified " + std::to_string(r.unclassified));
    }
  }
  if (o.passed) o.detail = std::to_string(probes) + " probes on fixtures with d>=2, none violating";
  return o;
}

Outcome criterion3(const std::map<std::string, Json>& reps) {
  Outcome o;
  std::string fr;
  for (const auto& [name, rep] : reps) {
    double f = rep["weights"]["invariance_pass_fraction"].get<double>();
    if (rep["config"]["invariance_probes"] != 100) fail(o, name + " used " + rep["config"]["invariance_probes"].dump() + " probes");
    if (f < 0.95) fail(o, name + " pass fraction " + std::to_string(f));
    fr += " " + name + "=" + std::to_string(f).substr(0, 5);
  }
  if (o.passed) o.detail = "pass fractions at 100 probes:" + fr;
  return o;
}

Outcome criterion4(const std::map<std::string, Json>& reps) {
  Outcome o;
  std::size_t zones = 0;
  for (const auto& [name, rep] : reps) {
    zones += rep["weights"]["zones"].size();
    if (!check_named(rep["weights"]["checks"], "monotone_transitions")) fail(o, name + " has a hard violation");
  }
  if (o.passed) o.detail = std::to_string(zones) + " transition zones, no hard violations";
  return o;
}

Outcome criterion5(const std::map<std::string, fs::path>& dirs, const std::map<std::string, Json>& reps) {
  Outcome o;
  double headroom = 1e300;
  for (const auto& [name, dir] : dirs) {
    auto rows = read_profile(dir / "profile.csv");
    const double k = static_cast<double>(reps.at(name)["weights"]["zones"].size());
    for (std::size_t i = 0; i < rows.front().u.size(); ++i) {
      double tv = 0;
      for (std::size_t p = 0; p < rows.size(); ++p) tv += std::fabs(rows[(p + 1) % rows.size()].u[i] - rows[p].u[i]);
      headroom = std::min(headroom, 2 * k + 0.1 - tv);
      if (tv > 2 * k + 0.1) fail(o, name + " u_" + std::to_string(i + 1) + " TV " + std::to_string(tv) + " > 2k+0.1");
    }
  }
  if (o.passed) o.detail = "smallest headroom 2k+0.1-TV = " + std::to_string(headroom);
  return o;
}

Outcome criterion6(const Runner& r, unsigned workers) {
  Outcome o;
  double total = 0;
  std::string summary;
  for (const std::string family : {"mixed", "preserving"}) {
    const fs::path dir = r.work() / ("sweep_" + family);
    auto [code, sec] = r.run("--seed 1 --workers " + std::to_string(workers) + " --out '" + dir.string() +
                                 "' sweep --count 50 --family " + family,
                             "sweep_" + family + ".log");
    total += sec;
    if (!fs::exists(dir / "sweep.json")) {
      fail(o, family + " sweep produced no report (exit " + std::to_string(code) + ")");
      continue;
    }
    Json rep = load_json(dir / "sweep.json");
    std::size_t violations = 0, n = 0, multi = 0;
    for (const auto& s : rep["systems"]) {
      ++n;
      long dp = s["d_plus"].get<long>(), dm = s["d_minus"].get<long>();
      multi += dp >= 2 || dm >= 2;
      bool bad = family == "mixed" ? std::labs(dp - dm) > 1 : dp != dm;
      if (bad) {
        ++violations;
        fail(o, family + " " + s["label"].get<std::string>() + " d+=" + std::to_string(dp) + " d-=" + std::to_string(dm));
      }
    }
    if (n != 50) fail(o, family + " sweep has " + std::to_string(n) + " systems");
    summary += family + ": " + std::to_string(violations) + "/" + std::to_string(n) + " violations (" +
               std::to_string(multi) + " with d>=2); ";
  }
  if (total > 1800) fail(o, "runtime " + std::to_string(total) + " s");
  if (o.passed) o.detail = summary + std::to_string(static_cast<int>(total)) + " s";
  return o;
}

Outcome criterion7(const std::map<std::string, Json>& reps) {
  Outcome o;
  std::size_t arcs = 0;
  double lowest = 1;
  for (const std::string name : {"example71", "split_case"}) {
    const Json& rep = reps.at(name);
    const Json& c = rep["config"];
    if (c["sync_N"] != 2000 || c["sync_pairs"] != 200 || c["sync_eps"] != "1/1024") fail(o, name + " sync parameters differ");
    for (const auto& s : rep["structure"]["synchronization"]) {
      ++arcs;
      double f = s["fraction"].get<double>();
      lowest = std::min(lowest, f);
      if (s["pairs"] != 200 || f < 0.99) fail(o, name + " arc " + s["arc"].dump() + " fraction " + std::to_string(f));
    }
  }
  if (arcs == 0) fail(o, "no B arcs tested");
  if (o.passed) o.detail = std::to_string(arcs) + " B arcs, lowest fraction " + std::to_string(lowest);
  return o;
}

Outcome criterion8(const Json& rep) {
  Outcome o;
  std::size_t split_words = 0, total = 0;
  std::vector<std::string> split_intervals;
  for (const auto& h : rep["structure"]["hats"])
    if (h["case"] == "split") split_intervals.push_back(h["interval"].dump());
  for (const auto& r : rep["structure"]["routing"]) {
    total += r["words"].get<std::size_t>();
    if (r["exceptions"] != 0) fail(o, "interval " + r["interval"].dump() + " has " + r["exceptions"].dump() + " exceptions");
    if (std::find(split_intervals.begin(), split_intervals.end(), r["interval"].dump()) != split_intervals.end())
      split_words += r["words"].get<std::size_t>();
  }
  if (split_intervals.empty()) fail(o, "no split interval in split_case");
  if (split_words < 10000) fail(o, "only " + std::to_string(split_words) + " words on split intervals");
  if (o.passed) o.detail = std::to_string(total) + " words routed (" + std::to_string(split_words) + " on split intervals), 0 exceptions";
  return o;
}

Outcome criterion9(const Json& rep, const fs::path& dir) {
  Outcome o;
  auto rows = read_profile(dir / "profile.csv");
  const double res = rep["transfer"]["resolution"].get<double>();
  double boundary = 0;
  for (const auto& m : rep["transfer"]["measures"]) boundary += m["boundary_cells"].get<double>();
  const double allowance = 2.0 * boundary / res;
  const Json& cc = rep["transfer"]["crosscheck"];
  if (cc.size() != 20) fail(o, std::to_string(cc.size()) + " cross-check probes, expected 20");
  double worst = 0;
  for (const auto& e : cc) {
    double x = parse_rational(e["x"].get<std::string>()).get_d();
    auto it = std::min_element(rows.begin(), rows.end(), [&](const auto& a, const auto& b) {
      return std::fabs(a.x - x) < std::fabs(b.x - x);
    });
    if (std::fabs(it->x - x) > 1e-9) {
      fail(o, "probe " + e["x"].get<std::string>() + " missing from profile");
      continue;
    }
    for (std::size_t i = 0; i < e["coords"].size(); ++i) {
      double t = e["coords"][i]["t"].get<double>();
      double tol = 4 * it->se[i] + allowance;
      worst = std::max(worst, std::fabs(t - it->u[i]) / tol);
      if (std::fabs(t - it->u[i]) > tol)
        fail(o, "x=" + e["x"].get<std::string>() + " coord " + std::to_string(i + 1) + " |t-u|=" + std::to_string(std::fabs(t - it->u[i])));
    }
  }
  if (o.passed) o.detail = "20 zone probes, largest |t-u|/tol = " + std::to_string(worst);
  return o;
}

Outcome criterion10(const Json& rep, const fs::path& dir) {
  Outcome o;
  if (rep["minimal"]["d"] != 1) fail(o, "d = " + rep["minimal"]["d"].dump());
  if (rep["transfer"]["N"] != 4000) fail(o, "Cesaro N = " + rep["transfer"]["N"].dump());
  std::ifstream in(dir / "measures" / "mu_1.csv");
  GridMeasure mu = read_measure_csv(in);
  double dist = sup_cdf_distance(mu, GridMeasure::uniform(mu.resolution));
  if (dist > 1e-2) fail(o, "sup-CDF distance to uniform " + std::to_string(dist));
  std::size_t probes = 0;
  for (const auto& r : read_profile(dir / "profile.csv")) {
    ++probes;
    if (r.u.size() != 1 || r.u[0] != 1.0) fail(o, "u_1(" + std::to_string(r.x) + ") != 1");
  }
  if (o.passed) o.detail = "d=1, sup-CDF " + std::to_string(dist) + ", u_1 = 1 at " + std::to_string(probes) + " probes";
  return o;
}

/// Exact property suites over at least 1000 random instances each.
Outcome criterion11(const std::map<std::string, Json>& reps) {
  Outcome o;
  std::mt19937_64 rng(20261016);

  std::size_t homeo_cases = 0;
  for (; homeo_cases < 1000; ++homeo_cases) {
    Homeo f = testutil::random_homeo(rng), g = testutil::random_homeo(rng);
    Homeo fi = invert(f), gf = compose(g, f);
    bool ok = invert(fi) == f && gf.preserves_orientation() == (f.preserves_orientation() == g.preserves_orientation());
    for (int k = 0; k < 4 && ok; ++k) {
      CirclePoint x = testutil::random_point(rng);
      ok = fi.eval(f.eval(x)) == x && f.eval(fi.eval(x)) == x && gf.eval(x) == g.eval(f.eval(x));
    }
    if (!ok) {
      fail(o, "homeo round trip fails for " + f.describe() + " / " + g.describe());
      break;
    }
  }

  std::size_t order_cases = 0;
  for (; order_cases < 1000; ++order_cases) {
    // co3 is defined on pairwise distinct points only.
    std::vector<CirclePoint> pts;
    while (pts.size() < 4) {
      CirclePoint x = testutil::random_point(rng);
      if (std::find(pts.begin(), pts.end(), x) == pts.end()) pts.push_back(x);
    }
    const auto &a = pts[0], &b = pts[1], &c = pts[2], &d = pts[3];
    bool ok = co3(a, b, c) == co3(b, c, a) && co3(a, b, c) != co3(a, c, b);
    ok = ok && (!(co3(a, b, c) && co3(a, c, d)) || co3(a, b, d));
    ok = ok && ccw_offset(a, b) + ccw_offset(b, a) == 1;
    if (!ok) {
      fail(o, "order law fails at " + a.str() + " " + b.str() + " " + c.str() + " " + d.str());
      break;
    }
  }

  // Permutation property on every computed family: the fixture reports and
  // E / A families of random validation-passing systems.
  for (const auto& [name, rep] : reps)
    for (const auto& c : rep["checks"])
      if (c["name"].get<std::string>().rfind("permutation_", 0) == 0 && !c["passed"].get<bool>())
        fail(o, name + " " + c["name"].get<std::string>() + " fails");
  std::size_t perm_systems = 0, perm_families = 0, gap_systems = 0;
  for (std::uint64_t idx = 0; perm_systems < 1000 || gap_systems < 1000; ++idx) {
    SystemSpec s = random_system(idx % 2 ? SweepFamily::Mixed : SweepFamily::Preserving, 11, idx, 0, 32);
    if (!validate_no_finite_orbit(s).passed || !validate_no_finite_orbit(invert_system(s)).passed) continue;
    GridApprox g(256);
    TransitionGraph tg = build_transition_graph(s, g);
    auto K = bottom_components(tg);
    if (perm_systems < 1000) {
      ++perm_systems;
      auto A = graph_a_families(tg, K);
      for (std::size_t i = 0; i < K.size(); ++i)
        for (const auto& fam : {e_family(K, i), A[i]}) {
          ++perm_families;
          if (!check_permutation_property(s, fam).passed) fail(o, "permutation fails on " + s.label());
        }
    }
    if (K.size() >= 2 && gap_systems < 1000) {
      auto r = inverse_comparison(s, g);
      ++gap_systems;
      if (!r.c_invariant || !c_union_inverse_invariant(s, r.C)) fail(o, "C gap union not F^-1 invariant on " + s.label());
    }
    if (!o.passed) break;
  }
  if (o.passed)
    o.detail = std::to_string(homeo_cases) + " homeo pairs, " + std::to_string(order_cases) + " order quadruples, " +
               std::to_string(perm_families) + " families over " + std::to_string(perm_systems) + " systems, " +
               std::to_string(gap_systems) + " C-gap systems";
  return o;
}

Outcome criterion12(const fs::path& a, const fs::path& b) {
  Outcome o;
  std::string x = slurp(a / "report.json"), y = slurp(b / "report.json");
  if (x.empty()) fail(o, "missing report");
  if (x != y) fail(o, "report.json differs between worker counts");
  if (o.passed) o.detail = "report.json identical for --workers 1 and 4 (" + std::to_string(x.size()) + " bytes)";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance run"};
  std::string cli, fixtures_dir = CIRCLERDS_FIXTURE_DIR, work;
  app.add_option("--cli", cli, "path to circlerds_cli")->required()->check(CLI::ExistingFile);
  app.add_option("--fixtures", fixtures_dir, "fixture directory")->check(CLI::ExistingDirectory);
  app.add_option("--work", work, "scratch directory");
  CLI11_PARSE(app, argc, argv);

  const fs::path wd = work.empty() ? fs::temp_directory_path() / "circlerds_acceptance" : fs::path(work);
  fs::remove_all(wd);
  fs::create_directories(wd);
  Runner run(cli, wd);
  const unsigned hw = std::max(1u, std::min(8u, std::thread::hardware_concurrency()));
  const fs::path fx(fixtures_dir);

  std::map<std::string, fs::path> dirs;
  std::map<std::string, Json> reps;
  double ex71_seconds = 0;
  for (const std::string name : {"example71", "rotation", "op_pair", "split_case"}) {
    // example71 runs single-threaded for the runtime bound.
    const unsigned w = name == "example71" ? 1 : hw;
    const fs::path dir = wd / name;
    auto [code, sec] = run.run("--workers " + std::to_string(w) + " --out '" + dir.string() + "' analyze '" +
                                   (fx / (name + ".json")).string() + "'",
                               name + ".log");
    std::cerr << "analyze " << name << ": exit " << code << ", " << sec << " s\n";
    if (name == "example71") ex71_seconds = sec;
    if (fs::exists(dir / "report.json")) {
      dirs[name] = dir;
      reps[name] = load_json(dir / "report.json");
    }
  }
  const fs::path ex71_w4 = wd / "example71_w4";
  run.run("--workers 4 --out '" + ex71_w4.string() + "' analyze '" + (fx / "example71.json").string() + "'", "example71_w4.log");

  std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"example71 reproduction", [&] { return criterion1(reps.at("example71"), ex71_seconds); }},
      {"support bound", [&] { return criterion2(dirs, reps); }},
      {"P-invariance of weights", [&] { return criterion3(reps); }},
      {"monotone transitions", [&] { return criterion4(reps); }},
      {"bounded variation", [&] { return criterion5(dirs, reps); }},
      {"d+/d- sweep", [&] { return criterion6(run, hw); }},
      {"proximality", [&] { return criterion7(reps); }},
      {"routing", [&] { return criterion8(reps.at("split_case")); }},
      {"measure decomposition", [&] { return criterion9(reps.at("example71"), dirs.at("example71")); }},
      {"rotation fixture", [&] { return criterion10(reps.at("rotation"), dirs.at("rotation")); }},
      {"exact property suites", [&] { return criterion11(reps); }},
      {"determinism", [&] { return criterion12(wd / "example71", ex71_w4); }},
  };

  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.passed;
    std::cout << "criterion " << k + 1 << " " << (o.passed ? "PASS" : "FAIL") << " [" << criteria[k].first << "] "
              << o.detail << std::endl;
  }
  std::cout << (failed ? std::to_string(failed) + " criteria failed" : "all 12 criteria pass") << std::endl;
  return failed ? 1 : 0;
}
