// Command-line front end. Exit codes: 0 pass, 2 hypothesis fails (finite
// orbit), 3 input error, 4 a theorem check fails.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "circlerds/pipeline.hpp"
#include "circlerds/sweep.hpp"

using namespace circlerds;
namespace fs = std::filesystem;

namespace {

constexpr int kPass = 0;
constexpr int kHypothesisFail = 2;
constexpr int kInputError = 3;
constexpr int kCheckFail = 4;

struct GlobalFlags {
  std::optional<std::uint64_t> seed;
  std::optional<std::uint32_t> resolution;
  std::optional<unsigned> workers;
  std::optional<std::string> out;
  std::string config_path;
};

RunConfig effective_config(const GlobalFlags& g) {
  RunConfig c;
  if (!g.config_path.empty()) {
    std::ifstream in(g.config_path);
    if (!in) throw Error(ErrorCode::InvalidConfig, "cannot read config " + g.config_path);
    Json j;
    try {
      j = Json::parse(in);
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::InvalidConfig, std::string("malformed config: ") + e.what());
    }
    apply_config_json(c, j);
  }
  if (g.seed) c.seed = *g.seed;
  if (g.resolution) c.resolution = *g.resolution;
  if (g.workers) c.workers = *g.workers;
  if (g.out) c.out = *g.out;
  if (c.workers == 0) throw Error(ErrorCode::InvalidConfig, "workers must be >= 1");
  GridApprox check(c.resolution);
  (void)check;
  if (c.refine_target < c.resolution) c.refine_target = c.resolution;
  return c;
}

void print_checks(const Analysis& a) {
  for (const auto& c : a.checks)
    if (!c.passed) {
      std::cerr << "FAIL " << c.name;
      if (!c.detail.empty()) std::cerr << ": " << c.detail;
      std::cerr << "\n";
      for (const auto& w : c.witnesses) std::cerr << "  witness " << w << "\n";
    }
}

int cmd_validate(const std::string& path, const RunConfig& cfg) {
  SystemSpec s = load_system(path);
  ValidationReport v = validate_no_finite_orbit(s, cfg.max_period);
  std::cout << validation_json(v).dump(2) << "\n";
  if (!v.passed) {
    std::cerr << "finite orbit {";
    for (std::size_t k = 0; k < v.witness.size(); ++k) std::cerr << (k ? ", " : "") << v.witness[k].str();
    std::cerr << "}\n";
  }
  return v.passed ? kPass : kHypothesisFail;
}

/// Shared body of analyze and the single-stage commands.
int run_stages(const std::string& path, const RunConfig& cfg, unsigned stages, const std::string& report_name) {
  SystemSpec s = load_system(path);
  ValidationReport v = validate_no_finite_orbit(s, cfg.max_period);
  if (!v.passed) {
    std::cerr << "validation failed: " << v.note << "\n";
    std::cout << validation_json(v).dump(2) << "\n";
    return kHypothesisFail;
  }
  Analysis a = analyze(s, cfg, stages);
  fs::path dir(cfg.out);
  if (report_name == "report.json") {
    write_analysis(a, dir);
  } else {
    fs::create_directories(dir);
    write_text(dir / report_name, a.report.dump(2) + "\n");
    if (stages & kStageWeights) write_text(dir / "profile.csv", profile_csv(a.profile));
  }
  Json summary{{"label", s.label()}, {"d", a.report["minimal"]["d"]}, {"all_passed", a.all_passed()},
               {"report", (dir / report_name).string()}};
  if (a.report.contains("inverse")) {
    summary["d_plus"] = a.report["inverse"]["d_plus"];
    summary["d_minus"] = a.report["inverse"]["d_minus"];
  }
  std::cout << summary.dump(2) << "\n";
  print_checks(a);
  return a.all_passed() ? kPass : kCheckFail;
}

int cmd_sweep(std::size_t count, const std::string& family, const RunConfig& cfg) {
  SweepConfig sc;
  sc.count = count;
  if (family == "mixed")
    sc.family = SweepFamily::Mixed;
  else if (family == "preserving")
    sc.family = SweepFamily::Preserving;
  else
    throw Error(ErrorCode::InvalidConfig, "family must be mixed or preserving");
  sc.seed = cfg.seed;
  sc.resolution = cfg.resolution;
  sc.workers = cfg.workers;
  SweepResult r = run_sweep(sc);
  fs::path dir(cfg.out);
  fs::create_directories(dir);
  Json systems = Json::array();
  for (const auto& e : r.entries) {
    systems.push_back({{"label", e.system.label()},
                       {"d_plus", e.comparison.d_plus},
                       {"d_minus", e.comparison.d_minus},
                       {"preserving", e.system.all_preserving()},
                       {"violation", e.violation},
                       {"verdict", e.comparison.verdict},
                       {"notes", e.comparison.notes}});
    if (e.violation || !e.comparison.verdict) {
      fs::create_directories(dir / "violations");
      save_system(e.system, (dir / "violations" / (e.system.label() + ".json")).string());
    }
  }
  Json rep{{"count", count},
           {"family", family},
           {"seed", cfg.seed},
           {"resolution", cfg.resolution},
           {"rejected", r.rejected},
           {"violations", r.violations},
           {"other_failures", r.other_failures},
           {"systems", systems}};
  write_text(dir / "sweep.json", rep.dump(2) + "\n");
  std::cout << Json{{"count", count}, {"family", family}, {"violations", r.violations},
                    {"other_failures", r.other_failures}, {"rejected", r.rejected}}
                   .dump(2)
            << "\n";
  return r.violations == 0 && r.other_failures == 0 ? kPass : kCheckFail;
}

std::vector<SystemSpec> shipped_fixtures() {
  return {fixtures::example71(), fixtures::rotation(), fixtures::op_pair(), fixtures::split_case(),
          fixtures::single_reflection()};
}

int cmd_demo(const std::string& write_dir, const RunConfig& cfg) {
  if (!write_dir.empty()) {
    fs::create_directories(write_dir);
    for (const auto& s : shipped_fixtures()) save_system(s, (fs::path(write_dir) / (s.label() + ".json")).string());
    std::cout << "wrote fixtures to " << write_dir << "\n";
    return kPass;
  }
  // The worked example straight from the built-in definition.
  fs::path tmp = fs::path(cfg.out);
  fs::create_directories(tmp);
  const fs::path spec = tmp / "example71.json";
  save_system(fixtures::example71(), spec.string());
  return run_stages(spec.string(), cfg, kStageAll, "report.json");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random dynamics of circle homeomorphisms: minimal sets, weights, interval families"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalFlags g;
  app.add_option("--seed", g.seed, "master seed");
  app.add_option("--resolution", g.resolution, "grid resolution (power of two >= 64)");
  app.add_option("--workers", g.workers, "worker threads");
  app.add_option("--out", g.out, "output directory");
  app.add_option("--config", g.config_path, "RunConfig JSON file")->check(CLI::ExistingFile);

  std::string spec;
  auto with_spec = [&](const char* name, const char* help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("spec", spec, "system spec JSON")->required();
    return sub;
  };
  CLI::App* validate = with_spec("validate", "check the no-finite-orbit hypothesis");
  CLI::App* analyze_cmd = with_spec("analyze", "full pipeline: report.json, profile.csv, measures, plot data");
  CLI::App* minimal = with_spec("minimal", "grid minimal sets and refinement");
  CLI::App* weights = with_spec("weights", "weight profile and its theorem checks");
  CLI::App* structure = with_spec("structure", "interval families, hat points, neighbours");
  CLI::App* inverse = with_spec("inverse", "compare d+ with d- for the inverse system");
  CLI::App* transfer = with_spec("transfer", "stationary measures and the decomposition cross-check");
  CLI::App* sweep = app.add_subcommand("sweep", "random falsification sweep of the d+/d- comparison");
  std::size_t count = 50;
  std::string family = "mixed";
  sweep->add_option("--count", count, "number of systems")->check(CLI::PositiveNumber);
  sweep->add_option("--family", family, "mixed or preserving")->check(CLI::IsMember({"mixed", "preserving"}));
  CLI::App* demo = app.add_subcommand("demo", "analyze the built-in worked example, or write the fixtures");
  std::string write_dir;
  demo->add_option("--write-fixtures", write_dir, "write the shipped fixture specs into this directory and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputError;
  }

  try {
    RunConfig cfg = effective_config(g);
    if (*validate) return cmd_validate(spec, cfg);
    if (*analyze_cmd) return run_stages(spec, cfg, kStageAll, "report.json");
    if (*minimal) return run_stages(spec, cfg, 0, "minimal.json");
    if (*weights) return run_stages(spec, cfg, kStageWeights, "weights.json");
    if (*structure) return run_stages(spec, cfg, kStageWeights | kStageStructure, "structure.json");
    if (*inverse) return run_stages(spec, cfg, kStageInverse, "inverse.json");
    if (*transfer) return run_stages(spec, cfg, kStageWeights | kStageTransfer, "transfer.json");
    if (*sweep) return cmd_sweep(count, family, cfg);
    if (*demo) return cmd_demo(write_dir, cfg);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}
