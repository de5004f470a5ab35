#include "fictifem/adapt.hpp"
#include "fictifem/checks.hpp"
#include "fictifem/config.hpp"
#include "fictifem/presets.hpp"
#include "fictifem/vtk.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

using namespace fictifem;

namespace {

constexpr int exit_unknown_preset = 2;

struct RunArgs {
  std::string preset;
  std::string config;
  std::string output;
  int cycles = 0;
};

std::string valid_presets() {
  std::string s;
  for (const auto& n : preset_names()) s += (s.empty() ? "" : ", ") + n;
  return s;
}

bool known_preset(const std::string& name) {
  for (const auto& n : preset_names()) {
    if (n == name) return true;
  }
  return false;
}

LoopResult run_preset(const Preset& preset, const Config& cfg) {
  LoopOptions opt;
  opt.level1 = cfg.problem.level1.value_or(preset.level1);
  opt.level2 = cfg.problem.level2.value_or(preset.level2);
  opt.mode = cfg.problem.mode;
  opt.adapt = cfg.adapt;
  opt.solver = cfg.solver;
  opt.lambda_density = preset.lambda_density;
  if (cfg.output.vtk || cfg.output.matrix_market) std::filesystem::create_directories(cfg.output.directory);
  opt.on_cycle = [&](const CycleState& c) {
    const auto& r = c.record;
    std::cout << "cycle " << r.cycle << ": N=" << r.total_dofs() << " eta1=" << r.eta1 << " eta2=" << r.eta2;
    if (r.err_h1_u) std::cout << " |e|_1=" << *r.err_h1_u << " ||e2||_1=" << *r.err_h1_u2;
    std::cout << " (" << r.wall_time << " s)\n";
    if (cfg.output.vtk) {
      write_cycle_vtk(cfg.output.directory, c.cycle, {c.problem, c.disc, c.solve.solution}, c.eta1, c.eta2);
    }
    if (cfg.output.matrix_market) {
      export_matrix_market(c.system, cfg.output.directory + "/system_" + std::to_string(c.cycle));
    }
  };
  const std::string warning = validate_problem(preset.problem);
  if (!warning.empty()) std::cerr << "warning: " << warning << '\n';
  return adaptive_loop(preset.problem, opt);
}

int emit(const Preset& preset, const Config& cfg, const LoopResult& result) {
  std::filesystem::create_directories(cfg.output.directory);
  if (cfg.output.csv) {
    const std::string path = cfg.output.directory + "/" + preset.name + ".csv";
    write_csv(path, result.records);
    std::cout << "wrote " << path << '\n';
  }
  const std::string summary = format_summary(preset.name + " (" + preset.description + "), stop: " +
                                                 result.stop_reason, result.records);
  if (cfg.output.summary) {
    std::cout << summary;
    std::ofstream(cfg.output.directory + "/" + preset.name + "_summary.txt") << summary;
  }
  if (result.error) {
    std::cerr << "error: " << *result.error << '\n';
    return 1;
  }
  return 0;
}

int cmd_run(const RunArgs& a, bool study) {
  if (!known_preset(a.preset)) {
    std::cerr << "unknown preset '" << a.preset << "'; valid presets: " << valid_presets() << '\n';
    return exit_unknown_preset;
  }
  Config cfg = a.config.empty() ? Config{} : load_config(a.config);
  if (!a.output.empty()) cfg.output.directory = a.output;
  if (a.cycles > 0) cfg.adapt.max_cycles = a.cycles;
  const Preset preset = make_preset(a.preset, cfg.problem.element);
  const LoopResult result = run_preset(preset, cfg);
  int status = emit(preset, cfg, result);
  if (study && result.records.size() >= 4) {
    const auto& recs = result.records;
    const double eta_rate = eoc(recs, [](const StudyRecord& r) { return r.eta1 + r.eta2; });
    std::cout << "estimator rate " << eta_rate << '\n';
    if (recs.back().err_h1_u) {
      const double h1 = eoc(recs, [](const StudyRecord& r) { return *r.err_h1_u + *r.err_h1_u2; });
      const double l2 = eoc(recs, [](const StudyRecord& r) { return *r.err_l2_u; });
      std::cout << "H1 rate " << h1 << (h1 >= -1.25 && h1 <= -0.75 ? " [within -1.25..-0.75]" : " [outside -1.25..-0.75]")
                << "\nL2 rate " << l2 << (l2 >= -2.4 && l2 <= -1.6 ? " [within -2.4..-1.6]" : " [outside -2.4..-1.6]")
                << '\n';
    }
  }
  return status;
}

int cmd_check() {
  int failed = 0;
  for (const auto& r : run_checks()) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name;
    if (!r.passed) std::cout << ": " << r.detail;
    std::cout << '\n';
    failed += r.passed ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive fictitious-domain finite elements for elliptic interface problems"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "run one adaptive study");
  run->add_option("--preset", run_args.preset, "problem preset")->required();
  run->add_option("--config", run_args.config, "configuration file");
  run->add_option("--output", run_args.output, "output directory (overrides the config)");
  run->add_option("--cycles", run_args.cycles, "maximum adaptive cycles (overrides the config)");

  RunArgs study_args;
  auto* study = app.add_subcommand("study", "adaptive study with a rate table");
  study->add_option("--preset", study_args.preset, "problem preset")->required();
  study->add_option("--config", study_args.config, "configuration file");
  study->add_option("--output", study_args.output, "output directory");
  study->add_option("--cycles", study_args.cycles, "maximum adaptive cycles");

  auto* check = app.add_subcommand("check", "run the invariant suite");

  CLI11_PARSE(app, argc, argv);
  try {
    if (run->parsed()) return cmd_run(run_args, false);
    if (study->parsed()) return cmd_run(study_args, true);
    if (check->parsed()) return cmd_check();
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
