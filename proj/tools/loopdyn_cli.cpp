// loopdyn: command-line harness for the benchmark scenarios.
//
//   loopdyn run <scenario.json>
//   loopdyn sweep precision|cfm <scenario.json> --values 1e-6 1e-3
//   loopdyn compare <scenario.json>
//   loopdyn analyze <scene.json>
//   loopdyn generate <name> [--convention world_frame|chained_frame]
//
// Common options: --out <dir> (default $LOOPDYN_OUT, else ./loopdyn_out),
// --seed <n>, --dt <s>, --mode pgs|direct.
// Exit status: 0 ok, 1 simulation failure, 2 assertion failure, 3 config error.

#include <loopdyn/loopdyn.hpp>

#include <CLI11.hpp>

#include <iomanip>
#include <iostream>
#include <optional>

namespace {

using namespace loopdyn;

struct Overrides {
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<double> dt;
  std::string mode;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--out", o.out, "Output directory (default: $LOOPDYN_OUT or ./loopdyn_out)");
  cmd->add_option("--seed", o.seed, "Perturbation seed");
  cmd->add_option("--dt", o.dt, "Time step, s")->check(CLI::PositiveNumber);
  cmd->add_option("--mode", o.mode, "Solver mode")->check(CLI::IsMember({"pgs", "direct"}));
}

Scenario load_with_overrides(const std::string& file, const Overrides& o) {
  Scenario s = load_scenario_file(file);
  if (o.seed) s.seed = *o.seed;
  if (o.dt) s.config.dt = *o.dt;
  if (!o.mode.empty()) s.config.mode = o.mode == "pgs" ? SolverMode::PgsCfm : SolverMode::EliminateDirect;
  return s;
}

void print_sweep(const SweepResult& r) {
  std::cout << r.label << "\n";
  std::cout << "  " << std::setw(12) << r.axis << "  outcome  " << std::setw(14) << "peak_violation"
            << "  detail\n";
  for (const auto& e : r.entries) {
    std::cout << "  " << std::setw(12) << e.value << "  " << (e.stable ? "stable " : "failed ") << "  "
              << std::setw(14) << e.peak_violation << "  ";
    if (!e.stable) {
      std::cout << (e.error ? std::string(to_string(*e.error)) : std::string("violation")) << " at step "
                << e.fail_step;
    }
    std::cout << "\n";
  }
}

int cmd_run(const std::string& file, const Overrides& o) {
  const Scenario s = load_with_overrides(file, o);
  const fs::path out = default_output_dir(o.out);
  const ScenarioReport rep = run_scenario(s, out);
  std::cout << s.name << ": " << rep.summary["status"].get<std::string>() << " (" << rep.run.steps
            << " steps, peak violation " << rep.run.peak_violation << " m)\n";
  if (rep.run.failed) {
    std::cout << "  failure: " << rep.run.message << " at step " << rep.run.fail_step << "\n";
  }
  for (const auto& a : rep.assertions) {
    std::cout << "  [" << (a.passed ? "pass" : "FAIL") << "] " << a.type << ": " << a.detail << "\n";
  }
  std::cout << "  output: " << out.string() << "\n";
  return rep.exit_status;
}

int cmd_sweep(const std::string& kind, const std::string& file, std::vector<double> values, const Overrides& o) {
  const Scenario s = load_with_overrides(file, o);
  if (values.empty()) values = s.sweep_values;
  const fs::path out = default_output_dir(o.out);
  if (kind == "precision") {
    const PrecisionSweep r = run_precision_sweep(s, values, out);
    print_sweep(r.world);
    print_sweep(r.chained);
  } else {
    print_sweep(run_cfm_sweep(s, values, out));
  }
  std::cout << "output: " << out.string() << "\n";
  return kExitOk;
}

int cmd_compare(const std::string& file, const Overrides& o) {
  const Scenario s = load_with_overrides(file, o);
  const fs::path out = default_output_dir(o.out);
  const CompareReport r = compare_modes(s, out);
  std::cout << s.name << ": critical joint " << r.critical_joint << ", " << r.steps_compared << " steps\n"
            << "  force difference max " << r.max_force_difference << " N, rms " << r.rms_force_difference
            << " N (tolerance " << r.tolerance.force << ")\n"
            << "  angle difference max " << r.max_angle_difference << " rad (tolerance " << r.tolerance.angle
            << ")\n"
            << "  " << (r.passed ? "pass" : "FAIL") << "\n";
  if (r.pgs.failed || r.direct.failed) {
    std::cout << "  pgs: " << (r.pgs.failed ? r.pgs.message : "ok")
              << "; direct: " << (r.direct.failed ? r.direct.message : "ok") << "\n";
    return kExitSimulationFailure;
  }
  return r.passed ? kExitOk : kExitAssertionFailure;
}

int cmd_analyze(const std::string& file) {
  const LoadedScene loaded = load_scene(read_json_file(file));
  json j = to_json(analyze_graph(loaded.scene));
  j["load_report"] = loaded.report.to_json();
  std::cout << j.dump(2) << "\n";
  return kExitOk;
}

int cmd_generate(const std::string& name, const std::string& convention) {
  const Convention c = convention == "chained_frame" ? Convention::ChainedFrame : Convention::WorldFrame;
  std::cout << generate_document(name, c).dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"loopdyn: closed-loop multibody benchmark harness"};
  app.require_subcommand(1);
  Overrides o;

  std::string file;
  auto* run = app.add_subcommand("run", "Run a scenario and write CSV logs");
  run->add_option("scenario", file, "Scenario file")->required();
  add_common(run, o);

  std::string kind;
  std::vector<double> values;
  auto* sweep = app.add_subcommand("sweep", "Precision or CFM sweep");
  sweep->add_option("kind", kind, "precision | cfm")->required()->check(CLI::IsMember({"precision", "cfm"}));
  sweep->add_option("scenario", file, "Scenario file")->required();
  sweep->add_option("--values", values, "Sweep axis values, ascending");
  add_common(sweep, o);

  auto* compare = app.add_subcommand("compare", "Compare pgs and direct modes at the critical joint");
  compare->add_option("scenario", file, "Scenario file")->required();
  add_common(compare, o);

  auto* analyze = app.add_subcommand("analyze", "Print the body-joint graph report of a scene");
  analyze->add_option("scene", file, "Scene file")->required();

  std::string name, convention = "world_frame";
  auto* generate = app.add_subcommand("generate", "Print a built-in scene document");
  generate->add_option("name", name, "Generator name")->required()->check(CLI::IsMember(generator_names()));
  generate->add_option("--convention", convention)->check(CLI::IsMember({"world_frame", "chained_frame"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfigError;
  }

  try {
    if (*run) return cmd_run(file, o);
    if (*sweep) return cmd_sweep(kind, file, values, o);
    if (*compare) return cmd_compare(file, o);
    if (*analyze) return cmd_analyze(file);
    if (*generate) return cmd_generate(name, convention);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::ConfigError || e.kind() == ErrorKind::SchemaError ||
                   e.kind() == ErrorKind::DanglingReference || e.kind() == ErrorKind::ChainOrderError
               ? kExitConfigError
               : kExitSimulationFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
  return kExitConfigError;
}
