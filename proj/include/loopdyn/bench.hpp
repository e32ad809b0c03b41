#pragma once

// Benchmark harness: scenario files, runs with per-step CSV logs, sweeps and
// the two-mode comparison.

#include <loopdyn/graph.hpp>
#include <loopdyn/perturb.hpp>
#include <loopdyn/scenarios.hpp>
#include <loopdyn/scene_io.hpp>
#include <loopdyn/simulation.hpp>

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace loopdyn {

namespace fs = std::filesystem;

/// Exit status contract of the harness.
enum ExitStatus : int { kExitOk = 0, kExitSimulationFailure = 1, kExitAssertionFailure = 2, kExitConfigError = 3 };

inline const std::vector<std::string>& available_channels() {
  static const std::vector<std::string> c{"joint_forces", "violations", "energies", "diagnostics",
                                          "joint_coordinates"};
  return c;
}

struct CompareTolerance {
  double force = 1e-3;  // N, max norm of the critical-joint force difference
  double angle = 1e-3;  // rad, max joint-coordinate difference over revolute joints
  long settle_steps = 0;  // leading steps excluded from the comparison
};

struct Scenario {
  std::string name;
  json scene_source;  // {"generator": ...} or {"file": ...}
  fs::path base_dir;
  SolverConfig config;
  double duration = 1.0;  // s
  std::vector<std::string> outputs = available_channels();
  std::string critical_joint;
  std::uint64_t seed = 0;
  std::optional<PerturbationSpec> perturbation;
  bool strict_closure = false;
  double consistency_tolerance = 1e-4;  // m / rad
  double failure_violation = 0.1;      // m, peak violation that classifies a run as failed
  json assertions = json::array();
  CompareTolerance compare;
  std::vector<double> sweep_values;
  std::string sweep_kind;  // "precision" or "cfm" if the file declares one

  long steps() const { return std::max(1L, std::lround(duration / config.dt)); }
};

namespace bench_detail {

[[noreturn]] inline void config_error(const std::string& msg) { throw Error(ErrorKind::ConfigError, msg); }

inline SolverMode parse_mode(const std::string& s) {
  if (s == "pgs" || s == "pgs_cfm") return SolverMode::PgsCfm;
  if (s == "direct" || s == "eliminate_direct") return SolverMode::EliminateDirect;
  config_error("unknown solver mode '" + s + "' (expected pgs or direct)");
}

inline Distribution parse_distribution(const std::string& s) {
  if (s == "per_axis_uniform") return Distribution::PerAxisUniform;
  if (s == "fixed_offset") return Distribution::FixedOffset;
  config_error("unknown perturbation distribution '" + s + "'");
}

inline PerturbTarget parse_target(const std::string& s) {
  if (s == "anchors") return PerturbTarget::Anchors;
  if (s == "body_positions") return PerturbTarget::BodyPositions;
  if (s == "link_vectors") return PerturbTarget::LinkVectors;
  config_error("unknown perturbation target '" + s + "'");
}

}  // namespace bench_detail

inline SolverConfig parse_solver_config(const json& j, SolverConfig c = {}) {
  if (!j.is_object()) bench_detail::config_error("solver: expected an object");
  if (j.contains("mode")) c.mode = bench_detail::parse_mode(j["mode"].get<std::string>());
  c.iterations = j.value("iterations", c.iterations);
  c.tolerance = j.value("tolerance", c.tolerance);
  c.cfm_default = j.value("cfm", c.cfm_default);
  c.beta = j.value("beta", c.beta);
  c.rank_tolerance = j.value("rank_tolerance", c.rank_tolerance);
  c.dt = j.value("dt", c.dt);
  c.gyroscopic = j.value("gyroscopic", c.gyroscopic);
  c.warm_start = j.value("warm_start", c.warm_start);
  c.warm_start_factor = j.value("warm_start_factor", c.warm_start_factor);
  if (!(c.dt > 0.0) || c.iterations < 1 || !(c.cfm_default >= 0.0) || !(c.beta >= 0.0)) {
    bench_detail::config_error("solver: dt > 0, iterations >= 1, cfm >= 0 and beta >= 0 required");
  }
  return c;
}

inline json to_json(const SolverConfig& c) {
  return {{"mode", std::string(to_string(c.mode))},
          {"iterations", c.iterations},
          {"tolerance", c.tolerance},
          {"cfm", c.cfm_default},
          {"beta", c.beta},
          {"rank_tolerance", c.rank_tolerance},
          {"dt", c.dt},
          {"gyroscopic", c.gyroscopic},
          {"warm_start", c.warm_start},
          {"warm_start_factor", c.warm_start_factor}};
}

inline Scenario parse_scenario(const json& j, const fs::path& base_dir = {}) {
  using bench_detail::config_error;
  if (!j.is_object()) config_error("scenario: expected an object");
  try {
    Scenario s;
    s.base_dir = base_dir;
    s.name = j.value("name", std::string("scenario"));
    if (!j.contains("scene")) config_error("scenario: missing 'scene'");
    s.scene_source = j["scene"].is_string() ? json{{"file", j["scene"]}} : j["scene"];
    if (!s.scene_source.contains("file") && !s.scene_source.contains("generator")) {
      config_error("scenario: scene needs 'file' or 'generator'");
    }
    if (j.contains("solver")) s.config = parse_solver_config(j["solver"]);
    s.duration = j.value("duration", s.duration);
    if (!(s.duration > 0.0)) config_error("scenario: duration must be > 0");
    if (j.contains("outputs")) {
      s.outputs = j["outputs"].get<std::vector<std::string>>();
      for (const auto& o : s.outputs) {
        const auto& all = available_channels();
        if (std::find(all.begin(), all.end(), o) == all.end()) config_error("scenario: unknown output channel '" + o + "'");
      }
    }
    s.critical_joint = j.value("critical_joint", std::string{});
    s.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("perturbation")) {
      const json& p = j["perturbation"];
      PerturbationSpec ps;
      ps.magnitude = p.value("magnitude", 0.0);
      ps.distribution = bench_detail::parse_distribution(p.value("distribution", std::string("per_axis_uniform")));
      ps.target = bench_detail::parse_target(p.value("target", std::string("body_positions")));
      ps.names = p.value("names", std::vector<std::string>{});
      if (p.contains("direction")) ps.direction = io::vec3(p["direction"], "/perturbation/direction");
      if (!std::isfinite(ps.magnitude) || ps.magnitude < 0.0) config_error("perturbation: magnitude must be >= 0");
      s.perturbation = ps;
    }
    s.strict_closure = j.value("strict_closure", s.strict_closure);
    s.consistency_tolerance = j.value("consistency_tolerance", s.consistency_tolerance);
    s.failure_violation = j.value("failure_violation", s.failure_violation);
    if (j.contains("assertions")) {
      if (!j["assertions"].is_array()) config_error("scenario: assertions must be an array");
      s.assertions = j["assertions"];
    }
    if (j.contains("compare")) {
      s.compare.force = j["compare"].value("force_tolerance", s.compare.force);
      s.compare.angle = j["compare"].value("angle_tolerance", s.compare.angle);
      s.compare.settle_steps = j["compare"].value("settle_steps", s.compare.settle_steps);
    }
    if (j.contains("sweep")) {
      s.sweep_kind = j["sweep"].value("kind", std::string{});
      s.sweep_values = j["sweep"].value("values", std::vector<double>{});
    }
    return s;
  } catch (const json::exception& e) {
    config_error(std::string("scenario: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ConfigError) throw;
    config_error(e.what());
  }
}

inline Scenario load_scenario_file(const fs::path& path) {
  json j;
  try {
    j = read_json_file(path.string());
  } catch (const Error& e) {
    throw Error(ErrorKind::ConfigError, e.what());
  }
  return parse_scenario(j, path.parent_path());
}

/// The scene document named by the scenario; generators honor `convention`.
inline json scenario_document(const Scenario& s, std::optional<Convention> convention = std::nullopt) {
  const json& src = s.scene_source;
  json doc;
  if (src.contains("generator")) {
    const std::string conv = src.value("convention", std::string("world_frame"));
    Convention c = conv == "chained_frame" ? Convention::ChainedFrame : Convention::WorldFrame;
    if (conv != "chained_frame" && conv != "world_frame") {
      bench_detail::config_error("scene: unknown convention '" + conv + "'");
    }
    if (convention) c = *convention;
    return generate_document(src["generator"].get<std::string>(), c, src.value("params", json::object()));
  }
  const fs::path file = s.base_dir / src["file"].get<std::string>();
  doc = read_json_file(file.string());
  if (convention) {
    const std::string have = doc.value("convention", std::string{});
    if (*convention == Convention::WorldFrame && have == "chained_frame") return chained_to_world(doc);
    if (to_string(*convention) != have) {
      bench_detail::config_error("scene file '" + file.string() + "' cannot be converted to " +
                                 std::string(to_string(*convention)));
    }
  }
  return doc;
}

// ---------------------------------------------------------------------------
// Single runs

struct RunOptions {
  bool strict_closure = false;
  double consistency_tolerance = 1e-4;
  double failure_violation = 0.1;
  bool keep_records = true;
};

struct RunOutcome {
  bool failed = false;
  std::optional<ErrorKind> error;
  long fail_step = -1;
  std::string message;
  long steps = 0;
  double peak_violation = 0.0;  // m
  double peak_force = 0.0;      // N, max joint reaction norm
  std::optional<InitializationReport> initialization;
  std::vector<StepRecord> records;
  std::vector<std::string> joint_ids;
  std::vector<std::string> body_ids;
};

inline json to_json(const RunOutcome& o) {
  json j{{"failed", o.failed}, {"steps", o.steps}, {"peak_violation", o.peak_violation}, {"peak_force", o.peak_force}};
  if (o.error) {
    j["error"] = {{"kind", std::string(to_string(*o.error))}, {"step", o.fail_step}, {"message", o.message}};
  } else if (o.failed) {
    j["error"] = {{"kind", nullptr}, {"step", o.fail_step}, {"message", o.message}};
  }
  if (o.initialization) {
    j["initialization"] = {{"iterations", o.initialization->iterations},
                           {"residual_position", o.initialization->residual_position},
                           {"residual_angle", o.initialization->residual_angle},
                           {"rank", o.initialization->rank},
                           {"dropped_rows", o.initialization->dropped}};
  }
  return j;
}

/// Steps `scene` for `steps` steps. A run fails on any raised error, on a
/// peak joint violation above `failure_violation`, or on non-finite state.
inline RunOutcome simulate(const SceneModel& scene, const SolverConfig& config, long steps,
                           const RunOptions& opt = {},
                           const std::function<void(const StepRecord&)>& on_step = {}) {
  RunOutcome out;
  for (const auto& j : scene.joints) out.joint_ids.push_back(j.id);
  for (const auto& b : scene.bodies) out.body_ids.push_back(b.id);
  try {
    Simulation sim(scene, config);
    if (opt.strict_closure) out.initialization = consistent_initialization(sim, opt.consistency_tolerance);
    for (long k = 0; k < steps; ++k) {
      StepRecord rec = sim.step();
      ++out.steps;
      out.peak_violation = std::max(out.peak_violation, rec.violation.max_position);
      for (const auto& f : rec.forces) out.peak_force = std::max(out.peak_force, f.force.norm());
      const bool finite = std::isfinite(rec.violation.max_position) && std::isfinite(rec.energy.total());
      if (on_step) on_step(rec);
      if (opt.keep_records) out.records.push_back(std::move(rec));
      if (!finite || out.peak_violation > opt.failure_violation) {
        out.failed = true;
        out.fail_step = out.steps;
        if (!finite) {
          out.error = ErrorKind::NonFiniteState;
          out.message = "non-finite state";
        } else {
          out.message = "joint violation " + std::to_string(out.peak_violation) + " m exceeds " +
                        std::to_string(opt.failure_violation) + " m";
        }
        break;
      }
    }
  } catch (const Error& e) {
    out.failed = true;
    out.error = e.kind();
    out.fail_step = e.step() >= 0 ? e.step() : out.steps + 1;
    out.message = e.what();
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV

/// Shortest round-trip decimal, independent of locale.
inline void append_number(std::string& s, double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  s.append(buf, r.ptr);
}

inline void append_number(std::string& s, long v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  s.append(buf, r.ptr);
}

inline std::string format_number(double v) {
  std::string s;
  append_number(s, v);
  return s;
}

inline std::vector<std::string> channel_columns(const std::string& channel, const std::vector<std::string>& joints) {
  std::vector<std::string> cols{"step", "time"};
  if (channel == "joint_forces") {
    for (const auto& j : joints) {
      for (const char* c : {"fx", "fy", "fz", "tx", "ty", "tz"}) cols.push_back(j + "." + c);
    }
  } else if (channel == "violations") {
    for (const char* c : {"max_position", "rms_position", "max_angle", "rms_angle"}) cols.emplace_back(c);
    for (const auto& j : joints) {
      cols.push_back(j + ".position");
      cols.push_back(j + ".angle");
    }
  } else if (channel == "energies") {
    for (const char* c : {"kinetic", "potential", "total"}) cols.emplace_back(c);
  } else if (channel == "diagnostics") {
    for (const char* c : {"iterations", "residual", "rank", "dropped_rows", "singular"}) cols.emplace_back(c);
  } else if (channel == "joint_coordinates") {
    for (const auto& j : joints) cols.push_back(j);
  }
  return cols;
}

inline std::string channel_csv(const std::string& channel, const RunOutcome& run) {
  std::string s;
  const auto cols = channel_columns(channel, run.joint_ids);
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) s += ',';
    s += cols[i];
  }
  s += '\n';
  for (const auto& r : run.records) {
    append_number(s, r.step);
    s += ',';
    append_number(s, r.time);
    auto put = [&s](double v) {
      s += ',';
      append_number(s, v);
    };
    if (channel == "joint_forces") {
      for (const auto& f : r.forces) {
        for (int k = 0; k < 3; ++k) put(f.force[k]);
        for (int k = 0; k < 3; ++k) put(f.torque[k]);
      }
    } else if (channel == "violations") {
      put(r.violation.max_position);
      put(r.violation.rms_position);
      put(r.violation.max_angle);
      put(r.violation.rms_angle);
      for (const auto& v : r.violation.joints) {
        put(v.position_error);
        put(v.angle_error);
      }
    } else if (channel == "energies") {
      put(r.energy.kinetic);
      put(r.energy.potential);
      put(r.energy.total());
    } else if (channel == "diagnostics") {
      s += ',';
      append_number(s, static_cast<long>(r.diagnostics.iterations_used));
      put(r.diagnostics.residual);
      s += ',';
      append_number(s, static_cast<long>(r.diagnostics.rank));
      s += ',';
      append_number(s, static_cast<long>(r.diagnostics.dropped_rows.size()));
      s += r.diagnostics.singular ? ",1" : ",0";
    } else if (channel == "joint_coordinates") {
      for (double c : r.coordinates) put(c);
    }
    s += '\n';
  }
  return s;
}

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::ConfigError, "cannot write '" + path.string() + "'");
  out << text;
}

inline void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

inline fs::path prepare_output_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::ConfigError, "cannot create output directory '" + dir.string() + "'");
  return dir;
}

/// `--out` if given, else $LOOPDYN_OUT, else ./loopdyn_out.
inline fs::path default_output_dir(const std::string& requested = {}) {
  if (!requested.empty()) return requested;
  if (const char* env = std::getenv("LOOPDYN_OUT"); env && *env) return env;
  return "loopdyn_out";
}

// ---------------------------------------------------------------------------
// Assertions

struct AssertionResult {
  std::string type;
  bool passed = false;
  std::string detail;
};

namespace bench_detail {

inline int component_index(const std::string& c) {
  if (c == "x") return 0;
  if (c == "y") return 1;
  if (c == "z") return 2;
  if (c == "norm") return 3;
  config_error("assertion: unknown component '" + c + "'");
}

inline int find_id(const std::vector<std::string>& ids, const std::string& id, const char* what) {
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] == id) return static_cast<int>(i);
  }
  config_error(std::string("assertion: unknown ") + what + " '" + id + "'");
}

}  // namespace bench_detail

/// Scenario-local checks over a finished run. Types:
///   joint_force      {joint, component x|y|z|norm, expected, tolerance, from_step}
///   max_violation    {limit}
///   max_angular_speed {body, limit}  (over every step)
///   final_angular_speed {body, expected, relative_tolerance}
///   expect_error     {kind, step}
///   completes        {}
inline std::vector<AssertionResult> evaluate_assertions(const json& assertions, const RunOutcome& run) {
  using namespace bench_detail;
  std::vector<AssertionResult> out;
  for (const auto& a : assertions) {
    AssertionResult r;
    r.type = a.value("type", std::string{});
    if (r.type == "joint_force") {
      const int ji = find_id(run.joint_ids, a.at("joint").get<std::string>(), "joint");
      const int comp = component_index(a.value("component", std::string("z")));
      const double expected = a.at("expected").get<double>();
      const double tol = a.at("tolerance").get<double>();
      const long from = a.value("from_step", 1L);
      double worst = 0.0;
      long checked = 0;
      for (const auto& rec : run.records) {
        if (rec.step < from) continue;
        const Vec3& f = rec.forces[ji].force;
        const double v = comp == 3 ? f.norm() : f[comp];
        worst = std::max(worst, std::abs(v - expected));
        ++checked;
      }
      r.passed = !run.failed && checked > 0 && worst <= tol;
      r.detail = "max |f - expected| = " + format_number(worst) + " over " + std::to_string(checked) + " steps";
    } else if (r.type == "max_violation") {
      const double limit = a.at("limit").get<double>();
      r.passed = !run.failed && run.peak_violation <= limit;
      r.detail = "peak violation " + format_number(run.peak_violation);
    } else if (r.type == "max_angular_speed") {
      const int bi = find_id(run.body_ids, a.at("body").get<std::string>(), "body");
      const double limit = a.at("limit").get<double>();
      double peak = 0.0;
      for (const auto& rec : run.records) peak = std::max(peak, rec.twists[bi].angular.norm());
      r.passed = !run.failed && peak <= limit;
      r.detail = "peak |w| = " + format_number(peak);
    } else if (r.type == "final_angular_speed") {
      const int bi = find_id(run.body_ids, a.at("body").get<std::string>(), "body");
      const double expected = a.at("expected").get<double>();
      const double rel = a.at("relative_tolerance").get<double>();
      const double w = run.records.empty() ? 0.0 : run.records.back().twists[bi].angular.norm();
      r.passed = !run.failed && std::abs(w - expected) <= rel * std::abs(expected);
      r.detail = "|w| = " + format_number(w) + ", expected " + format_number(expected);
    } else if (r.type == "expect_error") {
      const std::string kind = a.at("kind").get<std::string>();
      const long step = a.value("step", -1L);
      r.passed = run.error && to_string(*run.error) == kind && (step < 0 || run.fail_step == step);
      r.detail = run.error ? std::string(to_string(*run.error)) + " at step " + std::to_string(run.fail_step)
                           : std::string("no error");
    } else if (r.type == "completes") {
      r.passed = !run.failed;
      r.detail = run.failed ? run.message : "completed";
    } else {
      config_error("assertion: unknown type '" + r.type + "'");
    }
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// run_scenario

struct ScenarioReport {
  int exit_status = kExitOk;
  RunOutcome run;
  std::vector<AssertionResult> assertions;
  LoadReport load;
  GraphReport graph;
  std::vector<AppliedOffset> offsets;
  double wall_seconds = 0.0;
  json summary;
  std::vector<fs::path> files;
};

struct PreparedScene {
  SceneModel scene;
  LoadReport load;
  std::vector<AppliedOffset> offsets;
};

/// Loads the scenario's scene and applies its perturbation, if any.
inline PreparedScene prepare_scene(const Scenario& s, std::optional<Convention> convention = std::nullopt) {
  json doc = scenario_document(s, convention);
  PreparedScene out;
  if (s.perturbation && s.perturbation->target != PerturbTarget::Anchors) {
    PerturbationSpec spec = *s.perturbation;
    spec.seed = s.seed;
    auto pd = perturb_document(doc, spec);
    doc = std::move(pd.document);
    out.offsets = std::move(pd.offsets);
  }
  LoadedScene loaded = load_scene(doc);
  out.scene = std::move(loaded.scene);
  out.load = loaded.report;
  if (s.perturbation && s.perturbation->target == PerturbTarget::Anchors) {
    PerturbationSpec spec = *s.perturbation;
    spec.seed = s.seed;
    auto ps = perturb(out.scene, spec);
    out.scene = std::move(ps.scene);
    out.offsets = std::move(ps.offsets);
  }
  return out;
}

inline RunOptions run_options(const Scenario& s) {
  return {s.strict_closure, s.consistency_tolerance, s.failure_violation, true};
}

/// Runs a scenario and, if `out_dir` is non-empty, writes one CSV per
/// requested channel plus summary.json and manifest.json there.
inline ScenarioReport run_scenario(const Scenario& s, const fs::path& out_dir = {}) {
  ScenarioReport rep;
  const auto t0 = std::chrono::steady_clock::now();
  PreparedScene prepared = prepare_scene(s);
  rep.load = prepared.load;
  rep.offsets = prepared.offsets;
  rep.graph = analyze_graph(prepared.scene);

  rep.run = simulate(prepared.scene, s.config, s.steps(), run_options(s));
  rep.assertions = evaluate_assertions(s.assertions, rep.run);
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  bool all_pass = true;
  for (const auto& a : rep.assertions) all_pass &= a.passed;
  rep.exit_status = rep.run.failed ? kExitSimulationFailure : (all_pass ? kExitOk : kExitAssertionFailure);

  json& sum = rep.summary;
  sum["scenario"] = s.name;
  sum["status"] = rep.exit_status == kExitOk ? "ok"
                  : rep.exit_status == kExitSimulationFailure ? "simulation_failure"
                                                               : "assertion_failure";
  sum["exit_status"] = rep.exit_status;
  sum["config"] = to_json(s.config);
  sum["duration"] = s.duration;
  sum["seed"] = s.seed;
  sum["strict_closure"] = s.strict_closure;
  sum["run"] = to_json(rep.run);
  sum["graph"] = to_json(rep.graph);
  sum["load_report"] = rep.load.to_json();
  sum["perturbation_offsets"] = to_json(rep.offsets);
  sum["assertions"] = json::array();
  for (const auto& a : rep.assertions) {
    sum["assertions"].push_back({{"type", a.type}, {"passed", a.passed}, {"detail", a.detail}});
  }
  sum["wall_clock_seconds"] = rep.wall_seconds;

  if (!out_dir.empty()) {
    prepare_output_dir(out_dir);
    json manifest;
    manifest["scenario"] = s.name;
    manifest["format"] = {{"separator", ","}, {"decimal", "."}, {"floats", "shortest round-trip"},
                          {"step", "1-based; time = step * dt"}};
    manifest["files"] = json::array();
    for (const auto& ch : s.outputs) {
      const fs::path file = out_dir / (ch + ".csv");
      write_text(file, channel_csv(ch, rep.run));
      rep.files.push_back(file);
      manifest["files"].push_back({{"file", ch + ".csv"}, {"channel", ch},
                                   {"rows", rep.run.records.size()},
                                   {"columns", channel_columns(ch, rep.run.joint_ids)}});
    }
    write_json(out_dir / "summary.json", sum);
    manifest["files"].push_back({{"file", "summary.json"}, {"channel", "summary"}});
    write_json(out_dir / "manifest.json", manifest);
    rep.files.push_back(out_dir / "summary.json");
    rep.files.push_back(out_dir / "manifest.json");
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Sweeps

struct SweepEntry {
  double value = 0.0;
  bool stable = true;
  std::optional<ErrorKind> error;
  long fail_step = -1;
  std::string message;
  double peak_violation = 0.0;
  double peak_force = 0.0;
  double closure_residual = 0.0;  // at load
};

struct SweepResult {
  std::string axis;   // "magnitude" or "cfm"
  std::string label;  // e.g. convention
  std::vector<SweepEntry> entries;

  const SweepEntry* at(double v) const {
    for (const auto& e : entries) {
      if (e.value == v) return &e;
    }
    return nullptr;
  }
};

inline SweepEntry make_entry(double value, const RunOutcome& run) {
  SweepEntry e;
  e.value = value;
  e.stable = !run.failed;
  e.error = run.error;
  e.fail_step = run.fail_step;
  e.message = run.message;
  e.peak_violation = run.peak_violation;
  e.peak_force = run.peak_force;
  return e;
}

inline json to_json(const SweepResult& r) {
  json j{{"axis", r.axis}, {"label", r.label}, {"entries", json::array()}};
  for (const auto& e : r.entries) {
    json je{{"value", e.value},
            {"outcome", e.stable ? "stable" : "failed"},
            {"peak_violation", e.peak_violation},
            {"peak_force", e.peak_force},
            {"closure_residual", e.closure_residual}};
    if (!e.stable) {
      je["error"] = e.error ? json(std::string(to_string(*e.error))) : json(nullptr);
      je["step"] = e.fail_step;
      je["message"] = e.message;
    }
    j["entries"].push_back(je);
  }
  return j;
}

inline std::string sweep_csv(const std::vector<SweepResult>& results) {
  std::string s = "label,value,outcome,error,step,peak_violation,peak_force,closure_residual\n";
  for (const auto& r : results) {
    for (const auto& e : r.entries) {
      s += r.label + ",";
      append_number(s, e.value);
      s += e.stable ? ",stable," : ",failed,";
      if (e.error) s += to_string(*e.error);
      s += ',';
      append_number(s, e.fail_step);
      s += ',';
      append_number(s, e.peak_violation);
      s += ',';
      append_number(s, e.peak_force);
      s += ',';
      append_number(s, e.closure_residual);
      s += '\n';
    }
  }
  return s;
}

inline void check_sorted_values(const std::vector<double>& values, bool positive) {
  if (values.empty()) bench_detail::config_error("sweep: no values given");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]) || values[i] < 0.0 || (positive && values[i] == 0.0)) {
      bench_detail::config_error(positive ? "sweep: values must be > 0" : "sweep: values must be >= 0");
    }
    if (i > 0 && !(values[i] > values[i - 1])) bench_detail::config_error("sweep: values must be sorted ascending");
  }
}

struct PrecisionSweep {
  SweepResult world;    // world_frame loading
  SweepResult chained;  // chained_frame loading (strict closure when the scenario asks for it)
};

/// Runs the scenario at each perturbation magnitude under both loading
/// conventions. world_frame perturbs body positions; chained_frame stretches
/// every link vector along itself, so errors accumulate along the chain.
inline PrecisionSweep run_precision_sweep(const Scenario& base, const std::vector<double>& magnitudes,
                                          const fs::path& out_dir = {}) {
  check_sorted_values(magnitudes, false);
  PrecisionSweep out;
  out.world = {"magnitude", "world_frame", {}};
  out.chained = {"magnitude", "chained_frame", {}};
  const Distribution dist = base.perturbation ? base.perturbation->distribution : Distribution::PerAxisUniform;
  for (double m : magnitudes) {
    for (const Convention conv : {Convention::WorldFrame, Convention::ChainedFrame}) {
      Scenario s = base;
      PerturbationSpec spec;
      spec.magnitude = m;
      spec.distribution = dist;
      spec.seed = base.seed;
      spec.target = conv == Convention::WorldFrame ? PerturbTarget::BodyPositions : PerturbTarget::LinkVectors;
      s.perturbation = spec;
      s.strict_closure = conv == Convention::ChainedFrame && base.strict_closure;
      SweepEntry e;
      try {
        PreparedScene p = prepare_scene(s, conv);
        RunOptions opt = run_options(s);
        opt.keep_records = false;
        e = make_entry(m, simulate(p.scene, s.config, s.steps(), opt));
        e.closure_residual = p.load.max_closure_residual;
      } catch (const Error& err) {
        e.value = m;
        e.stable = false;
        e.error = err.kind();
        e.fail_step = 0;
        e.message = err.what();
      }
      (conv == Convention::WorldFrame ? out.world : out.chained).entries.push_back(e);
    }
  }
  if (!out_dir.empty()) {
    prepare_output_dir(out_dir);
    write_text(out_dir / "precision_sweep.csv", sweep_csv({out.world, out.chained}));
    write_json(out_dir / "precision_sweep.json",
               {{"scenario", base.name}, {"results", {to_json(out.world), to_json(out.chained)}}});
    write_json(out_dir / "manifest.json",
               {{"scenario", base.name},
                {"files", {{{"file", "precision_sweep.csv"}, {"channel", "sweep"}},
                           {{"file", "precision_sweep.json"}, {"channel", "sweep"}}}}});
  }
  return out;
}

/// Runs pgs_cfm at each regularization value and records the peak violation.
inline SweepResult run_cfm_sweep(const Scenario& base, const std::vector<double>& values,
                                 const fs::path& out_dir = {}) {
  check_sorted_values(values, true);
  SweepResult out{"cfm", "pgs_cfm", {}};
  const PreparedScene p = prepare_scene(base);
  for (double v : values) {
    SolverConfig c = base.config;
    c.mode = SolverMode::PgsCfm;
    c.cfm_default = v;
    RunOptions opt = run_options(base);
    opt.keep_records = false;
    SweepEntry e = make_entry(v, simulate(p.scene, c, base.steps(), opt));
    e.closure_residual = p.load.max_closure_residual;
    out.entries.push_back(e);
  }
  if (!out_dir.empty()) {
    prepare_output_dir(out_dir);
    write_text(out_dir / "cfm_sweep.csv", sweep_csv({out}));
    write_json(out_dir / "cfm_sweep.json", {{"scenario", base.name}, {"results", {to_json(out)}}});
    write_json(out_dir / "manifest.json",
               {{"scenario", base.name},
                {"files", {{{"file", "cfm_sweep.csv"}, {"channel", "sweep"}},
                           {{"file", "cfm_sweep.json"}, {"channel", "sweep"}}}}});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Mode comparison

struct CompareReport {
  std::string critical_joint;
  RunOutcome pgs;
  RunOutcome direct;
  long steps_compared = 0;
  double max_force_difference = 0.0;  // N
  double rms_force_difference = 0.0;  // N
  double max_angle_difference = 0.0;  // rad, over revolute joints
  CompareTolerance tolerance;
  bool passed = false;
  std::vector<double> force_difference;  // per step
  std::vector<double> angle_difference;  // per step
};

inline CompareReport compare_modes(const Scenario& s, const fs::path& out_dir = {}) {
  CompareReport rep;
  rep.tolerance = s.compare;
  const PreparedScene p = prepare_scene(s);
  rep.critical_joint = s.critical_joint.empty() && !p.scene.joints.empty() ? p.scene.joints.front().id
                                                                           : s.critical_joint;
  const int cj = p.scene.joint_index(rep.critical_joint);
  if (cj < 0) bench_detail::config_error("compare: unknown critical joint '" + rep.critical_joint + "'");
  std::vector<int> revolute;
  for (std::size_t j = 0; j < p.scene.joints.size(); ++j) {
    if (p.scene.joints[j].kind == JointKind::Revolute) revolute.push_back(static_cast<int>(j));
  }
  SolverConfig cp = s.config, cd = s.config;
  cp.mode = SolverMode::PgsCfm;
  cd.mode = SolverMode::EliminateDirect;
  rep.pgs = simulate(p.scene, cp, s.steps(), run_options(s));
  rep.direct = simulate(p.scene, cd, s.steps(), run_options(s));
  const std::size_t n = std::min(rep.pgs.records.size(), rep.direct.records.size());
  double sq = 0.0;
  std::size_t counted = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (rep.pgs.records[k].step <= s.compare.settle_steps) {
      rep.force_difference.push_back(0.0);
      rep.angle_difference.push_back(0.0);
      continue;
    }
    ++counted;
    const double df = (rep.pgs.records[k].forces[cj].force - rep.direct.records[k].forces[cj].force).norm();
    double da = 0.0;
    for (int j : revolute) {
      da = std::max(da, std::abs(rep.pgs.records[k].coordinates[j] - rep.direct.records[k].coordinates[j]));
    }
    rep.force_difference.push_back(df);
    rep.angle_difference.push_back(da);
    rep.max_force_difference = std::max(rep.max_force_difference, df);
    rep.max_angle_difference = std::max(rep.max_angle_difference, da);
    sq += df * df;
  }
  rep.steps_compared = static_cast<long>(counted);
  rep.rms_force_difference = counted ? std::sqrt(sq / static_cast<double>(counted)) : 0.0;
  rep.passed = !rep.pgs.failed && !rep.direct.failed && rep.max_force_difference <= rep.tolerance.force &&
               rep.max_angle_difference <= rep.tolerance.angle;

  if (!out_dir.empty()) {
    prepare_output_dir(out_dir);
    std::string csv = "step,time,force_difference,angle_difference\n";
    for (std::size_t k = 0; k < n; ++k) {
      append_number(csv, rep.pgs.records[k].step);
      csv += ',';
      append_number(csv, rep.pgs.records[k].time);
      csv += ',';
      append_number(csv, rep.force_difference[k]);
      csv += ',';
      append_number(csv, rep.angle_difference[k]);
      csv += '\n';
    }
    write_text(out_dir / "compare.csv", csv);
    json sum{{"scenario", s.name},
             {"critical_joint", rep.critical_joint},
             {"steps_compared", rep.steps_compared},
             {"max_force_difference", rep.max_force_difference},
             {"rms_force_difference", rep.rms_force_difference},
             {"max_angle_difference", rep.max_angle_difference},
             {"force_tolerance", rep.tolerance.force},
             {"angle_tolerance", rep.tolerance.angle},
             {"settle_steps", rep.tolerance.settle_steps},
             {"passed", rep.passed},
             {"pgs", to_json(rep.pgs)},
             {"direct", to_json(rep.direct)}};
    write_json(out_dir / "compare.json", sum);
    write_json(out_dir / "manifest.json",
               {{"scenario", s.name},
                {"files", {{{"file", "compare.csv"}, {"channel", "compare"},
                            {"columns", {"step", "time", "force_difference", "angle_difference"}}},
                           {{"file", "compare.json"}, {"channel", "summary"}}}}});
  }
  return rep;
}

}  // namespace loopdyn
