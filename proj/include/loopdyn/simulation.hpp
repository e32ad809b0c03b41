#pragma once

// One simulation instance: scene state, warm-start cache, and the per-step
// pipeline (forces -> rows -> solve -> impulses -> integrate -> log).

#include <loopdyn/body.hpp>
#include <loopdyn/joint.hpp>
#include <loopdyn/scene_model.hpp>
#include <loopdyn/solver.hpp>

#include <array>
#include <map>
#include <vector>

namespace loopdyn {

/// Reaction at a joint, expressed about the child-side anchor point.
struct ConstraintForceRecord {
  Vec3 force = Vec3::Zero();          // on the child, N
  Vec3 torque = Vec3::Zero();         // on the child, N·m
  Vec3 parent_force = Vec3::Zero();   // on the parent, N
  Vec3 parent_torque = Vec3::Zero();  // on the parent, N·m
};

struct StepRecord {
  long step = 0;  // 1-based
  double time = 0.0;
  std::vector<ConstraintForceRecord> forces;  // per joint
  std::vector<double> coordinates;            // per joint, rad or m
  std::vector<Twist> twists;                  // per body, after the step
  ViolationReport violation;
  Energy energy;
  SolveDiagnostics diagnostics;
};

class Simulation {
 public:
  Simulation(SceneModel scene, SolverConfig config)
      : scene_(std::move(scene)), config_(config), index_(make_body_index(scene_.bodies)) {
    if (!(config_.dt > 0.0)) throw Error(ErrorKind::ConfigError, "dt must be positive");
    for (const auto& b : scene_.bodies) validate_mass_properties(b);
    for (const auto& j : scene_.joints) {
      resolve_body(index_, j.parent);
      resolve_body(index_, j.child);
    }
    warm_.resize(scene_.joints.size());
  }

  const SceneModel& scene() const { return scene_; }
  SceneModel& scene() { return scene_; }
  const SolverConfig& config() const { return config_; }
  SolverConfig& config() { return config_; }
  const BodyIndex& index() const { return index_; }
  double time() const { return time_; }
  long steps_taken() const { return steps_; }

  ViolationReport violation() const { return measure_violation(scene_.joints, scene_.bodies, index_); }

  std::vector<double> coordinates() const {
    std::vector<double> out;
    out.reserve(scene_.joints.size());
    for (const auto& j : scene_.joints) {
      out.push_back(joint_coordinate(j, joint_geometry(j, scene_.bodies, index_)));
    }
    return out;
  }

  /// All rows for the current state, in assembly order (joint order, then row index).
  std::vector<ConstraintRow> build_rows() const {
    const StabilizationParams params{
        config_.beta, config_.mode == SolverMode::PgsCfm ? config_.cfm_default : 0.0};
    std::vector<int> degree(scene_.bodies.size(), 0);
    for (const auto& j : scene_.joints) {
      const int a = resolve_body(index_, j.parent);
      const int b = resolve_body(index_, j.child);
      if (a >= 0) ++degree[a];
      if (b >= 0) ++degree[b];
    }
    std::vector<ConstraintRow> rows;
    for (std::size_t ji = 0; ji < scene_.joints.size(); ++ji) {
      const Joint& j = scene_.joints[ji];
      const int jidx = static_cast<int>(ji);
      auto jr = joint_rows(j, scene_.bodies, index_, config_.dt, params, jidx);
      int next = static_cast<int>(jr.size());
      rows.insert(rows.end(), jr.begin(), jr.end());
      for (auto& r : motor_rows(j, scene_.bodies, index_, config_.dt, jidx, next)) {
        rows.push_back(r);
        ++next;
      }
      for (auto& r : damping_rows(j, scene_.bodies, index_, config_.dt, jidx, next)) {
        rows.push_back(r);
        ++next;
      }
      const int child = resolve_body(index_, j.child);
      if (child >= 0 &&
          has_indeterminate_axis(j, scene_.bodies, index_, degree[child])) {
        for (auto& r : indeterminate_axis_rows(j, scene_.bodies, index_, params.cfm, jidx, next)) {
          rows.push_back(r);
          ++next;
        }
      }
    }
    return rows;
  }

  StepRecord step();

 private:
  void apply_actuation() {
    for (const auto& act : scene_.actuation) {
      const int ji = scene_.joint_index(act.joint);
      if (ji < 0 || !scene_.joints[ji].motor) continue;
      scene_.joints[ji].motor->target = act.value_at(time_);
    }
  }

  SceneModel scene_;
  SolverConfig config_;
  BodyIndex index_;
  double time_ = 0.0;
  long steps_ = 0;
  std::vector<std::array<double, 8>> warm_;
};

inline StepRecord Simulation::step() {
  const double dt = config_.dt;
  const long step_no = steps_ + 1;
  try {
    apply_actuation();
    std::vector<ForceAccumulator> acc(scene_.bodies.size());
    for (std::size_t i = 0; i < scene_.bodies.size(); ++i) {
      auto& b = scene_.bodies[i];
      acc[i].reset();
      if (b.is_static) continue;
      acc[i].force = b.mass * scene_.gravity;
      if (config_.gyroscopic) acc[i].torque += gyroscopic_torque(b, dt);
    }

    const std::vector<ConstraintRow> rows = build_rows();
    const MassOperator mass(scene_.bodies);
    AssembledSystem sys = assemble_system(rows, scene_.bodies, mass, acc, dt);
    const auto n = static_cast<Eigen::Index>(rows.size());
    VecX lambda = VecX::Zero(n);
    SolveDiagnostics diag;

    if (config_.mode == SolverMode::PgsCfm) {
      if (config_.warm_start) {
        for (Eigen::Index i = 0; i < n; ++i) {
          lambda[i] = config_.warm_start_factor * warm_[rows[i].joint][rows[i].index];
        }
      }
      diag = pgs_solve(sys.op, sys.b, sys.lo, sys.hi, config_, lambda);
    } else {
      const RedundancyResult red = detect_redundant(sys.op, config_.rank_tolerance);
      if (!red.null_rows.empty()) {
        const auto& r = rows[red.null_rows.front()];
        throw Error(ErrorKind::SingularSystem,
                    "joint '" + scene_.joints[r.joint].id + "' row " + std::to_string(r.index) +
                        " has a zero pivot");
      }
      std::vector<ConstraintRow> kept;
      kept.reserve(red.kept.size());
      for (int k : red.kept) kept.push_back(rows[k]);
      ConstraintSystem reduced(kept, mass, dt);
      const auto nk = static_cast<Eigen::Index>(kept.size());
      VecX bk(nk), lok(nk), hik(nk);
      for (Eigen::Index k = 0; k < nk; ++k) {
        bk[k] = sys.b[red.kept[k]];
        lok[k] = sys.lo[red.kept[k]];
        hik[k] = sys.hi[red.kept[k]];
      }
      DirectResult res = direct_solve(reduced.dense(), bk, lok, hik, config_);
      for (Eigen::Index k = 0; k < nk; ++k) lambda[red.kept[k]] = res.lambda[k];
      diag = res.diagnostics;
      diag.rank = red.rank;
      for (int d : red.dropped) {
        diag.dropped_rows.push_back({scene_.joints[rows[d].joint].id, rows[d].index});
      }
    }

    for (auto& w : warm_) w.fill(0.0);
    for (Eigen::Index i = 0; i < n; ++i) warm_[rows[i].joint][rows[i].index] = lambda[i];

    StepRecord rec;
    rec.step = step_no;
    rec.diagnostics = std::move(diag);
    rec.forces.assign(scene_.joints.size(), {});
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& r = rows[i];
      const JointGeometry g = joint_geometry(scene_.joints[r.joint], scene_.bodies, index_);
      const Vec3 p = g.frame_b.position;
      auto& f = rec.forces[r.joint];
      const Vec3 fb = lambda[i] * r.jac_b.head<3>() / dt;
      const Vec3 fa = lambda[i] * r.jac_a.head<3>() / dt;
      f.force += fb;
      f.torque += lambda[i] * r.jac_b.tail<3>() / dt + (g.com_b - p).cross(fb);
      f.parent_force += fa;
      f.parent_torque += lambda[i] * r.jac_a.tail<3>() / dt + (g.com_a - p).cross(fa);
    }

    const std::vector<Vec6> impulses = sys.op.impulses(lambda);
    integrate_semi_implicit(scene_.bodies, acc, impulses, dt);

    ++steps_;
    time_ = static_cast<double>(steps_) * dt;
    rec.time = time_;
    rec.violation = violation();
    rec.coordinates = coordinates();
    rec.twists.reserve(scene_.bodies.size());
    for (const auto& b : scene_.bodies) rec.twists.push_back(b.twist);
    rec.energy = system_energy(scene_.bodies, scene_.gravity);
    return rec;
  } catch (const Error& e) {
    throw e.at_step(step_no);
  }
}

inline StepRecord solve_step(Simulation& sim) { return sim.step(); }

struct InitializationReport {
  int iterations = 0;
  double residual_position = 0.0;  // m, worst joint gap after projection
  double residual_angle = 0.0;     // rad
  int rank = 0;
  int dropped = 0;
};

/// Consistent initialization with hard constraints: Newton projection of the
/// positions onto the joint constraints (motorized joints held at their
/// loaded coordinate), using only the independent rows. What the dependent
/// rows still violate afterwards is genuine inconsistency of the model; if it
/// exceeds `tolerance` the model cannot be initialized.
inline InitializationReport consistent_initialization(Simulation& sim, double tolerance,
                                                      int max_iterations = 30) {
  SceneModel& scene = sim.scene();
  const BodyIndex& index = sim.index();
  const double dt = sim.config().dt;
  std::vector<double> held(scene.joints.size(), 0.0);
  for (std::size_t ji = 0; ji < scene.joints.size(); ++ji) {
    held[ji] = joint_coordinate(scene.joints[ji], joint_geometry(scene.joints[ji], scene.bodies, index));
  }
  InitializationReport report;
  for (int it = 0; it < max_iterations; ++it) {
    std::vector<ConstraintRow> rows;
    const StabilizationParams params{0.0, 0.0};
    for (std::size_t ji = 0; ji < scene.joints.size(); ++ji) {
      const Joint& j = scene.joints[ji];
      auto jr = joint_rows(j, scene.bodies, index, dt, params, static_cast<int>(ji));
      rows.insert(rows.end(), jr.begin(), jr.end());
      if (j.motor && (j.kind == JointKind::Revolute || j.kind == JointKind::Prismatic)) {
        const JointGeometry g = joint_geometry(j, scene.bodies, index);
        ConstraintRow lock = detail::free_axis_row(j, g, static_cast<int>(ji), 5);
        lock.error = joint_coordinate(j, g) - held[ji];
        rows.push_back(lock);
      }
    }
    const MassOperator mass(scene.bodies);
    ConstraintSystem sys(rows, mass, dt);
    const RedundancyResult red = detect_redundant(sys, sim.config().rank_tolerance);
    report.rank = red.rank;
    report.dropped = static_cast<int>(red.dropped.size());
    std::vector<ConstraintRow> kept;
    double worst = 0.0;
    for (int k : red.kept) {
      kept.push_back(rows[k]);
      worst = std::max(worst, std::abs(rows[k].error));
    }
    report.iterations = it;
    if (worst < 1e-14) break;
    ConstraintSystem reduced(kept, mass, dt);
    const auto nk = static_cast<Eigen::Index>(kept.size());
    VecX c(nk);
    for (Eigen::Index k = 0; k < nk; ++k) c[k] = -kept[k].error;
    const VecX mu = reduced.dense(false).ldlt().solve(c);
    const std::vector<Vec6> dq = reduced.impulses(mu);
    for (std::size_t bi = 0; bi < scene.bodies.size(); ++bi) {
      RigidBody& b = scene.bodies[bi];
      if (b.is_static) continue;
      const Vec6 step = mass.apply_inverse_block(bi, dq[bi]);
      b.pose.position += step.head<3>();
      b.pose.orientation = normalized(quat_exp(step.tail<3>()) * b.pose.orientation);
    }
    report.iterations = it + 1;
  }
  const ViolationReport v = sim.violation();
  report.residual_position = v.max_position;
  report.residual_angle = v.max_angle;
  if (!(v.max_position <= tolerance) || !(v.max_angle <= tolerance)) {
    throw Error(ErrorKind::InconsistentInitialConditions,
                "constraint residual " + std::to_string(v.max_position) + " m / " +
                    std::to_string(v.max_angle) + " rad exceeds consistency tolerance " +
                    std::to_string(tolerance),
                0);
  }
  return report;
}

}  // namespace loopdyn
