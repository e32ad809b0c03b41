#pragma once

// Joints as velocity-level constraint rows. Every row is the exact time
// derivative of a position-level function C(q): J·[v_a ω_a v_b ω_b] = dC/dt.
// Baumgarte feedback enters through the bias, -(β/dt)·C.

#include <loopdyn/body.hpp>
#include <loopdyn/error.hpp>
#include <loopdyn/math.hpp>

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace loopdyn {

inline constexpr std::string_view kWorld = "world";
inline constexpr int kWorldIndex = -1;

enum class JointKind { Revolute, Prismatic, Spherical, Fixed };

inline std::string_view to_string(JointKind k) {
  switch (k) {
    case JointKind::Revolute: return "revolute";
    case JointKind::Prismatic: return "prismatic";
    case JointKind::Spherical: return "spherical";
    case JointKind::Fixed: return "fixed";
  }
  return "?";
}

inline std::optional<JointKind> joint_kind_from_string(std::string_view s) {
  if (s == "revolute") return JointKind::Revolute;
  if (s == "prismatic") return JointKind::Prismatic;
  if (s == "spherical") return JointKind::Spherical;
  if (s == "fixed") return JointKind::Fixed;
  return std::nullopt;
}

/// Number of constrained directions (6 minus the joint's DOF).
inline int constraint_dimension(JointKind k) {
  switch (k) {
    case JointKind::Revolute: return 5;
    case JointKind::Prismatic: return 5;
    case JointKind::Spherical: return 3;
    case JointKind::Fixed: return 6;
  }
  return 0;
}

inline int joint_dof(JointKind k) { return 6 - constraint_dimension(k); }

enum class MotorMode { VelocityDrive, PositionDrive };

struct MotorParams {
  MotorMode mode = MotorMode::VelocityDrive;
  double target = 0.0;     // rad/s or m/s; rad or m in position mode
  double max_force = 0.0;  // N or N·m
  double kp = 0.0;         // 1/s², position mode
  double kd = 0.0;         // 1/s, position mode
};

struct Joint {
  std::string id;
  JointKind kind = JointKind::Revolute;
  std::string parent{kWorld};
  std::string child;
  Pose anchor_parent;  // joint frame in the parent body frame
  Pose anchor_child;   // joint frame in the child body frame
  Vec3 axis = Vec3::UnitZ();  // joint frame
  std::optional<MotorParams> motor;
  double damping = 0.0;
};

struct StabilizationParams {
  double beta = 0.2;
  double cfm = 1e-9;
};

enum class RowRole { Joint, Motor, Damping, FreeAxis };

struct ConstraintRow {
  int body_a = kWorldIndex;
  int body_b = kWorldIndex;
  Vec6 jac_a = Vec6::Zero();
  Vec6 jac_b = Vec6::Zero();
  double bias = 0.0;
  double cfm = 0.0;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  double lambda = 0.0;

  // bookkeeping
  int joint = -1;
  int index = 0;  // row index within the joint
  RowRole role = RowRole::Joint;
  double error = 0.0;  // position-level C of this row
};

using BodyIndex = std::unordered_map<std::string, int>;

inline BodyIndex make_body_index(std::span<const RigidBody> bodies) {
  BodyIndex idx;
  for (std::size_t i = 0; i < bodies.size(); ++i) idx.emplace(bodies[i].id, static_cast<int>(i));
  return idx;
}

inline int resolve_body(const BodyIndex& index, const std::string& id) {
  if (id == kWorld) return kWorldIndex;
  auto it = index.find(id);
  if (it == index.end()) throw Error(ErrorKind::UnknownBody, "unknown body '" + id + "'");
  return it->second;
}

/// World-space quantities of a joint at the current state.
struct JointGeometry {
  int a = kWorldIndex;
  int b = kWorldIndex;
  Vec3 com_a = Vec3::Zero();
  Vec3 com_b = Vec3::Zero();
  Pose frame_a;  // joint frame carried by the parent
  Pose frame_b;  // joint frame carried by the child
  Vec3 ra = Vec3::Zero();  // anchor offsets from COM, world
  Vec3 rb = Vec3::Zero();
  Vec3 axis_local = Vec3::UnitZ();

  Vec3 axis_a() const { return frame_a.orientation * axis_local; }
  Vec3 axis_b() const { return frame_b.orientation * axis_local; }
  Vec3 gap() const { return frame_b.position - frame_a.position; }

  /// Relative rotation of the child frame in the parent frame, w ≥ 0.
  Quat relative_rotation() const {
    Quat q = normalized(frame_a.orientation.conjugate() * frame_b.orientation);
    if (q.w() < 0.0) q.coeffs() = -q.coeffs();
    return q;
  }
};

inline JointGeometry joint_geometry(const Joint& joint, std::span<const RigidBody> bodies,
                                    const BodyIndex& index) {
  JointGeometry g;
  g.a = resolve_body(index, joint.parent);
  g.b = resolve_body(index, joint.child);
  g.axis_local = joint.axis.normalized();
  const Pose world_pose{};
  const Pose& pa = g.a == kWorldIndex ? world_pose : bodies[g.a].pose;
  const Pose& pb = g.b == kWorldIndex ? world_pose : bodies[g.b].pose;
  g.com_a = pa.position;
  g.com_b = pb.position;
  g.frame_a = pa.compose(joint.anchor_parent);
  g.frame_b = pb.compose(joint.anchor_child);
  g.ra = g.frame_a.position - g.com_a;
  g.rb = g.frame_b.position - g.com_b;
  return g;
}

namespace detail {

inline ConstraintRow make_row(const JointGeometry& g, int joint_index, int row_index,
                              const Vec3& lin_a, const Vec3& ang_a, const Vec3& lin_b,
                              const Vec3& ang_b, double error) {
  ConstraintRow r;
  r.body_a = g.a;
  r.body_b = g.b;
  r.jac_a << lin_a, ang_a;
  r.jac_b << lin_b, ang_b;
  r.joint = joint_index;
  r.index = row_index;
  r.error = error;
  return r;
}

inline void point_rows(const JointGeometry& g, int joint_index, std::vector<ConstraintRow>& out) {
  const Vec3 gap = g.gap();
  for (int k = 0; k < 3; ++k) {
    const Vec3 e = Vec3::Unit(k);
    out.push_back(make_row(g, joint_index, static_cast<int>(out.size()), -e, -g.ra.cross(e), e,
                           g.rb.cross(e), gap[k]));
  }
}

// Axis alignment: C_k = t_k · a_child with t_k fixed in the parent joint frame.
inline void axis_rows(const JointGeometry& g, int joint_index, std::vector<ConstraintRow>& out) {
  const auto [t1_local, t2_local] = orthonormal_complement(g.axis_local);
  const Vec3 ac = g.axis_b();
  for (const Vec3& tl : {t1_local, t2_local}) {
    const Vec3 t = g.frame_a.orientation * tl;
    const Vec3 w = ac.cross(t);
    out.push_back(make_row(g, joint_index, static_cast<int>(out.size()), Vec3::Zero(), -w,
                           Vec3::Zero(), w, t.dot(ac)));
  }
}

// Orientation lock: C = 2·vec(q_rel) in the parent joint frame.
inline void orientation_rows(const JointGeometry& g, int joint_index,
                             std::vector<ConstraintRow>& out) {
  const Quat q = g.relative_rotation();
  const Mat3 map = g.frame_a.rotation() * (q.w() * Mat3::Identity() + skew(q.vec()));
  for (int k = 0; k < 3; ++k) {
    const Vec3 w = map.col(k);
    out.push_back(make_row(g, joint_index, static_cast<int>(out.size()), Vec3::Zero(), -w,
                           Vec3::Zero(), w, 2.0 * q.vec()[k]));
  }
}

// Transverse translation: C_k = t_k · (p_b - p_a) with t_k fixed in the parent joint frame.
inline void transverse_rows(const JointGeometry& g, int joint_index,
                            std::vector<ConstraintRow>& out) {
  const auto [t1_local, t2_local] = orthonormal_complement(g.axis_local);
  const Vec3 d = g.gap();
  const Vec3 lever_a = g.frame_b.position - g.com_a;
  for (const Vec3& tl : {t1_local, t2_local}) {
    const Vec3 t = g.frame_a.orientation * tl;
    out.push_back(make_row(g, joint_index, static_cast<int>(out.size()), -t, t.cross(lever_a), t,
                           g.rb.cross(t), t.dot(d)));
  }
}

// Row measuring the relative rate along the joint's free axis.
inline ConstraintRow free_axis_row(const Joint& joint, const JointGeometry& g, int joint_index,
                                   int row_index) {
  const Vec3 a = g.axis_a();
  if (joint.kind == JointKind::Revolute) {
    return make_row(g, joint_index, row_index, Vec3::Zero(), -a, Vec3::Zero(), a, 0.0);
  }
  const Vec3 lever_a = g.frame_b.position - g.com_a;
  return make_row(g, joint_index, row_index, -a, a.cross(lever_a), a, g.rb.cross(a), 0.0);
}

inline double rate_along(const ConstraintRow& r, std::span<const RigidBody> bodies) {
  double rate = 0.0;
  if (r.body_a != kWorldIndex) {
    const auto& t = bodies[r.body_a].twist;
    rate += r.jac_a.head<3>().dot(t.linear) + r.jac_a.tail<3>().dot(t.angular);
  }
  if (r.body_b != kWorldIndex) {
    const auto& t = bodies[r.body_b].twist;
    rate += r.jac_b.head<3>().dot(t.linear) + r.jac_b.tail<3>().dot(t.angular);
  }
  return rate;
}

}  // namespace detail

/// Joint coordinate along the free axis: angle (rad) for revolute joints,
/// slide (m) for prismatic joints, 0 otherwise.
inline double joint_coordinate(const Joint& joint, const JointGeometry& g) {
  if (joint.kind == JointKind::Revolute) {
    const Quat q = g.relative_rotation();
    return 2.0 * std::atan2(q.vec().dot(g.axis_local), q.w());
  }
  if (joint.kind == JointKind::Prismatic) return g.axis_a().dot(g.gap());
  return 0.0;
}

inline std::vector<ConstraintRow> joint_rows(const Joint& joint, std::span<const RigidBody> bodies,
                                             const BodyIndex& index, double dt,
                                             const StabilizationParams& params,
                                             int joint_index = -1) {
  const JointGeometry g = joint_geometry(joint, bodies, index);
  std::vector<ConstraintRow> rows;
  rows.reserve(6);
  switch (joint.kind) {
    case JointKind::Revolute:
      detail::point_rows(g, joint_index, rows);
      detail::axis_rows(g, joint_index, rows);
      break;
    case JointKind::Prismatic:
      detail::orientation_rows(g, joint_index, rows);
      detail::transverse_rows(g, joint_index, rows);
      break;
    case JointKind::Spherical:
      detail::point_rows(g, joint_index, rows);
      break;
    case JointKind::Fixed:
      detail::point_rows(g, joint_index, rows);
      detail::orientation_rows(g, joint_index, rows);
      break;
  }
  for (auto& r : rows) {
    r.bias = -(params.beta / dt) * r.error;
    r.cfm = params.cfm;
  }
  return rows;
}

inline std::vector<ConstraintRow> motor_rows(const Joint& joint, std::span<const RigidBody> bodies,
                                             const BodyIndex& index, double dt,
                                             int joint_index = -1, int row_index = 0) {
  if (!joint.motor) return {};
  if (joint.kind != JointKind::Revolute && joint.kind != JointKind::Prismatic) {
    throw Error(ErrorKind::MotorOnUnsupportedJoint,
                "joint '" + joint.id + "' of kind " + std::string(to_string(joint.kind)) +
                    " cannot carry a motor");
  }
  const MotorParams& m = *joint.motor;
  const JointGeometry g = joint_geometry(joint, bodies, index);
  ConstraintRow row = detail::free_axis_row(joint, g, joint_index, row_index);
  row.role = RowRole::Motor;
  if (m.mode == MotorMode::VelocityDrive) {
    row.bias = m.target;
  } else {
    const double rate = detail::rate_along(row, bodies);
    const double pos = joint_coordinate(joint, g);
    row.bias = rate + dt * (m.kp * (m.target - pos) - m.kd * rate);
  }
  row.cfm = 0.0;
  row.lo = -m.max_force * dt;
  row.hi = m.max_force * dt;
  return {row};
}

/// Viscous joint damping as a regularized row: with cfm = 1/d the solved
/// impulse equals -d·dt·(relative rate after the step).
inline std::vector<ConstraintRow> damping_rows(const Joint& joint,
                                               std::span<const RigidBody> bodies,
                                               const BodyIndex& index, double /*dt*/,
                                               int joint_index = -1, int row_index = 0) {
  if (!(joint.damping > 0.0)) return {};
  if (joint.kind != JointKind::Revolute && joint.kind != JointKind::Prismatic) return {};
  const JointGeometry g = joint_geometry(joint, bodies, index);
  ConstraintRow row = detail::free_axis_row(joint, g, joint_index, row_index);
  row.role = RowRole::Damping;
  row.bias = 0.0;
  row.cfm = 1.0 / joint.damping;
  return {row};
}

/// A hinge whose free axis carries nothing that determines its motion: no
/// motor, no damping, axis through the child's centre of mass along a
/// principal axis, and the child attached by this joint alone. The
/// homogeneous equation along that axis has a zero coefficient; it is
/// emitted as an all-zero row so direct factorization sees the zero pivot.
inline bool has_indeterminate_axis(const Joint& joint, std::span<const RigidBody> bodies,
                                   const BodyIndex& index, int child_joint_count) {
  if (joint.kind != JointKind::Revolute || joint.motor || joint.damping > 0.0) return false;
  if (child_joint_count != 1) return false;
  const JointGeometry g = joint_geometry(joint, bodies, index);
  if (g.b == kWorldIndex || bodies[g.b].is_static) return false;
  const RigidBody& child = bodies[g.b];
  const Vec3 a = g.axis_b();
  const Vec3 offset = child.pose.position - g.frame_b.position;
  const double scale = 1.0 + g.rb.norm();
  if ((offset - offset.dot(a) * a).norm() > 1e-9 * scale) return false;
  const Mat3 iw = world_inertia(child);
  const Vec3 ia = iw * a;
  return (ia - ia.dot(a) * a).norm() <= 1e-9 * iw.norm();
}

inline std::vector<ConstraintRow> indeterminate_axis_rows(const Joint& joint,
                                                          std::span<const RigidBody> bodies,
                                                          const BodyIndex& index, double cfm,
                                                          int joint_index = -1,
                                                          int row_index = 0) {
  const JointGeometry g = joint_geometry(joint, bodies, index);
  ConstraintRow row;
  row.body_a = g.a;
  row.body_b = g.b;
  row.joint = joint_index;
  row.index = row_index;
  row.role = RowRole::FreeAxis;
  row.cfm = cfm;
  return {row};
}

struct JointViolation {
  double position_error = 0.0;  // m
  double angle_error = 0.0;     // rad
};

struct ViolationReport {
  std::vector<JointViolation> joints;
  double max_position = 0.0;
  double rms_position = 0.0;
  double max_angle = 0.0;
  double rms_angle = 0.0;
};

inline JointViolation joint_violation(const Joint& joint, const JointGeometry& g) {
  JointViolation v;
  switch (joint.kind) {
    case JointKind::Revolute: {
      v.position_error = g.gap().norm();
      const auto [t1l, t2l] = orthonormal_complement(g.axis_local);
      const Vec3 ac = g.axis_b();
      const double c1 = (g.frame_a.orientation * t1l).dot(ac);
      const double c2 = (g.frame_a.orientation * t2l).dot(ac);
      v.angle_error = std::hypot(c1, c2);
      break;
    }
    case JointKind::Prismatic: {
      const auto [t1l, t2l] = orthonormal_complement(g.axis_local);
      const Vec3 d = g.gap();
      v.position_error =
          std::hypot((g.frame_a.orientation * t1l).dot(d), (g.frame_a.orientation * t2l).dot(d));
      v.angle_error = 2.0 * g.relative_rotation().vec().norm();
      break;
    }
    case JointKind::Spherical:
      v.position_error = g.gap().norm();
      break;
    case JointKind::Fixed:
      v.position_error = g.gap().norm();
      v.angle_error = 2.0 * g.relative_rotation().vec().norm();
      break;
  }
  return v;
}

inline ViolationReport measure_violation(std::span<const Joint> joints,
                                         std::span<const RigidBody> bodies,
                                         const BodyIndex& index) {
  ViolationReport report;
  report.joints.reserve(joints.size());
  double sum_p = 0.0;
  double sum_a = 0.0;
  for (const auto& j : joints) {
    const JointViolation v = joint_violation(j, joint_geometry(j, bodies, index));
    report.joints.push_back(v);
    report.max_position = std::max(report.max_position, v.position_error);
    report.max_angle = std::max(report.max_angle, v.angle_error);
    sum_p += v.position_error * v.position_error;
    sum_a += v.angle_error * v.angle_error;
  }
  if (!joints.empty()) {
    report.rms_position = std::sqrt(sum_p / static_cast<double>(joints.size()));
    report.rms_angle = std::sqrt(sum_a / static_cast<double>(joints.size()));
  }
  return report;
}

}  // namespace loopdyn
