#pragma once

// Built-in benchmark scenes. Each generator emits a chained_frame document
// (bodies placed by walking the chain, joints at named body frames); the
// world_frame variant is its exact conversion. All linkages are planar in x-z
// with hinge axes along y and gravity along -z.
//
// The crane analog is synthetic: the real crane geometry is unpublished, so
// its dimensions are invented. Only the topology is matched: 21 bodies (3 of
// them fixed ground parts), 27 joints (25 revolute, 2 prismatic actuators),
// 9 independent loops, one free-spinning winch drum.

#include <loopdyn/scene_io.hpp>

#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <vector>

namespace loopdyn {

namespace scenes {

/// Builds chained_frame documents from world-space points. All body frames
/// are world-aligned, so relative placements are plain differences.
class ChainBuilder {
 public:
  explicit ChainBuilder(std::string name) {
    doc_["version"] = kSceneVersion;
    doc_["convention"] = "chained_frame";
    doc_["name"] = std::move(name);
    doc_["gravity"] = io::to_json(Vec3(0.0, 0.0, -9.81));
    doc_["bodies"] = json::array();
    doc_["joints"] = json::array();
  }

  struct BodySpec {
    std::string id;
    double mass = 0.0;  // 0 with is_static
    Mat3 inertia = Mat3::Identity();
    std::string predecessor{kWorld};
    std::string predecessor_frame = "b";
    Vec3 a = Vec3::Zero();
    Vec3 b = Vec3::Zero();
    std::map<std::string, Vec3> extras;
    std::optional<Vec3> com;  // default: midpoint of a and b
    bool is_static = false;
  };

  void body(const BodySpec& s) {
    json jb;
    jb["id"] = s.id;
    if (s.is_static) {
      jb["static"] = true;
    } else {
      jb["mass"] = s.mass;
      jb["inertia"] = io::to_json(s.inertia);
    }
    Vec3 rel = s.a;
    if (s.predecessor != kWorld) {
      jb["predecessor"] = s.predecessor;
      jb["predecessor_frame"] = s.predecessor_frame;
      rel = s.a - frames_.at(s.predecessor).at(s.predecessor_frame);
    }
    jb["frame_a"] = {{"position", io::to_json(rel)}};
    jb["r_ab"] = io::to_json(Vec3(s.b - s.a));
    if (!s.extras.empty()) {
      json fr = json::object();
      for (const auto& [name, p] : s.extras) fr[name] = io::to_json(Vec3(p - s.a));
      jb["frames"] = fr;
    }
    const Vec3 com = s.com ? *s.com : Vec3(0.5 * (s.a + s.b));
    jb["com"] = io::to_json(Vec3(com - s.a));
    auto& f = frames_[s.id];
    f["a"] = s.a;
    f["b"] = s.b;
    for (const auto& [name, p] : s.extras) f[name] = p;
    doc_["bodies"].push_back(jb);
  }

  void joint(const std::string& id, JointKind kind, const std::string& parent,
             const std::string& parent_frame, const std::string& child, const std::string& child_frame,
             const Vec3& axis = Vec3::UnitY(), std::optional<MotorParams> motor = std::nullopt,
             double damping = 0.0) {
    json jj{{"id", id},
            {"kind", std::string(to_string(kind))},
            {"parent", parent},
            {"child", child},
            {"child_frame", child_frame},
            {"axis", io::to_json(axis)}};
    if (parent == kWorld) {
      jj["parent_frame"] = {{"position", io::to_json(world_points_.at(parent_frame))}};
    } else {
      jj["parent_frame"] = parent_frame;
    }
    if (motor) jj["motor"] = io::motor_to_json(*motor);
    if (damping > 0.0) jj["damping"] = damping;
    doc_["joints"].push_back(jj);
  }

  void ground_point(const std::string& name, const Vec3& p) { world_points_[name] = p; }

  void actuation(const std::string& joint, std::vector<std::pair<double, double>> schedule) {
    doc_["actuation"].push_back({{"joint", joint}, {"schedule", json::array()}});
    for (const auto& [t, v] : schedule) doc_["actuation"].back()["schedule"].push_back({t, v});
  }

  const Vec3& point(const std::string& body, const std::string& frame) const {
    return frames_.at(body).at(frame);
  }

  json& document() { return doc_; }

 private:
  json doc_;
  std::map<std::string, std::map<std::string, Vec3>> frames_;
  std::map<std::string, Vec3> world_points_;
};

/// Slender bar inertia about its COM (small radial term keeps it positive definite).
inline Mat3 bar_inertia(double mass, const Vec3& a, const Vec3& b) {
  const Vec3 d = b - a;
  const double len = d.norm();
  const Vec3 u = d / len;
  const double radial = 1e-3 * mass;
  return mass * len * len / 12.0 * (Mat3::Identity() - u * u.transpose()) + radial * Mat3::Identity();
}

inline Mat3 cylinder_inertia(double mass, double radius, double length) {
  const double axial = 0.5 * mass * radius * radius;
  const double transverse = mass * (3.0 * radius * radius + length * length) / 12.0;
  return Vec3(transverse, axial, transverse).asDiagonal();  // axis along y
}

inline ChainBuilder::BodySpec bar(const std::string& id, double mass, const std::string& pred,
                                  const std::string& pred_frame, const Vec3& a, const Vec3& b,
                                  std::map<std::string, Vec3> extras = {}) {
  ChainBuilder::BodySpec s;
  s.id = id;
  s.mass = mass;
  s.inertia = bar_inertia(mass, a, b);
  s.predecessor = pred;
  s.predecessor_frame = pred_frame;
  s.a = a;
  s.b = b;
  s.extras = std::move(extras);
  return s;
}

inline ChainBuilder::BodySpec ground(const std::string& id, const Vec3& a, const Vec3& b,
                                     std::map<std::string, Vec3> extras = {}) {
  ChainBuilder::BodySpec s;
  s.id = id;
  s.is_static = true;
  s.a = a;
  s.b = b;
  s.extras = std::move(extras);
  return s;
}

}  // namespace scenes

/// Single hanging pendulum: 1 kg bob 1 m below a y-axis hinge at the origin.
inline json pendulum_document() {
  scenes::ChainBuilder cb("pendulum");
  auto s = scenes::bar("bob", 1.0, std::string(kWorld), "", Vec3::Zero(), Vec3(0, 0, -1));
  s.com = Vec3(0, 0, -1);
  s.inertia = Vec3(1e-3, 1e-3, 1e-3).asDiagonal();
  cb.body(s);
  cb.ground_point("pivot", Vec3::Zero());
  cb.joint("pivot", JointKind::Revolute, std::string(kWorld), "pivot", "bob", "a");
  return cb.document();
}

/// Open chain of two links; no loops.
inline json double_pendulum_document() {
  scenes::ChainBuilder cb("double_pendulum");
  const Vec3 o(0, 0, 0), p1(0.5, 0, -0.5), p2(1.0, 0, -1.0);
  cb.body(scenes::bar("upper", 1.0, std::string(kWorld), "", o, p1));
  cb.body(scenes::bar("lower", 1.0, "upper", "b", p1, p2));
  cb.ground_point("o", o);
  cb.joint("shoulder", JointKind::Revolute, std::string(kWorld), "o", "upper", "a");
  cb.joint("elbow", JointKind::Revolute, "upper", "b", "lower", "a");
  return cb.document();
}

struct FourBarParams {
  double ground = 0.6;     // distance between ground pivots, m
  double link = 0.5;       // crank and rocker length, m
  double release = 5.0;    // initial swing from vertical, degrees
};

/// Hanging parallelogram four-bar: crank and rocker hang from two ground
/// pivots and carry the coupler. Spatially modeled with 4 revolute joints on
/// 3 moving bodies: 20 constraint rows of which 3 are redundant.
inline json four_bar_document(const FourBarParams& p = {}) {
  scenes::ChainBuilder cb("four_bar");
  const double th = p.release * std::numbers::pi / 180.0;
  const Vec3 o1(0, 0, 0), o2(p.ground, 0, 0);
  const Vec3 hang(p.link * std::sin(th), 0, -p.link * std::cos(th));
  const Vec3 a = o1 + hang, b = o2 + hang;
  cb.body(scenes::bar("crank", 1.0, std::string(kWorld), "", o1, a));
  cb.body(scenes::bar("coupler", 2.0, "crank", "b", a, b));
  cb.body(scenes::bar("rocker", 1.0, "coupler", "b", b, o2));
  cb.ground_point("o1", o1);
  cb.ground_point("o2", o2);
  cb.joint("ground_crank", JointKind::Revolute, std::string(kWorld), "o1", "crank", "a");
  cb.joint("crank_coupler", JointKind::Revolute, "crank", "b", "coupler", "a");
  cb.joint("coupler_rocker", JointKind::Revolute, "coupler", "b", "rocker", "a");
  cb.joint("rocker_ground", JointKind::Revolute, std::string(kWorld), "o2", "rocker", "b");
  return cb.document();
}

/// Straight chain of `links` collinear links from the origin along +x, closed
/// back to a ground point at the chain's end. Fixture for error accumulation.
inline json straight_chain_document(int links, double length = 0.5) {
  scenes::ChainBuilder cb("straight_chain");
  std::string pred{kWorld};
  for (int i = 0; i < links; ++i) {
    const std::string id = "link" + std::to_string(i);
    const Vec3 a(i * length, 0, 0), b((i + 1) * length, 0, 0);
    cb.body(scenes::bar(id, 1.0, pred, "b", a, b));
    pred = id;
  }
  cb.ground_point("start", Vec3::Zero());
  cb.ground_point("end", Vec3(links * length, 0, 0));
  cb.joint("j0", JointKind::Revolute, std::string(kWorld), "start", "link0", "a");
  for (int i = 1; i < links; ++i) {
    cb.joint("j" + std::to_string(i), JointKind::Revolute, "link" + std::to_string(i - 1), "b",
             "link" + std::to_string(i), "a");
  }
  cb.joint("closure", JointKind::Revolute, std::string(kWorld), "end", pred, "b");
  return cb.document();
}

struct CylinderParams {
  double mass = 2.0;
  double radius = std::sqrt(0.5);  // axial inertia m r^2 / 2 = 0.5
  double length = 0.4;
  double damping = 0.0;
  double spin = 0.0;  // initial angular velocity about the hinge, rad/s
};

/// Cylinder hinged to the ground through its own COM along its symmetry axis:
/// no applied torque about the hinge, so the hinge-axis reaction is undetermined.
inline json equilibrium_cylinder_document(const CylinderParams& p = {}) {
  scenes::ChainBuilder cb("equilibrium_cylinder");
  scenes::ChainBuilder::BodySpec s;
  s.id = "cylinder";
  s.mass = p.mass;
  s.inertia = scenes::cylinder_inertia(p.mass, p.radius, p.length);
  s.a = Vec3(0, 0, 1);
  s.b = Vec3(0, p.length, 1);
  s.com = Vec3(0, 0, 1);
  cb.body(s);
  cb.ground_point("hinge", Vec3(0, 0, 1));
  cb.joint("hinge", JointKind::Revolute, std::string(kWorld), "hinge", "cylinder", "a", Vec3::UnitY(),
           std::nullopt, p.damping);
  json& doc = cb.document();
  if (p.spin != 0.0) doc["bodies"][0]["angular_velocity"] = io::to_json(Vec3(0, p.spin, 0));
  return doc;
}

struct CraneParams {
  double actuator_speed = 0.05;   // m/s, plateau of the velocity schedule
  double ramp = 0.2;              // s
  double hold = 0.6;              // s at plateau
  double actuator_force = 5e4;    // N
  double winch_damping = 0.02;    // N·m·s
};

inline constexpr const char* kCraneCriticalJoint = "main_base";

/// Multi-loop crane analog. Three stacked parallel-bar stages, each with a
/// redundant third bar, two hydraulic-style actuators (barrel + rod with a
/// driven prismatic joint), a braced hanging tool and a winch drum.
inline json crane_analog_document(const CraneParams& p = {}) {
  using scenes::bar;
  using scenes::ground;
  scenes::ChainBuilder cb("crane_analog");
  const std::string W{kWorld};

  const Vec3 g1(0, 0, 1.0), g2(0, 0, 1.4), g3(0, 0, 1.8);
  const Vec3 h1(2.0, 0, 1.5), h2(2.0, 0, 1.9), h3(2.0, 0, 2.3);
  const Vec3 h4(2.2, 0, 1.7), h5(2.2, 0, 2.1), h6(2.2, 0, 2.5);
  const Vec3 t1(4.0, 0, 1.7), t2(4.0, 0, 2.1), t3(4.0, 0, 2.5);
  const Vec3 t4(4.2, 0, 1.3), t5(4.6, 0, 1.3), t6(5.0, 0, 1.3), t7(5.4, 0, 1.3);
  const Vec3 u1(4.2, 0, 0.7), u2(4.6, 0, 0.7), u3(5.0, 0, 0.7), u4(4.4, 0, 0.7);
  const Vec3 base1(0.6, 0, 0.3), d1(1.0, 0, 1.25), winch(1.5, 0, 1.375);
  const Vec3 base2(2.0, 0, 2.7), d2(3.1, 0, 1.7);
  const Vec3 s1 = 0.5 * (base1 + d1), s2 = 0.5 * (base2 + d2);

  // ground parts
  cb.body(ground("column", Vec3::Zero(), g1, {{"g2", g2}}));
  cb.body(ground("bracket", Vec3(0, 0, 1.6), g3));
  cb.body(ground("chassis", Vec3(0.6, 0, 0), base1));

  // stage A: main arm, parallel bars, head, lift actuator
  cb.body(bar("main_arm", 20.0, "column", "b", g1, h1, {{"d1", d1}, {"winch", winch}}));
  cb.body(bar("bar_a1", 5.0, "column", "g2", g2, h2));
  cb.body(bar("bar_a2", 5.0, "bracket", "b", g3, h3));
  cb.body(bar("head", 8.0, "main_arm", "b", h1, h3,
              {{"h2", h2}, {"h4", h4}, {"h5", h5}, {"h6", h6}, {"base2", base2}}));
  cb.body(bar("lift_barrel", 3.0, "chassis", "b", base1, s1));
  cb.body(bar("lift_rod", 2.0, "lift_barrel", "b", s1, d1));

  // stage B: front arm, parallel bars, tip bracket, reach actuator
  cb.body(bar("front_arm", 10.0, "head", "h4", h4, t1, {{"d2", d2}}));
  cb.body(bar("bar_b1", 3.0, "head", "h5", h5, t2));
  cb.body(bar("bar_b2", 3.0, "head", "h6", h6, t3));
  cb.body(bar("tip", 4.0, "front_arm", "b", t1, t3,
              {{"t2", t2}, {"t4", t4}, {"t5", t5}, {"t6", t6}, {"t7", t7}}));
  cb.body(bar("reach_barrel", 2.0, "head", "base2", base2, s2));
  cb.body(bar("reach_rod", 1.5, "reach_barrel", "b", s2, d2));

  // stage C: hanging tool on three parallel hangers, braced
  cb.body(bar("hanger_1", 1.0, "tip", "t4", t4, u1));
  cb.body(bar("hanger_2", 1.0, "tip", "t5", t5, u2));
  cb.body(bar("hanger_3", 1.0, "tip", "t6", t6, u3));
  cb.body(bar("tool", 6.0, "hanger_1", "b", u1, u3, {{"u2", u2}, {"u4", u4}}));
  cb.body(bar("brace", 1.0, "tip", "t7", t7, u4));

  // winch drum, spinning about its own axis through its COM
  scenes::ChainBuilder::BodySpec drum;
  drum.id = "winch_drum";
  drum.mass = 4.0;
  drum.inertia = scenes::cylinder_inertia(4.0, 0.15, 0.3);
  drum.predecessor = "main_arm";
  drum.predecessor_frame = "winch";
  drum.a = winch;
  drum.b = winch + Vec3(0, 0.15, 0);
  drum.com = winch;
  cb.body(drum);

  const Vec3 lift_axis = (d1 - base1).normalized();
  const Vec3 reach_axis = (d2 - base2).normalized();
  MotorParams drive;
  drive.mode = MotorMode::VelocityDrive;
  drive.max_force = p.actuator_force;

  const auto R = JointKind::Revolute;
  cb.joint(kCraneCriticalJoint, R, "column", "b", "main_arm", "a");
  cb.joint("bar_a1_base", R, "column", "g2", "bar_a1", "a");
  cb.joint("bar_a2_base", R, "bracket", "b", "bar_a2", "a");
  cb.joint("main_head", R, "main_arm", "b", "head", "a");
  cb.joint("bar_a1_head", R, "bar_a1", "b", "head", "h2");
  cb.joint("bar_a2_head", R, "bar_a2", "b", "head", "b");
  cb.joint("lift_base", R, "chassis", "b", "lift_barrel", "a");
  cb.joint("lift_slide", JointKind::Prismatic, "lift_barrel", "b", "lift_rod", "a", lift_axis, drive);
  cb.joint("lift_arm", R, "lift_rod", "b", "main_arm", "d1");

  cb.joint("head_front", R, "head", "h4", "front_arm", "a");
  cb.joint("bar_b1_head", R, "head", "h5", "bar_b1", "a");
  cb.joint("bar_b2_head", R, "head", "h6", "bar_b2", "a");
  cb.joint("front_tip", R, "front_arm", "b", "tip", "a");
  cb.joint("bar_b1_tip", R, "bar_b1", "b", "tip", "t2");
  cb.joint("bar_b2_tip", R, "bar_b2", "b", "tip", "b");
  cb.joint("reach_base", R, "head", "base2", "reach_barrel", "a");
  cb.joint("reach_slide", JointKind::Prismatic, "reach_barrel", "b", "reach_rod", "a", reach_axis, drive);
  cb.joint("reach_arm", R, "reach_rod", "b", "front_arm", "d2");

  cb.joint("tip_hanger_1", R, "tip", "t4", "hanger_1", "a");
  cb.joint("tip_hanger_2", R, "tip", "t5", "hanger_2", "a");
  cb.joint("tip_hanger_3", R, "tip", "t6", "hanger_3", "a");
  cb.joint("hanger_1_tool", R, "hanger_1", "b", "tool", "a");
  cb.joint("hanger_2_tool", R, "hanger_2", "b", "tool", "u2");
  cb.joint("hanger_3_tool", R, "hanger_3", "b", "tool", "b");
  cb.joint("tip_brace", R, "tip", "t7", "brace", "a");
  cb.joint("brace_tool", R, "brace", "b", "tool", "u4");

  cb.joint("winch", R, "main_arm", "winch", "winch_drum", "a", Vec3::UnitY(), std::nullopt,
           p.winch_damping);

  const double r0 = p.ramp, r1 = p.ramp + p.hold, r2 = 2.0 * p.ramp + p.hold;
  cb.actuation("lift_slide", {{0.0, 0.0}, {r0, p.actuator_speed}, {r1, p.actuator_speed}, {r2, 0.0}});
  cb.actuation("reach_slide", {{0.0, 0.0}, {r0, -p.actuator_speed}, {r1, -p.actuator_speed}, {r2, 0.0}});
  return cb.document();
}

inline const std::vector<std::string>& generator_names() {
  static const std::vector<std::string> names{"pendulum", "double_pendulum", "four_bar", "crane_analog",
                                              "equilibrium_cylinder", "straight_chain"};
  return names;
}

/// Document for a named generator; `params` overrides defaults.
inline json generate_document(const std::string& name, const json& params = json::object()) {
  auto num = [&](const char* key, double def) {
    return params.contains(key) ? io::number(params[key], std::string("/params/") + key) : def;
  };
  if (name == "pendulum") return pendulum_document();
  if (name == "double_pendulum") return double_pendulum_document();
  if (name == "four_bar") {
    FourBarParams p;
    p.ground = num("ground", p.ground);
    p.link = num("link", p.link);
    p.release = num("release_deg", p.release);
    return four_bar_document(p);
  }
  if (name == "crane_analog") {
    CraneParams p;
    p.actuator_speed = num("actuator_speed", p.actuator_speed);
    p.ramp = num("ramp", p.ramp);
    p.hold = num("hold", p.hold);
    p.actuator_force = num("actuator_force", p.actuator_force);
    p.winch_damping = num("winch_damping", p.winch_damping);
    return crane_analog_document(p);
  }
  if (name == "equilibrium_cylinder") {
    CylinderParams p;
    p.damping = num("damping", p.damping);
    p.spin = num("spin", p.spin);
    return equilibrium_cylinder_document(p);
  }
  if (name == "straight_chain") {
    return straight_chain_document(static_cast<int>(num("links", 4)), num("length", 0.5));
  }
  throw Error(ErrorKind::ConfigError, "unknown scene generator '" + name + "'");
}

/// Generated document in the requested convention.
inline json generate_document(const std::string& name, Convention convention,
                              const json& params = json::object()) {
  json doc = generate_document(name, params);
  return convention == Convention::ChainedFrame ? doc : chained_to_world(doc);
}

}  // namespace loopdyn
