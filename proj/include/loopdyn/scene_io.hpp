#pragma once

// Scene documents (versioned JSON) in two modeling conventions:
//
//  * world_frame   - every body pose is given in world coordinates and each
//                    joint by a single world frame; anchors are resolved per
//                    body, so body placement errors never show up as joint gaps.
//  * chained_frame - bodies are placed by walking a chain: a body's frame A is
//                    given relative to its predecessor's frame, and frame B
//                    (plus any extra frames) by vectors resolved in frame A.
//                    Errors in those vectors accumulate along the chain and
//                    surface as gaps at loop-closing joints; the loader reports
//                    them and never corrects them.
//
// The schema is documented in docs/scene_format.md.

#include <loopdyn/body.hpp>
#include <loopdyn/error.hpp>
#include <loopdyn/joint.hpp>
#include <loopdyn/scene_model.hpp>

#include <nlohmann/json.hpp>

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace loopdyn {

using json = nlohmann::json;

inline constexpr int kSceneVersion = 1;

struct ClosureResidual {
  std::string joint;
  double residual = 0.0;  // m
};

struct LoadReport {
  Convention convention = Convention::WorldFrame;
  std::vector<ClosureResidual> closure;  // chained_frame: every joint gap at load
  double max_closure_residual = 0.0;

  json to_json() const {
    json j;
    j["convention"] = std::string(to_string(convention));
    j["max_closure_residual"] = max_closure_residual;
    j["closure"] = json::array();
    for (const auto& c : closure) j["closure"].push_back({{"joint", c.joint}, {"residual", c.residual}});
    return j;
  }
};

struct LoadedScene {
  SceneModel scene;
  LoadReport report;
};

namespace io {

[[noreturn]] inline void schema_error(const std::string& path, const std::string& msg) {
  throw Error(ErrorKind::SchemaError, path + ": " + msg);
}

inline const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) schema_error(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(path + "/" + key, "missing required field");
  return *it;
}

inline double number(const json& v, const std::string& path) {
  if (!v.is_number()) schema_error(path, "expected a number");
  return v.get<double>();
}

inline std::string string(const json& v, const std::string& path) {
  if (!v.is_string()) schema_error(path, "expected a string");
  return v.get<std::string>();
}

inline Vec3 vec3(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 3) schema_error(path, "expected an array of 3 numbers");
  return {number(v[0], path + "/0"), number(v[1], path + "/1"), number(v[2], path + "/2")};
}

inline Quat quat(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 4) schema_error(path, "expected [w, x, y, z]");
  Quat q(number(v[0], path + "/0"), number(v[1], path + "/1"), number(v[2], path + "/2"),
         number(v[3], path + "/3"));
  if (!(q.norm() > 0.0)) schema_error(path, "zero quaternion");
  return normalized(q);
}

inline Mat3 inertia(const json& v, const std::string& path) {
  if (v.is_array() && v.size() == 3 && v[0].is_number()) {
    return vec3(v, path).asDiagonal();
  }
  if (v.is_array() && v.size() == 3) {
    Mat3 m;
    for (int r = 0; r < 3; ++r) m.row(r) = vec3(v[r], path + "/" + std::to_string(r)).transpose();
    return m;
  }
  schema_error(path, "expected [Ixx, Iyy, Izz] or a 3x3 array");
}

inline Pose pose(const json& v, const std::string& path) {
  if (!v.is_object()) schema_error(path, "expected a pose object");
  Pose p;
  if (v.contains("position")) p.position = vec3(v["position"], path + "/position");
  if (v.contains("orientation")) p.orientation = quat(v["orientation"], path + "/orientation");
  return p;
}

inline json to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
inline json to_json(const Quat& q) { return json::array({q.w(), q.x(), q.y(), q.z()}); }
inline json to_json(const Pose& p) {
  return {{"position", to_json(p.position)}, {"orientation", to_json(p.orientation)}};
}
inline json to_json(const Mat3& m) {
  json rows = json::array();
  for (int r = 0; r < 3; ++r) rows.push_back(json::array({m(r, 0), m(r, 1), m(r, 2)}));
  return rows;
}

inline void check_header(const json& doc, Convention expected) {
  if (!doc.is_object()) schema_error("", "document must be an object");
  const json& version = require(doc, "version", "");
  if (!version.is_number_integer() || version.get<int>() != kSceneVersion) {
    schema_error("/version", "unsupported version (expected " + std::to_string(kSceneVersion) + ")");
  }
  const std::string conv = string(require(doc, "convention", ""), "/convention");
  if (conv != "world_frame" && conv != "chained_frame") {
    schema_error("/convention", "unknown convention '" + conv + "'");
  }
  if (conv != to_string(expected)) {
    schema_error("/convention", "expected '" + std::string(to_string(expected)) + "'");
  }
}

inline std::optional<MotorParams> motor(const json& j, const std::string& path) {
  if (!j.contains("motor") || j["motor"].is_null()) return std::nullopt;
  const json& m = j["motor"];
  const std::string mp = path + "/motor";
  MotorParams out;
  const std::string mode = string(require(m, "mode", mp), mp + "/mode");
  if (mode == "velocity_drive") {
    out.mode = MotorMode::VelocityDrive;
  } else if (mode == "position_drive") {
    out.mode = MotorMode::PositionDrive;
  } else {
    schema_error(mp + "/mode", "unknown motor mode '" + mode + "'");
  }
  out.target = m.contains("target") ? number(m["target"], mp + "/target") : 0.0;
  out.max_force = number(require(m, "max_force", mp), mp + "/max_force");
  if (!(out.max_force >= 0.0) || !std::isfinite(out.max_force)) {
    schema_error(mp + "/max_force", "must be finite and >= 0");
  }
  if (out.mode == MotorMode::PositionDrive) {
    out.kp = number(require(m, "kp", mp), mp + "/kp");
    out.kd = number(require(m, "kd", mp), mp + "/kd");
    if (!(out.kp > 0.0) || !(out.kd > 0.0)) schema_error(mp, "position drive gains must be positive");
  }
  return out;
}

inline json motor_to_json(const MotorParams& m) {
  json j{{"mode", m.mode == MotorMode::VelocityDrive ? "velocity_drive" : "position_drive"},
         {"target", m.target},
         {"max_force", m.max_force}};
  if (m.mode == MotorMode::PositionDrive) {
    j["kp"] = m.kp;
    j["kd"] = m.kd;
  }
  return j;
}

inline JointKind kind(const json& j, const std::string& path) {
  const std::string k = string(require(j, "kind", path), path + "/kind");
  auto parsed = joint_kind_from_string(k);
  if (!parsed) schema_error(path + "/kind", "unknown joint kind '" + k + "'");
  return *parsed;
}

inline void joint_common(Joint& joint, const json& j, const std::string& path) {
  joint.axis = j.contains("axis") ? vec3(j["axis"], path + "/axis") : Vec3::UnitZ();
  if (!(joint.axis.norm() > 0.0)) schema_error(path + "/axis", "zero axis");
  joint.axis.normalize();
  joint.motor = motor(j, path);
  joint.damping = j.contains("damping") ? number(j["damping"], path + "/damping") : 0.0;
  if (!(joint.damping >= 0.0)) schema_error(path + "/damping", "must be >= 0");
  if (joint.motor && joint.kind != JointKind::Revolute && joint.kind != JointKind::Prismatic) {
    schema_error(path + "/motor", "motors are only supported on revolute and prismatic joints");
  }
}

inline std::vector<Actuation> actuation(const json& doc) {
  std::vector<Actuation> out;
  if (!doc.contains("actuation")) return out;
  const json& arr = doc["actuation"];
  if (!arr.is_array()) schema_error("/actuation", "expected an array");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string path = "/actuation/" + std::to_string(i);
    Actuation a;
    a.joint = string(require(arr[i], "joint", path), path + "/joint");
    const json& sched = require(arr[i], "schedule", path);
    if (!sched.is_array()) schema_error(path + "/schedule", "expected an array of [time, target]");
    for (std::size_t k = 0; k < sched.size(); ++k) {
      const std::string sp = path + "/schedule/" + std::to_string(k);
      if (!sched[k].is_array() || sched[k].size() != 2) schema_error(sp, "expected [time, target]");
      const double t = number(sched[k][0], sp + "/0");
      if (!a.schedule.empty() && t < a.schedule.back().first) {
        schema_error(sp, "schedule times must be sorted");
      }
      a.schedule.emplace_back(t, number(sched[k][1], sp + "/1"));
    }
    out.push_back(std::move(a));
  }
  return out;
}

inline json actuation_to_json(const std::vector<Actuation>& acts) {
  json arr = json::array();
  for (const auto& a : acts) {
    json sched = json::array();
    for (const auto& [t, v] : a.schedule) sched.push_back(json::array({t, v}));
    arr.push_back({{"joint", a.joint}, {"schedule", sched}});
  }
  return arr;
}

inline void check_references(const SceneModel& scene) {
  std::set<std::string> ids;
  for (std::size_t i = 0; i < scene.bodies.size(); ++i) {
    const auto& id = scene.bodies[i].id;
    if (id == kWorld) schema_error("/bodies/" + std::to_string(i) + "/id", "'world' is reserved");
    if (!ids.insert(id).second) {
      schema_error("/bodies/" + std::to_string(i) + "/id", "duplicate body id '" + id + "'");
    }
  }
  std::set<std::string> jids;
  for (std::size_t i = 0; i < scene.joints.size(); ++i) {
    const auto& j = scene.joints[i];
    const std::string path = "/joints/" + std::to_string(i);
    if (!jids.insert(j.id).second) schema_error(path + "/id", "duplicate joint id '" + j.id + "'");
    for (const auto* ref : {&j.parent, &j.child}) {
      if (*ref != kWorld && !ids.count(*ref)) {
        throw Error(ErrorKind::DanglingReference,
                    path + ": joint '" + j.id + "' references unknown body '" + *ref + "'");
      }
    }
    if (j.parent == j.child) schema_error(path, "parent and child must differ");
  }
  for (std::size_t i = 0; i < scene.actuation.size(); ++i) {
    const auto& a = scene.actuation[i];
    const int ji = scene.joint_index(a.joint);
    if (ji < 0) {
      throw Error(ErrorKind::DanglingReference,
                  "/actuation/" + std::to_string(i) + ": unknown joint '" + a.joint + "'");
    }
    if (!scene.joints[ji].motor) {
      schema_error("/actuation/" + std::to_string(i), "joint '" + a.joint + "' has no motor");
    }
  }
  for (const auto& b : scene.bodies) {
    try {
      validate_mass_properties(b);
    } catch (const Error& e) {
      schema_error("/bodies/" + b.id, e.what());
    }
  }
}

}  // namespace io

inline LoadedScene load_world_frame(const json& doc) {
  io::check_header(doc, Convention::WorldFrame);
  LoadedScene out;
  SceneModel& scene = out.scene;
  scene.convention = Convention::WorldFrame;
  scene.name = doc.value("name", std::string{});
  if (doc.contains("gravity")) scene.gravity = io::vec3(doc["gravity"], "/gravity");

  const json& bodies = io::require(doc, "bodies", "");
  if (!bodies.is_array()) io::schema_error("/bodies", "expected an array");
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    const std::string path = "/bodies/" + std::to_string(i);
    const json& b = bodies[i];
    RigidBody body;
    body.id = io::string(io::require(b, "id", path), path + "/id");
    body.is_static = b.value("static", false);
    body.mass = b.contains("mass") ? io::number(b["mass"], path + "/mass") : (body.is_static ? 0.0 : 1.0);
    if (!body.is_static) io::require(b, "mass", path);
    body.inertia_body = b.contains("inertia") ? io::inertia(b["inertia"], path + "/inertia")
                                              : Mat3::Identity();
    body.pose.position = io::vec3(io::require(b, "position", path), path + "/position");
    if (b.contains("orientation")) body.pose.orientation = io::quat(b["orientation"], path + "/orientation");
    if (b.contains("linear_velocity")) {
      body.twist.linear = io::vec3(b["linear_velocity"], path + "/linear_velocity");
    }
    if (b.contains("angular_velocity")) {
      body.twist.angular = io::vec3(b["angular_velocity"], path + "/angular_velocity");
    }
    scene.bodies.push_back(std::move(body));
  }

  std::map<std::string, Pose> poses;
  for (const auto& b : scene.bodies) poses[b.id] = b.pose;
  poses[std::string(kWorld)] = Pose{};

  const json& joints = doc.contains("joints") ? doc["joints"] : json::array();
  if (!joints.is_array()) io::schema_error("/joints", "expected an array");
  for (std::size_t i = 0; i < joints.size(); ++i) {
    const std::string path = "/joints/" + std::to_string(i);
    const json& j = joints[i];
    Joint joint;
    joint.id = io::string(io::require(j, "id", path), path + "/id");
    joint.kind = io::kind(j, path);
    joint.parent = j.contains("parent") ? io::string(j["parent"], path + "/parent") : std::string(kWorld);
    joint.child = io::string(io::require(j, "child", path), path + "/child");
    for (const auto* ref : {&joint.parent, &joint.child}) {
      if (!poses.count(*ref)) {
        throw Error(ErrorKind::DanglingReference,
                    path + ": joint '" + joint.id + "' references unknown body '" + *ref + "'");
      }
    }
    if (j.contains("frame")) {
      const Pose frame = io::pose(j["frame"], path + "/frame");
      joint.anchor_parent = frame.relative_to(poses[joint.parent]);
      joint.anchor_child = frame.relative_to(poses[joint.child]);
    } else {
      joint.anchor_parent = io::pose(io::require(j, "anchor_parent", path), path + "/anchor_parent");
      joint.anchor_child = io::pose(io::require(j, "anchor_child", path), path + "/anchor_child");
    }
    io::joint_common(joint, j, path);
    scene.joints.push_back(std::move(joint));
  }
  scene.actuation = io::actuation(doc);
  io::check_references(scene);
  out.report.convention = Convention::WorldFrame;
  return out;
}

namespace io {

struct ChainedBody {
  Pose frame_a;  // world
  std::map<std::string, Vec3> frames;  // points in frame A, including "a" and "b"
  Vec3 com = Vec3::Zero();             // in frame A
};

inline Pose chained_frame_pose(const ChainedBody& cb, const std::string& name, const std::string& path) {
  auto it = cb.frames.find(name);
  if (it == cb.frames.end()) schema_error(path, "unknown frame '" + name + "'");
  return {cb.frame_a.transform_point(it->second), cb.frame_a.orientation};
}

}  // namespace io

inline LoadedScene load_chained_frame(const json& doc) {
  io::check_header(doc, Convention::ChainedFrame);
  LoadedScene out;
  SceneModel& scene = out.scene;
  scene.convention = Convention::ChainedFrame;
  scene.name = doc.value("name", std::string{});
  if (doc.contains("gravity")) scene.gravity = io::vec3(doc["gravity"], "/gravity");

  std::map<std::string, io::ChainedBody> chain;
  const json& bodies = io::require(doc, "bodies", "");
  if (!bodies.is_array()) io::schema_error("/bodies", "expected an array");
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    const std::string path = "/bodies/" + std::to_string(i);
    const json& b = bodies[i];
    RigidBody body;
    body.id = io::string(io::require(b, "id", path), path + "/id");
    body.is_static = b.value("static", false);
    body.mass = b.contains("mass") ? io::number(b["mass"], path + "/mass") : 0.0;
    if (!body.is_static) io::require(b, "mass", path);
    body.inertia_body = b.contains("inertia") ? io::inertia(b["inertia"], path + "/inertia")
                                              : Mat3::Identity();

    const std::string pred =
        b.contains("predecessor") ? io::string(b["predecessor"], path + "/predecessor") : std::string(kWorld);
    const Pose rel = b.contains("frame_a") ? io::pose(b["frame_a"], path + "/frame_a") : Pose{};
    io::ChainedBody cb;
    if (pred == kWorld) {
      cb.frame_a = rel;
    } else {
      auto it = chain.find(pred);
      if (it == chain.end()) {
        throw Error(ErrorKind::ChainOrderError,
                    path + ": predecessor '" + pred + "' of body '" + body.id + "' is not defined earlier");
      }
      const std::string pframe = b.value("predecessor_frame", std::string("b"));
      cb.frame_a = io::chained_frame_pose(it->second, pframe, path + "/predecessor_frame").compose(rel);
    }
    const Vec3 r_ab = io::vec3(io::require(b, "r_ab", path), path + "/r_ab");
    cb.frames["a"] = Vec3::Zero();
    cb.frames["b"] = r_ab;
    if (b.contains("frames")) {
      if (!b["frames"].is_object()) io::schema_error(path + "/frames", "expected an object");
      for (const auto& [name, v] : b["frames"].items()) {
        if (name == "a" || name == "b") io::schema_error(path + "/frames/" + name, "reserved frame name");
        cb.frames[name] = io::vec3(v, path + "/frames/" + name);
      }
    }
    cb.com = b.contains("com") ? io::vec3(b["com"], path + "/com") : Vec3(0.5 * r_ab);
    body.pose.position = cb.frame_a.transform_point(cb.com);
    body.pose.orientation = cb.frame_a.orientation;
    if (b.contains("linear_velocity")) {
      body.twist.linear = io::vec3(b["linear_velocity"], path + "/linear_velocity");
    }
    if (b.contains("angular_velocity")) {
      body.twist.angular = io::vec3(b["angular_velocity"], path + "/angular_velocity");
    }
    if (chain.count(body.id)) io::schema_error(path + "/id", "duplicate body id '" + body.id + "'");
    chain.emplace(body.id, cb);
    scene.bodies.push_back(std::move(body));
  }

  const json& joints = doc.contains("joints") ? doc["joints"] : json::array();
  if (!joints.is_array()) io::schema_error("/joints", "expected an array");
  for (std::size_t i = 0; i < joints.size(); ++i) {
    const std::string path = "/joints/" + std::to_string(i);
    const json& j = joints[i];
    Joint joint;
    joint.id = io::string(io::require(j, "id", path), path + "/id");
    joint.kind = io::kind(j, path);
    joint.parent = j.contains("parent") ? io::string(j["parent"], path + "/parent") : std::string(kWorld);
    joint.child = io::string(io::require(j, "child", path), path + "/child");
    if (joint.child == kWorld || !chain.count(joint.child)) {
      throw Error(ErrorKind::DanglingReference,
                  path + ": joint '" + joint.id + "' references unknown child '" + joint.child + "'");
    }
    Pose parent_frame;
    Pose parent_body_pose;
    if (joint.parent == kWorld) {
      parent_frame = io::pose(io::require(j, "parent_frame", path), path + "/parent_frame");
    } else {
      auto it = chain.find(joint.parent);
      if (it == chain.end()) {
        throw Error(ErrorKind::DanglingReference,
                    path + ": joint '" + joint.id + "' references unknown parent '" + joint.parent + "'");
      }
      parent_frame = io::chained_frame_pose(
          it->second, io::string(io::require(j, "parent_frame", path), path + "/parent_frame"),
          path + "/parent_frame");
      parent_body_pose = scene.bodies[scene.body_index(joint.parent)].pose;
    }
    const io::ChainedBody& child_cb = chain.at(joint.child);
    const Pose child_frame = io::chained_frame_pose(
        child_cb, io::string(io::require(j, "child_frame", path), path + "/child_frame"),
        path + "/child_frame");
    const Pose& child_body_pose = scene.bodies[scene.body_index(joint.child)].pose;

    joint.anchor_parent = parent_frame.relative_to(parent_body_pose);
    // Joint frames share the parent-side orientation; only the position of
    // the child-side frame comes from the child's chain.
    joint.anchor_child = Pose{child_frame.position, parent_frame.orientation}.relative_to(child_body_pose);
    io::joint_common(joint, j, path);

    const double residual = (child_frame.position - parent_frame.position).norm();
    out.report.closure.push_back({joint.id, residual});
    out.report.max_closure_residual = std::max(out.report.max_closure_residual, residual);
    scene.joints.push_back(std::move(joint));
  }
  scene.actuation = io::actuation(doc);
  io::check_references(scene);
  out.report.convention = Convention::ChainedFrame;
  return out;
}

/// Rewrites a chained_frame document as an equivalent world_frame document:
/// world body poses from the chain walk, one world frame per joint taken at
/// the parent-side frame.
inline json chained_to_world(const json& doc) {
  const LoadedScene loaded = load_chained_frame(doc);
  const SceneModel& scene = loaded.scene;
  json out;
  out["version"] = kSceneVersion;
  out["convention"] = "world_frame";
  if (doc.contains("name")) out["name"] = doc["name"];
  out["gravity"] = io::to_json(scene.gravity);
  out["bodies"] = json::array();
  for (std::size_t i = 0; i < scene.bodies.size(); ++i) {
    const auto& b = scene.bodies[i];
    json jb{{"id", b.id},
            {"position", io::to_json(b.pose.position)},
            {"orientation", io::to_json(b.pose.orientation)},
            {"inertia", io::to_json(b.inertia_body)}};
    if (!b.twist.linear.isZero(0.0)) jb["linear_velocity"] = io::to_json(b.twist.linear);
    if (!b.twist.angular.isZero(0.0)) jb["angular_velocity"] = io::to_json(b.twist.angular);
    if (b.is_static) {
      jb["static"] = true;
    } else {
      jb["mass"] = b.mass;
    }
    out["bodies"].push_back(jb);
  }
  out["joints"] = json::array();
  const BodyIndex index = make_body_index(scene.bodies);
  for (std::size_t i = 0; i < scene.joints.size(); ++i) {
    const auto& j = scene.joints[i];
    const JointGeometry g = joint_geometry(j, scene.bodies, index);
    json jj{{"id", j.id},
            {"kind", std::string(to_string(j.kind))},
            {"parent", j.parent},
            {"child", j.child},
            {"frame", io::to_json(g.frame_a)},
            {"axis", io::to_json(j.axis)}};
    if (j.motor) jj["motor"] = io::motor_to_json(*j.motor);
    if (j.damping > 0.0) jj["damping"] = j.damping;
    out["joints"].push_back(jj);
  }
  if (doc.contains("actuation")) out["actuation"] = doc["actuation"];
  return out;
}

/// Canonical world_frame document with explicit anchors; exact inverse of
/// load_world_frame on its own output.
inline json serialize(const SceneModel& scene) {
  json out;
  out["version"] = kSceneVersion;
  out["convention"] = "world_frame";
  out["name"] = scene.name;
  out["gravity"] = io::to_json(scene.gravity);
  out["bodies"] = json::array();
  for (const auto& b : scene.bodies) {
    json jb{{"id", b.id},
            {"mass", b.mass},
            {"inertia", io::to_json(b.inertia_body)},
            {"position", io::to_json(b.pose.position)},
            {"orientation", io::to_json(b.pose.orientation)},
            {"linear_velocity", io::to_json(b.twist.linear)},
            {"angular_velocity", io::to_json(b.twist.angular)}};
    if (b.is_static) jb["static"] = true;
    out["bodies"].push_back(jb);
  }
  out["joints"] = json::array();
  for (const auto& j : scene.joints) {
    json jj{{"id", j.id},
            {"kind", std::string(to_string(j.kind))},
            {"parent", j.parent},
            {"child", j.child},
            {"anchor_parent", io::to_json(j.anchor_parent)},
            {"anchor_child", io::to_json(j.anchor_child)},
            {"axis", io::to_json(j.axis)},
            {"damping", j.damping}};
    if (j.motor) jj["motor"] = io::motor_to_json(*j.motor);
    out["joints"].push_back(jj);
  }
  out["actuation"] = io::actuation_to_json(scene.actuation);
  return out;
}

/// Dispatches on the document's `convention` field.
inline LoadedScene load_scene(const json& doc) {
  if (!doc.is_object() || !doc.contains("convention") || !doc["convention"].is_string()) {
    io::schema_error("/convention", "missing required field");
  }
  const std::string conv = doc["convention"].get<std::string>();
  if (conv == "chained_frame") return load_chained_frame(doc);
  if (conv == "world_frame") return load_world_frame(doc);
  io::schema_error("/convention", "unknown convention '" + conv + "'");
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::SchemaError, path + ": " + e.what());
  }
}

}  // namespace loopdyn
